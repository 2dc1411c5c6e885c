// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/projection.hpp"

#include "tilesplat/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tilesplat {
namespace {

constexpr int kMaxRadius = 1 << 20;

template <typename T> bool all_finite(const BasicGaussianCloud<T>& c, std::size_t i) {
    return c.positions[i].allFinite() && c.log_scales[i].allFinite() && c.rotations[i].allFinite() &&
           std::isfinite(c.opacity_logits[i]) && c.colors[i].allFinite();
}

// Quantities shared by the forward and backward projection of one Gaussian.
template <typename T> struct Footprint {
    Vec3<T> t;        // camera-space center
    Vec4<T> q;        // unit quaternion
    T q_norm;         // norm of the stored quaternion
    Mat3<T> rot;      // R(q)
    Vec3<T> scale;    // exp(log_scale)
    Mat3<T> m2;       // R * diag(scale)
    Mat3<T> cov3d;    // m2 * m2^T
    T u, v;           // x/z and y/z as used by the Jacobian (clamped to the guard band)
    bool clamp_u, clamp_v;
    Eigen::Matrix<T, 2, 3> jac;
    Eigen::Matrix<T, 2, 3> m; // jac * W
    T a, b, c;        // floored 2-D covariance [[a, b], [b, c]]
};

/// Limits on x/z and y/z for the Jacobian: 1.3 times the half field of view on the wider side.
template <typename T> Vec2<T> guard_band(const Camera& camera) {
    const double half_x = std::max(camera.cx, double(camera.width) - camera.cx);
    const double half_y = std::max(camera.cy, double(camera.height) - camera.cy);
    return Vec2<T>(T(kGuardBand * half_x / camera.fx), T(kGuardBand * half_y / camera.fy));
}

template <typename T>
Footprint<T> footprint(const BasicGaussianCloud<T>& cloud, std::size_t i, const Mat3<T>& w, const Vec3<T>& tw,
                       T fx, T fy, const Vec2<T>& lim) {
    Footprint<T> f;
    f.t = w * cloud.positions[i] + tw;
    f.q_norm = cloud.rotations[i].norm();
    if (!(f.q_norm > T(1e-12))) {
        throw Error(ErrorCode::ZeroQuaternion, "rotation " + std::to_string(i) + " has norm <= 1e-12");
    }
    f.q = cloud.rotations[i] / f.q_norm;
    f.rot = quat_to_rotation(f.q);
    f.scale = cloud.log_scales[i].array().exp().matrix();
    f.m2 = f.rot * f.scale.asDiagonal();
    f.cov3d = f.m2 * f.m2.transpose();

    const T z = f.t.z();
    const T u = f.t.x() / z, v = f.t.y() / z;
    f.u = std::clamp(u, -lim.x(), lim.x());
    f.v = std::clamp(v, -lim.y(), lim.y());
    f.clamp_u = f.u != u;
    f.clamp_v = f.v != v;
    f.jac << fx / z, T(0), -fx * f.u / z, T(0), fy / z, -fy * f.v / z;
    f.m = f.jac * w;
    const Mat2<T> cov2d = f.m * f.cov3d * f.m.transpose();
    f.a = cov2d(0, 0) + T(kCovarianceFloor);
    f.b = T(0.5) * (cov2d(0, 1) + cov2d(1, 0));
    f.c = cov2d(1, 1) + T(kCovarianceFloor);
    return f;
}

} // namespace

template <typename T> void ProjectedSet<T>::resize(std::size_t n) {
    means2d.assign(n, Vec2<T>::Zero());
    conics.assign(n, Vec3<T>::Zero());
    depths.assign(n, T(0));
    radii.assign(n, 0);
    tile_counts.assign(n, 0u);
    colors.assign(n, Vec3<T>::Zero());
    opacities.assign(n, T(0));
    visible.assign(n, 0);
}

template <typename T> void ScreenGrads<T>::reset(std::size_t n) {
    means2d.assign(n, Vec2<T>::Zero());
    conics.assign(n, Vec3<T>::Zero());
    colors.assign(n, Vec3<T>::Zero());
    opacities.assign(n, T(0));
}

template <typename T> void ScreenGrads<T>::add(const ScreenGrads& other) {
    for (std::size_t i = 0; i < size(); ++i) {
        means2d[i] += other.means2d[i];
        conics[i] += other.conics[i];
        colors[i] += other.colors[i];
        opacities[i] += other.opacities[i];
    }
}

TileRect tile_rect(double mean_x, double mean_y, int radius, const TileGrid& grid) {
    const double r = radius;
    if (!std::isfinite(mean_x) || !std::isfinite(mean_y)) return {};
    if (mean_x + r < 0.0 || mean_x - r >= grid.width || mean_y + r < 0.0 || mean_y - r >= grid.height) return {};
    const double lo_x = std::max(mean_x - r, 0.0), hi_x = std::min(mean_x + r, double(grid.width));
    const double lo_y = std::max(mean_y - r, 0.0), hi_y = std::min(mean_y + r, double(grid.height));
    const double ts = grid.tile_size;
    TileRect rect;
    rect.x0 = std::clamp(int(std::floor(lo_x / ts)), 0, grid.tiles_x);
    rect.x1 = std::clamp(int(std::floor(hi_x / ts)) + 1, 0, grid.tiles_x);
    rect.y0 = std::clamp(int(std::floor(lo_y / ts)), 0, grid.tiles_y);
    rect.y1 = std::clamp(int(std::floor(hi_y / ts)) + 1, 0, grid.tiles_y);
    return rect;
}

template <typename T>
ProjectedSet<T> project_forward(const BasicGaussianCloud<T>& cloud, const Camera& camera, const TileGrid& grid) {
    if (!cloud.consistent()) throw Error(ErrorCode::ShapeMismatch, "cloud arrays have inconsistent lengths");
    const Mat3<T> w = camera.rotation.cast<T>();
    const Vec3<T> tw = camera.translation.cast<T>();
    const T fx = T(camera.fx), fy = T(camera.fy), cx = T(camera.cx), cy = T(camera.cy);
    const Vec2<T> lim = guard_band<T>(camera);

    ProjectedSet<T> out;
    out.resize(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (!all_finite(cloud, i)) {
            throw Error(ErrorCode::NonFiniteParameter, "Gaussian " + std::to_string(i) + " has non-finite parameters");
        }
        const Vec3<T> t = w * cloud.positions[i] + tw;
        out.depths[i] = t.z();
        if (t.z() <= T(kNearPlane)) continue;

        const auto f = footprint(cloud, i, w, tw, fx, fy, lim);
        const T det = f.a * f.c - f.b * f.b;
        out.conics[i] = Vec3<T>(f.c / det, -f.b / det, f.a / det);

        const T mid = T(0.5) * (f.a + f.c);
        const T half_diff = T(0.5) * (f.a - f.c);
        const T lambda_max = mid + std::sqrt(half_diff * half_diff + f.b * f.b);
        const double radius = std::ceil(3.0 * std::sqrt(double(lambda_max)));
        out.radii[i] = int(std::min<double>(radius, kMaxRadius));

        out.means2d[i] = Vec2<T>(fx * t.x() / t.z() + cx, fy * t.y() / t.z() + cy);
        out.tile_counts[i] = tile_rect(double(out.means2d[i].x()), double(out.means2d[i].y()), out.radii[i], grid).count();
        out.colors[i] = cloud.colors[i].unaryExpr([](T v) { return sigmoid(v); });
        out.opacities[i] = sigmoid(cloud.opacity_logits[i]);
        out.visible[i] = 1;
    }
    return out;
}

template <typename T>
ProjectionGrads<T> project_backward(const BasicGaussianCloud<T>& cloud, const Camera& camera,
                                    const ProjectedSet<T>& proj, const ScreenGrads<T>& grads) {
    const std::size_t n = cloud.size();
    if (proj.size() != n || grads.size() != n) {
        throw Error(ErrorCode::ShapeMismatch, "projected set / gradients do not match the cloud");
    }
    const Mat3<T> w = camera.rotation.cast<T>();
    const Vec3<T> tw = camera.translation.cast<T>();
    const T fx = T(camera.fx), fy = T(camera.fy);
    const Vec2<T> lim = guard_band<T>(camera);
    const T half_w = T(0.5) * T(camera.width), half_h = T(0.5) * T(camera.height);

    ProjectionGrads<T> out;
    out.params.resize(n);
    out.screen_grad_norms.assign(n, T(0));

    for (std::size_t i = 0; i < n; ++i) {
        if (!proj.visible[i] || proj.tile_counts[i] == 0) continue;

        const T o = proj.opacities[i];
        out.params.opacity_logits[i] = grads.opacities[i] * o * (T(1) - o);
        const Vec3<T>& col = proj.colors[i];
        out.params.colors[i] = grads.colors[i].cwiseProduct(col.cwiseProduct(Vec3<T>::Ones() - col));

        const auto f = footprint(cloud, i, w, tw, fx, fy, lim);

        // conic = inverse([[A, B], [B, C]])
        const T ga = grads.conics[i][0], gb = grads.conics[i][1], gc = grads.conics[i][2];
        const T det = f.a * f.c - f.b * f.b;
        const T det2 = det * det;
        const T g_a = (-ga * f.c * f.c + gb * f.b * f.c - gc * f.b * f.b) / det2;
        const T g_b = (T(2) * ga * f.b * f.c - gb * (det + T(2) * f.b * f.b) + T(2) * gc * f.a * f.b) / det2;
        const T g_c = (-ga * f.b * f.b + gb * f.a * f.b - gc * f.a * f.a) / det2;

        // A = m0' S m0, B = m0' S m1, C = m1' S m1 with m = J W; the floor is additive.
        const Vec3<T> m0 = f.m.row(0).transpose(), m1 = f.m.row(1).transpose();
        const Vec3<T> s_m0 = f.cov3d * m0, s_m1 = f.cov3d * m1;
        Eigen::Matrix<T, 2, 3> g_m;
        g_m.row(0) = (T(2) * g_a * s_m0 + g_b * s_m1).transpose();
        g_m.row(1) = (g_b * s_m0 + T(2) * g_c * s_m1).transpose();
        const Eigen::Matrix<T, 2, 3> g_jac = g_m * w.transpose();

        const Mat3<T> g_cov = g_a * m0 * m0.transpose() +
                              T(0.5) * g_b * (m0 * m1.transpose() + m1 * m0.transpose()) +
                              g_c * m1 * m1.transpose();
        const Mat3<T> g_m2 = T(2) * g_cov * f.m2;
        const Mat3<T> g_rot = g_m2 * f.scale.asDiagonal();
        for (int k = 0; k < 3; ++k) {
            const T g_scale = f.rot.col(k).dot(g_m2.col(k));
            out.params.log_scales[i][k] = g_scale * f.scale[k];
        }
        const Vec4<T> g_unit = rotation_grad_to_quat(f.q, g_rot);
        out.params.rotations[i] = (g_unit - f.q * f.q.dot(g_unit)) / f.q_norm;

        // Camera-space center: through the mean projection and through J. A clamped u (or v)
        // no longer depends on the center, which removes its x (or y) path and halves the z path.
        const T x = f.t.x(), y = f.t.y(), z = f.t.z();
        const T z2 = z * z;
        const T ku = f.clamp_u ? T(1) : T(2), kv = f.clamp_v ? T(1) : T(2);
        const Vec2<T>& g_mean = grads.means2d[i];
        Vec3<T> g_t;
        g_t.x() = g_mean.x() * fx / z - (f.clamp_u ? T(0) : g_jac(0, 2) * fx / z2);
        g_t.y() = g_mean.y() * fy / z - (f.clamp_v ? T(0) : g_jac(1, 2) * fy / z2);
        g_t.z() = -g_mean.x() * fx * x / z2 - g_mean.y() * fy * y / z2 - g_jac(0, 0) * fx / z2 +
                  g_jac(0, 2) * ku * fx * f.u / z2 - g_jac(1, 1) * fy / z2 + g_jac(1, 2) * kv * fy * f.v / z2;
        out.params.positions[i] = w.transpose() * g_t;

        out.screen_grad_norms[i] = std::hypot(g_mean.x() * half_w, g_mean.y() * half_h);
    }
    return out;
}

template struct ProjectedSet<float>;
template struct ProjectedSet<double>;
template struct ScreenGrads<float>;
template struct ScreenGrads<double>;
template ProjectedSet<float> project_forward(const BasicGaussianCloud<float>&, const Camera&, const TileGrid&);
template ProjectedSet<double> project_forward(const BasicGaussianCloud<double>&, const Camera&, const TileGrid&);
template ProjectionGrads<float> project_backward(const BasicGaussianCloud<float>&, const Camera&,
                                                 const ProjectedSet<float>&, const ScreenGrads<float>&);
template ProjectionGrads<double> project_backward(const BasicGaussianCloud<double>&, const Camera&,
                                                  const ProjectedSet<double>&, const ScreenGrads<double>&);

} // namespace tilesplat
