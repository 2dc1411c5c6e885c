// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include "tilesplat/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oracle {

std::filesystem::path data_dir() { return TILESPLAT_TEST_DATA_DIR; }

std::uint64_t splitmix64(std::uint64_t x) {
    std::uint64_t z = x + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double unit_from(std::uint64_t key) { return double(splitmix64(key) >> 11) * 0x1.0p-53; }

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            t.header = cells;
            first = false;
        } else {
            t.rows.push_back(cells);
        }
    }
    return t;
}

std::vector<SsimPair> load_ssim_reference() {
    const auto table = read_csv(data_dir() / "ssim_reference.csv");
    std::vector<SsimPair> out;
    for (const auto& row : table.rows) {
        const std::uint64_t p = std::stoull(row[0]);
        const int w = std::stoi(row[1]), h = std::stoi(row[2]);
        const long long amp = std::stoll(row[3]);
        SsimPair pair{ImageBuffer(w, h), ImageBuffer(w, h), std::stod(row[4])};
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                for (int c = 0; c < 3; ++c) {
                    const std::uint64_t key = (p << 32) | std::uint64_t((y * w + x) * 3 + c);
                    const long long ai = static_cast<long long>(splitmix64(key) % 256);
                    const long long d = static_cast<long long>(splitmix64(key ^ 0xabcdefull) % std::uint64_t(2 * amp + 1)) - amp;
                    const long long bi = std::clamp(ai + d, 0LL, 255LL);
                    pair.a.at(x, y)[c] = float(double(ai) / 255.0);
                    pair.b.at(x, y)[c] = float(double(bi) / 255.0);
                }
            }
        }
        out.push_back(std::move(pair));
    }
    return out;
}

Camera front_camera(int width, int height, double focal) {
    Camera cam;
    cam.fx = cam.fy = focal;
    cam.cx = width / 2.0;
    cam.cy = height / 2.0;
    cam.width = width;
    cam.height = height;
    return cam;
}

template <typename T>
BasicGaussianCloud<T> random_cloud(std::uint64_t seed, std::size_t n, double min_scale, double max_scale,
                                   double min_opacity, double max_opacity) {
    BasicGaussianCloud<T> c;
    c.resize(n);
    std::uint64_t k = seed * 0x100000001b3ull;
    auto u = [&] { return unit_from(k++); };
    for (std::size_t i = 0; i < n; ++i) {
        const double z = 2.0 + 4.0 * u();
        c.positions[i] = Vec3<T>(T((2 * u() - 1) * 0.6 * z), T((2 * u() - 1) * 0.6 * z), T(z));
        for (int a = 0; a < 3; ++a) c.log_scales[i][a] = T(std::log(min_scale + (max_scale - min_scale) * u()));
        c.rotations[i] = Vec4<T>(T(u() - 0.5), T(u() - 0.5), T(u() - 0.5), T(u() - 0.5));
        if (c.rotations[i].norm() < T(0.05)) c.rotations[i] = Vec4<T>(1, 0, 0, 0);
        c.opacity_logits[i] = logit(T(min_opacity + (max_opacity - min_opacity) * u()));
        for (int a = 0; a < 3; ++a) c.colors[i][a] = logit(T(0.05 + 0.9 * u()));
    }
    return c;
}

template BasicGaussianCloud<float> random_cloud(std::uint64_t, std::size_t, double, double, double, double);
template BasicGaussianCloud<double> random_cloud(std::uint64_t, std::size_t, double, double, double, double);

ImageBuffer random_image(std::uint64_t seed, int width, int height) {
    ImageBuffer img(width, height);
    std::uint64_t k = seed * 0x9e3779b97f4a7c15ull + 17;
    for (auto& p : img.pixels)
        for (int c = 0; c < 3; ++c) p[c] = float(unit_from(k++));
    return img;
}

std::vector<std::uint32_t> overlapped_tiles(double mx, double my, int radius, const TileGrid& grid) {
    std::vector<std::uint32_t> out;
    const double lo_x = std::max(mx - radius, 0.0), hi_x = std::min(mx + radius, double(grid.width));
    const double lo_y = std::max(my - radius, 0.0), hi_y = std::min(my + radius, double(grid.height));
    if (!(lo_x < double(grid.width) && hi_x >= 0.0 && lo_x <= hi_x)) return out;
    if (!(lo_y < double(grid.height) && hi_y >= 0.0 && lo_y <= hi_y)) return out;
    const double ts = grid.tile_size;
    for (int ty = 0; ty < grid.tiles_y; ++ty) {
        for (int tx = 0; tx < grid.tiles_x; ++tx) {
            const bool x_hit = tx * ts <= hi_x && (tx + 1) * ts > lo_x;
            const bool y_hit = ty * ts <= hi_y && (ty + 1) * ts > lo_y;
            if (x_hit && y_hit) out.push_back(std::uint32_t(ty * grid.tiles_x + tx));
        }
    }
    return out;
}

std::vector<std::vector<TileEntry>> naive_tile_lists(const ProjectedSet<float>& proj, const TileGrid& grid) {
    std::vector<std::vector<TileEntry>> lists(std::size_t(grid.tile_count()));
    for (std::size_t i = 0; i < proj.size(); ++i) {
        if (!proj.visible[i] || proj.radii[i] <= 0) continue;
        std::uint32_t bits = 0;
        const float d = float(proj.depths[i]);
        std::memcpy(&bits, &d, sizeof bits);
        for (auto t : overlapped_tiles(proj.means2d[i].x(), proj.means2d[i].y(), proj.radii[i], grid)) {
            lists[t].push_back({bits, std::uint32_t(i)});
        }
    }
    for (auto& l : lists) {
        std::sort(l.begin(), l.end(), [](const TileEntry& a, const TileEntry& b) {
            return a.depth_bits != b.depth_bits ? a.depth_bits < b.depth_bits : a.gaussian < b.gaussian;
        });
    }
    return lists;
}

std::vector<std::uint64_t> exclusive_scan(const std::vector<std::uint32_t>& counts) {
    std::vector<std::uint64_t> out;
    std::uint64_t run = 0;
    for (auto c : counts) {
        out.push_back(run);
        run += c;
    }
    return out;
}

template <typename T>
PixelReplay<T> replay_pixel(const ProjectedSet<T>& proj, const std::vector<std::uint32_t>& order, int px, int py) {
    PixelReplay<T> r;
    double trans = 1.0;
    for (auto g : order) {
        const double dx = px + 0.5 - double(proj.means2d[g].x());
        const double dy = py + 0.5 - double(proj.means2d[g].y());
        const auto& q = proj.conics[g];
        const double sigma = 0.5 * (double(q[0]) * dx * dx + double(q[2]) * dy * dy) + double(q[1]) * dx * dy;
        if (sigma < 0.0) continue;
        const double alpha = std::min(0.99, double(proj.opacities[g]) * std::exp(-sigma));
        if (alpha < 1.0 / 255.0) continue;
        r.weights.push_back(alpha * trans);
        r.color += proj.colors[g].template cast<double>() * alpha * trans;
        trans *= 1.0 - alpha;
        if (trans < 1e-4) break;
    }
    r.final_transmittance = trans;
    return r;
}

template PixelReplay<float> replay_pixel(const ProjectedSet<float>&, const std::vector<std::uint32_t>&, int, int);
template PixelReplay<double> replay_pixel(const ProjectedSet<double>&, const std::vector<std::uint32_t>&, int, int);

namespace {

std::vector<double> gaussian_window() {
    std::vector<double> w(11);
    double sum = 0.0;
    for (int i = 0; i < 11; ++i) sum += w[std::size_t(i)] = std::exp(-double((i - 5) * (i - 5)) / (2.0 * 1.5 * 1.5));
    for (auto& v : w) v /= sum;
    return w;
}

} // namespace

double brute_force_ssim(const std::vector<double>& x, const std::vector<double>& y, int width, int height) {
    const auto g = gaussian_window();
    const double c1 = 1e-4, c2 = 9e-4;
    double total = 0.0;
    int count = 0;
    for (int oy = 0; oy + 11 <= height; ++oy) {
        for (int ox = 0; ox + 11 <= width; ++ox) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (int j = 0; j < 11; ++j) {
                for (int i = 0; i < 11; ++i) {
                    const double w = g[std::size_t(i)] * g[std::size_t(j)];
                    const double a = x[std::size_t((oy + j) * width + ox + i)];
                    const double b = y[std::size_t((oy + j) * width + ox + i)];
                    mx += w * a;
                    my += w * b;
                    sxx += w * a * a;
                    syy += w * b * b;
                    sxy += w * a * b;
                }
            }
            const double vx = sxx - mx * mx, vy = syy - my * my, cxy = sxy - mx * my;
            total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++count;
        }
    }
    return total / count;
}

double brute_force_ssim(const ImageBuffer& a, const ImageBuffer& b) {
    double sum = 0.0;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> x, y;
        for (std::size_t i = 0; i < a.pixels.size(); ++i) {
            x.push_back(a.pixels[i][c]);
            y.push_back(b.pixels[i][c]);
        }
        sum += brute_force_ssim(x, y, a.width, a.height);
    }
    return sum / 3.0;
}

double direct_psnr(const ImageBuffer& a, const ImageBuffer& b) {
    long double se = 0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i)
        for (int c = 0; c < 3; ++c) {
            const long double d = (long double)a.pixels[i][c] - (long double)b.pixels[i][c];
            se += d * d;
        }
    const long double mse = se / (3.0L * a.pixels.size());
    if (mse < 1e-10L) return 100.0;
    return double(-10.0L * std::log10(mse));
}

std::vector<std::uint64_t> replay_totals(const std::vector<ArenaEvent>& trace) {
    std::vector<std::uint64_t> out;
    long double total = 0;
    for (const auto& e : trace) {
        total += (long double)e.new_capacity - (long double)e.old_capacity;
        out.push_back(std::uint64_t(total));
    }
    return out;
}

std::uint64_t replay_peak(const std::vector<ArenaEvent>& trace) {
    const auto totals = replay_totals(trace);
    std::uint64_t peak = 0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        std::uint64_t instant = totals[k];
        if (trace[k].kind == ArenaEventKind::Resize && trace[k].copy_seconds > 0) instant += trace[k].old_capacity;
        peak = std::max(peak, instant);
    }
    return peak;
}

std::uint64_t footprint_at(const std::vector<ArenaEvent>& trace, double t) {
    const auto totals = replay_totals(trace);
    std::size_t last = trace.size();
    for (std::size_t k = 0; k < trace.size(); ++k)
        if (trace[k].t_seconds <= t) last = k;
    if (last == trace.size()) return 0;
    std::uint64_t bytes = totals[last];
    const auto& e = trace[last];
    if (e.kind == ArenaEventKind::Resize && t < e.t_seconds + e.copy_seconds) bytes += e.old_capacity;
    return bytes;
}

GradScene gradient_scene(std::uint64_t seed) {
    GradScene s;
    const std::size_t n = 1 + splitmix64(seed ^ 0x5eed) % 8;
    s.cloud = random_cloud<double>(seed, n, 0.15, 0.5, 0.2, 0.95);
    s.camera = front_camera(16, 16, 16.0);
    s.target = random_image(seed + 1000, 16, 16);
    return s;
}

std::vector<std::int64_t> branch_signature(const BasicGaussianCloud<double>& cloud, const Camera& camera,
                                           const ImageBuffer& target) {
    const TileGrid grid = TileGrid::for_camera(camera);
    const auto proj = project_forward(cloud, camera, grid);
    std::vector<std::int64_t> sig;
    for (std::size_t i = 0; i < proj.size(); ++i) {
        sig.push_back(proj.visible[i]);
        sig.push_back(proj.radii[i]);
        // Which side of the Jacobian guard band the center falls on, per axis.
        const Eigen::Vector3d t = camera.rotation * cloud.positions[i] + camera.translation;
        const double lim_x = 1.3 * std::max(camera.cx, camera.width - camera.cx) / camera.fx;
        const double lim_y = 1.3 * std::max(camera.cy, camera.height - camera.cy) / camera.fy;
        sig.push_back(t.x() > lim_x * t.z() ? 1 : (t.x() < -lim_x * t.z() ? -1 : 0));
        sig.push_back(t.y() > lim_y * t.z() ? 1 : (t.y() < -lim_y * t.z() ? -1 : 0));
    }
    std::vector<std::vector<std::uint32_t>> per_tile(std::size_t(grid.tile_count()));
    std::vector<std::pair<std::uint32_t, std::uint32_t>> order;
    for (std::size_t i = 0; i < proj.size(); ++i) {
        if (!proj.visible[i] || proj.radii[i] <= 0) continue;
        for (auto t : overlapped_tiles(proj.means2d[i].x(), proj.means2d[i].y(), proj.radii[i], grid))
            per_tile[t].push_back(std::uint32_t(i));
    }
    for (auto& list : per_tile) {
        std::sort(list.begin(), list.end(), [&](std::uint32_t a, std::uint32_t b) {
            const float da = float(proj.depths[a]), db = float(proj.depths[b]);
            return da != db ? da < db : a < b;
        });
    }
    for (int y = 0; y < camera.height; ++y) {
        for (int x = 0; x < camera.width; ++x) {
            const auto& list = per_tile[std::size_t((y / grid.tile_size) * grid.tiles_x + x / grid.tile_size)];
            double trans = 1.0;
            Vec3<double> color = Vec3<double>::Zero();
            for (auto g : list) {
                const double dx = x + 0.5 - proj.means2d[g].x(), dy = y + 0.5 - proj.means2d[g].y();
                const auto& q = proj.conics[g];
                const double sigma = 0.5 * (q[0] * dx * dx + q[2] * dy * dy) + q[1] * dx * dy;
                if (sigma < 0) {
                    sig.push_back(0);
                    continue;
                }
                const double raw = proj.opacities[g] * std::exp(-sigma);
                if (std::min(0.99, raw) < 1.0 / 255.0) {
                    sig.push_back(1);
                    continue;
                }
                sig.push_back(raw > 0.99 ? 2 : 3);
                const double alpha = std::min(0.99, raw);
                color += proj.colors[g] * alpha * trans;
                trans *= 1.0 - alpha;
                if (trans < 1e-4) {
                    sig.push_back(4);
                    break;
                }
            }
            for (int c = 0; c < 3; ++c) {
                const double r = color[c] - double(target.at(x, y)[c]);
                sig.push_back(r > 0 ? 1 : (r < 0 ? -1 : 0));
            }
        }
    }
    return sig;
}

GradCheckReport check_gradients(const GradScene& scene, double h, double rel_tol, double abs_tol) {
    GradCheckReport report;
    const auto analytic =
        view_loss_and_gradients(scene.cloud, scene.camera, scene.target, scene.lambda).grads.params;
    const auto base_sig = branch_signature(scene.cloud, scene.camera, scene.target);
    auto loss_at = [&](const BasicGaussianCloud<double>& c) {
        return view_loss_and_gradients(c, scene.camera, scene.target, scene.lambda).loss;
    };
    for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
        for (std::size_t k = 0; k < BasicGaussianCloud<double>::kScalarsPerGaussian; ++k) {
            auto shifted = [&](double delta) {
                auto c = scene.cloud;
                scalar_at(c, i, k) += delta;
                return c;
            };
            bool stable = true;
            for (double d : {h, -h, 10 * h, -10 * h}) {
                if (branch_signature(shifted(d), scene.camera, scene.target) != base_sig) {
                    stable = false;
                    break;
                }
            }
            if (!stable) {
                ++report.excluded;
                continue;
            }
            const double fd = (loss_at(shifted(h)) - loss_at(shifted(-h))) / (2 * h);
            const double an = scalar_at(analytic, i, k);
            const double abs_err = std::fabs(fd - an);
            const double rel = abs_err / std::max(std::fabs(fd), std::fabs(an));
            ++report.checked;
            ++report.checked_per_group[int(param_group_of(k))];
            // Gradients near zero are judged on absolute error, all others on relative error.
            if (std::max(std::fabs(fd), std::fabs(an)) < 10 * abs_tol) {
                if (abs_err < abs_tol) continue;
                ++report.failed;
                report.failures.push_back("gaussian " + std::to_string(i) + " scalar " + std::to_string(k) +
                                          ": near-zero analytic " + std::to_string(an) + " fd " + std::to_string(fd));
                continue;
            }
            report.worst_rel = std::max(report.worst_rel, rel);
            if (rel >= rel_tol) {
                ++report.failed;
                report.failures.push_back("gaussian " + std::to_string(i) + " scalar " + std::to_string(k) +
                                          ": analytic " + std::to_string(an) + " fd " + std::to_string(fd));
            }
        }
    }
    return report;
}

} // namespace oracle
