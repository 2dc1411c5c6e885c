// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/scene_io.hpp"

#include "tilesplat/checkpoint.hpp"
#include "tilesplat/error.hpp"
#include "tilesplat/render.hpp"

#include <json.hpp>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

namespace tilesplat {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kPerturbationStream = 0x9e3779b97f4a7c15ull;

double number_field(const json& obj, const char* key) {
    if (!obj.contains(key) || !obj[key].is_number()) {
        throw Error(ErrorCode::BadJson, std::string("camera entry needs numeric '") + key + "'");
    }
    return obj[key].get<double>();
}

Camera camera_from_json(const json& obj) {
    if (!obj.is_object()) throw Error(ErrorCode::BadJson, "camera entry is not an object");
    Camera cam;
    cam.fx = number_field(obj, "fx");
    cam.fy = number_field(obj, "fy");
    cam.cx = number_field(obj, "cx");
    cam.cy = number_field(obj, "cy");
    cam.width = static_cast<int>(number_field(obj, "width"));
    cam.height = static_cast<int>(number_field(obj, "height"));
    const auto& rot = obj.value("rotation", json());
    const auto& tr = obj.value("translation", json());
    if (!rot.is_array() || rot.size() != 9 || !tr.is_array() || tr.size() != 3) {
        throw Error(ErrorCode::BadJson, "camera needs 9 rotation and 3 translation numbers");
    }
    try {
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) cam.rotation(r, c) = rot[std::size_t(3 * r + c)].get<double>();
            cam.translation[r] = tr[std::size_t(r)].get<double>();
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadJson, e.what());
    }
    if (!obj.contains("image") || !obj["image"].is_string()) {
        throw Error(ErrorCode::BadJson, "camera entry needs an 'image' filename");
    }
    cam.image_name = obj["image"].get<std::string>();
    return cam;
}

json camera_to_json(const Camera& cam) {
    json rot = json::array(), tr = json::array();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) rot.push_back(cam.rotation(r, c));
        tr.push_back(cam.translation[r]);
    }
    return {{"fx", cam.fx},         {"fy", cam.fy},   {"cx", cam.cx},          {"cy", cam.cy},
            {"width", cam.width},   {"height", cam.height}, {"rotation", rot}, {"translation", tr},
            {"image", cam.image_name}};
}

GaussianCloud random_cloud_in_box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi, std::size_t n,
                                  double extent, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    GaussianCloud cloud;
    cloud.resize(n);
    const float log_scale = static_cast<float>(std::log(0.01 * extent));
    for (std::size_t i = 0; i < n; ++i) {
        for (int a = 0; a < 3; ++a) cloud.positions[i][a] = static_cast<float>(lo[a] + unit(rng) * (hi[a] - lo[a]));
        cloud.log_scales[i].setConstant(log_scale);
        cloud.rotations[i] = Vec4<float>(1, 0, 0, 0);
        cloud.opacity_logits[i] = logit(0.1f);
        cloud.colors[i].setZero();
    }
    return cloud;
}

} // namespace

ImageBuffer read_png(const fs::path& path) {
    if (!fs::exists(path)) throw Error(ErrorCode::MissingFile, "missing image " + path.string());
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.c_str())) {
        throw Error(ErrorCode::IoError, "cannot decode " + path.string() + ": " + img.message);
    }
    img.format = PNG_FORMAT_RGB;
    std::vector<png_byte> bytes(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, bytes.data(), 0, nullptr)) {
        png_image_free(&img);
        throw Error(ErrorCode::IoError, "cannot decode " + path.string() + ": " + img.message);
    }
    ImageBuffer out(static_cast<int>(img.width), static_cast<int>(img.height));
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
        for (int c = 0; c < 3; ++c) out.pixels[i][c] = float(bytes[3 * i + std::size_t(c)]) / 255.0f;
    }
    return out;
}

void write_png(const fs::path& path, const ImageBuffer& image) {
    std::vector<png_byte> bytes(image.pixels.size() * 3);
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
            const float v = std::clamp(image.pixels[i][c], 0.0f, 1.0f);
            bytes[3 * i + std::size_t(c)] = static_cast<png_byte>(std::lround(v * 255.0f));
        }
    }
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.width);
    img.height = static_cast<png_uint_32>(image.height);
    img.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&img, path.c_str(), 0, bytes.data(), 0, nullptr)) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string() + ": " + img.message);
    }
}

ImageBuffer box_downsample(const ImageBuffer& image, int factor) {
    if (factor < 1) throw Error(ErrorCode::DimensionMismatch, "downscale factor must be >= 1");
    if (factor == 1) return image;
    ImageBuffer out(image.width / factor, image.height / factor);
    const float inv = 1.0f / float(factor * factor);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            Vec3<float> sum = Vec3<float>::Zero();
            for (int dy = 0; dy < factor; ++dy)
                for (int dx = 0; dx < factor; ++dx) sum += image.at(x * factor + dx, y * factor + dy);
            out.at(x, y) = sum * inv;
        }
    }
    return out;
}

Camera downscale_camera(Camera camera, int factor) {
    if (factor < 1) throw Error(ErrorCode::DimensionMismatch, "downscale factor must be >= 1");
    camera.fx /= factor;
    camera.fy /= factor;
    camera.cx /= factor;
    camera.cy /= factor;
    camera.width /= factor;
    camera.height /= factor;
    return camera;
}

double camera_extent(const std::vector<Camera>& cameras) {
    if (cameras.empty()) return 1.0;
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const auto& c : cameras) centroid += c.center();
    centroid /= double(cameras.size());
    double extent = 0.0;
    for (const auto& c : cameras) extent = std::max(extent, (c.center() - centroid).norm());
    return extent > 0.0 ? extent : 1.0;
}

SceneBundle load_scene(const fs::path& dir, const LoadOptions& opts) {
    const fs::path cameras_path = dir / "cameras.json";
    std::ifstream in(cameras_path);
    if (!in) throw Error(ErrorCode::MissingFile, "missing " + cameras_path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadJson, cameras_path.string() + ": " + e.what());
    }
    if (!doc.is_array() || doc.empty()) throw Error(ErrorCode::BadJson, "cameras.json must be a non-empty array");

    SceneBundle scene;
    scene.name = dir.filename().string();
    if (scene.name.empty()) scene.name = dir.parent_path().filename().string();
    for (const auto& entry : doc) {
        Camera cam = camera_from_json(entry);
        cam.validate();
        ImageBuffer img = read_png(dir / "images" / cam.image_name);
        if (img.width != cam.width || img.height != cam.height) {
            throw Error(ErrorCode::DimensionMismatch, cam.image_name + " does not match its camera size");
        }
        scene.cameras.push_back(downscale_camera(cam, opts.downscale));
        scene.targets.push_back(box_downsample(img, opts.downscale));
    }
    scene.extent = camera_extent(scene.cameras);

    const fs::path init = dir / "initial.splt";
    if (fs::exists(init)) {
        scene.initial = load_checkpoint(init);
    } else {
        Eigen::Vector3d lo = scene.cameras.front().center(), hi = lo;
        for (const auto& c : scene.cameras) {
            lo = lo.cwiseMin(c.center());
            hi = hi.cwiseMax(c.center());
        }
        scene.initial = random_cloud_in_box(lo, hi, opts.random_points, scene.extent, opts.seed);
    }
    return scene;
}

void save_scene(const fs::path& dir, const SceneBundle& scene) {
    std::error_code ec;
    fs::create_directories(dir / "images", ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + (dir / "images").string());
    json doc = json::array();
    for (std::size_t i = 0; i < scene.cameras.size(); ++i) {
        Camera cam = scene.cameras[i];
        if (cam.image_name.empty()) cam.image_name = "view_" + std::to_string(i) + ".png";
        doc.push_back(camera_to_json(cam));
        write_png(dir / "images" / cam.image_name, scene.targets[i]);
    }
    std::ofstream out(dir / "cameras.json");
    if (!out) throw Error(ErrorCode::IoError, "cannot write cameras.json");
    out << doc.dump(2) << "\n";
    if (!scene.initial.empty()) save_checkpoint(scene.initial, dir / "initial.splt");
}

GaussianCloud synthetic_reference(const SyntheticOptions& opts) {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    GaussianCloud ref;
    ref.resize(opts.gaussians);
    for (std::size_t i = 0; i < opts.gaussians; ++i) {
        for (int a = 0; a < 3; ++a) ref.positions[i][a] = static_cast<float>(2.0 * unit(rng) - 1.0);
        for (int a = 0; a < 3; ++a) ref.log_scales[i][a] = static_cast<float>(std::log(0.12 + 0.18 * unit(rng)));
        Vec4<double> q(normal(rng), normal(rng), normal(rng), normal(rng));
        if (q.norm() < 1e-6) q = Vec4<double>(1, 0, 0, 0);
        ref.rotations[i] = q.normalized().cast<float>();
        ref.opacity_logits[i] = static_cast<float>(logit(0.5 + 0.45 * unit(rng)));
        for (int c = 0; c < 3; ++c) ref.colors[i][c] = static_cast<float>(logit(0.1 + 0.8 * unit(rng)));
    }
    return ref;
}

SceneBundle generate_synthetic(const SyntheticOptions& opts) {
    SceneBundle scene;
    scene.name = "synthetic";
    const GaussianCloud ref = synthetic_reference(opts);

    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const auto& p : ref.positions) centroid += p.cast<double>();
    if (!ref.empty()) centroid /= double(ref.size());

    const double focal = 1.0 * opts.width;
    for (std::size_t k = 0; k < opts.cameras; ++k) {
        const double angle = 2.0 * std::numbers::pi * double(k) / double(opts.cameras);
        const Eigen::Vector3d eye =
            centroid + Eigen::Vector3d(opts.ring_radius * std::cos(angle), opts.ring_height,
                                       opts.ring_radius * std::sin(angle));
        Camera cam = Camera::look_at(eye, centroid, Eigen::Vector3d(0, 1, 0), focal, opts.width, opts.height);
        cam.image_name = "view_" + std::to_string(k) + ".png";
        scene.cameras.push_back(cam);
        scene.targets.push_back(render_frame(ref, cam).render.image);
    }
    scene.extent = camera_extent(scene.cameras);

    // Separate stream so the perturbation does not shift when the reference changes size.
    std::mt19937_64 rng(opts.perturbation_seed.value_or(opts.seed) ^ kPerturbationStream);
    std::normal_distribution<double> normal(0.0, 1.0);
    scene.initial = ref;
    const double pos_sigma = opts.position_noise * scene.extent;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        for (int a = 0; a < 3; ++a) {
            scene.initial.positions[i][a] += static_cast<float>(pos_sigma * normal(rng));
        }
        for (int c = 0; c < 3 && opts.color_noise > 0.0; ++c) {
            const double color = sigmoid(double(ref.colors[i][c])) + opts.color_noise * normal(rng);
            scene.initial.colors[i][c] = static_cast<float>(logit(std::clamp(color, 0.01, 0.99)));
        }
    }
    return scene;
}

} // namespace tilesplat
