// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/config.hpp"

#include "tilesplat/error.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace tilesplat {
namespace {

struct Field {
    std::string section;
    std::string key;
    std::function<void(const std::string&)> set;
    std::function<std::string()> get;
};

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
    throw Error(ErrorCode::ConfigError, fmt::format("cannot parse '{}' for {}", value, key));
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
        return v.substr(1, v.size() - 2);
    }
    return v;
}

template <typename Int> Int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size() || v < 0) bad_value(key, value);
        return static_cast<Int>(v);
    } catch (const std::logic_error&) {
        bad_value(key, value);
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) bad_value(key, value);
        return v;
    } catch (const std::logic_error&) {
        bad_value(key, value);
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "off" || value == "no") return false;
    bad_value(key, value);
}

class Registry {
public:
    void section(std::string name) { section_ = std::move(name); }

    template <typename Int> void integer(const std::string& key, Int& ref) {
        add(key, [&ref, k = full(key)](const std::string& v) { ref = parse_int<Int>(k, v); },
            [&ref] { return std::to_string(ref); });
    }
    void real(const std::string& key, double& ref) {
        add(key, [&ref, k = full(key)](const std::string& v) { ref = parse_double(k, v); },
            [&ref] { return fmt::format("{}", ref); });
    }
    void boolean(const std::string& key, bool& ref) {
        add(key, [&ref, k = full(key)](const std::string& v) { ref = parse_bool(k, v); },
            [&ref] { return std::string(ref ? "true" : "false"); });
    }
    void path(const std::string& key, std::filesystem::path& ref) {
        add(key, [&ref](const std::string& v) { ref = v; }, [&ref] { return "\"" + ref.string() + "\""; });
    }
    void mode(const std::string& key, DensifyMode& ref) {
        add(key, [&ref](const std::string& v) { ref = parse_densify_mode(v); },
            [&ref] { return "\"" + std::string(densify_mode_name(ref)) + "\""; });
    }

    const std::vector<Field>& fields() const { return fields_; }

private:
    std::string full(const std::string& key) const { return section_ + "." + key; }
    void add(const std::string& key, std::function<void(const std::string&)> set, std::function<std::string()> get) {
        fields_.push_back({section_, key, std::move(set), std::move(get)});
    }

    std::string section_;
    std::vector<Field> fields_;
};

Registry registry_for(RunConfig& c) {
    Registry r;
    r.section("train");
    r.path("scene", c.scene);
    r.path("out", c.out);
    r.integer("iterations", c.iterations);
    r.integer("seed", c.seed);
    r.integer("repeats", c.repeats);
    r.integer("threads", c.threads);
    r.integer("downscale", c.downscale);
    r.integer("random_points", c.random_points);
    r.real("lambda_dssim", c.lambda_dssim);
    r.boolean("preallocate", c.preallocate);
    r.mode("densify", c.densify);

    r.section("pipeline");
    r.integer("tile_size", c.tile_size);

    r.section("optimizer");
    r.real("lr_positions", c.lr.positions);
    r.real("lr_log_scales", c.lr.log_scales);
    r.real("lr_rotations", c.lr.rotations);
    r.real("lr_opacity", c.lr.opacity_logits);
    r.real("lr_colors", c.lr.colors);
    r.real("position_lr_final_factor", c.position_lr_final_factor);
    r.real("beta1", c.beta1);
    r.real("beta2", c.beta2);
    r.real("eps", c.eps);

    auto& d = c.densify_default;
    r.section("densify.default");
    r.integer("interval", d.interval);
    r.integer("start", d.start);
    r.real("stop_fraction", d.stop_fraction);
    r.real("grad_threshold", d.grad_threshold);
    r.real("size_threshold_fraction", d.size_threshold_fraction);
    r.real("split_factor", d.split_factor);
    r.real("prune_opacity", d.prune_opacity);
    r.integer("opacity_reset_interval", d.opacity_reset_interval);
    r.real("opacity_reset_value", d.opacity_reset_value);

    auto& m = c.mcmc;
    r.section("densify.mcmc");
    r.integer("budget", m.budget);
    r.integer("interval", m.interval);
    r.integer("start", m.start);
    r.real("stop_fraction", m.stop_fraction);
    r.real("dead_opacity", m.dead_opacity);
    r.real("noise_scale", m.noise_scale);
    r.real("gate_sharpness", m.gate_sharpness);
    r.real("gate_center", m.gate_center);
    r.real("relocate_jitter", m.relocate_jitter);

    r.section("membench");
    r.real("growth_factor", c.membench.growth_factor);
    r.real("copy_window_seconds", c.membench.copy_window_seconds);
    r.integer("max_gaussians", c.membench.max_gaussians);

    auto& s = c.synthetic;
    r.section("synthetic");
    r.integer("gaussians", s.gaussians);
    r.integer("cameras", s.cameras);
    r.integer("width", s.width);
    r.integer("height", s.height);
    r.real("position_noise", s.position_noise);
    r.real("color_noise", s.color_noise);
    r.real("ring_radius", s.ring_radius);
    r.real("ring_height", s.ring_height);
    return r;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::ConfigError, what);
}

} // namespace

std::string_view densify_mode_name(DensifyMode mode) noexcept {
    switch (mode) {
    case DensifyMode::None: return "none";
    case DensifyMode::Default: return "default";
    case DensifyMode::Mcmc: return "mcmc";
    }
    return "default";
}

DensifyMode parse_densify_mode(std::string_view name) {
    if (name == "none") return DensifyMode::None;
    if (name == "default") return DensifyMode::Default;
    if (name == "mcmc") return DensifyMode::Mcmc;
    throw Error(ErrorCode::ConfigError, "densify mode must be none, default or mcmc, got '" + std::string(name) + "'");
}

void RunConfig::validate() const {
    require(iterations >= 1, "iterations must be >= 1");
    require(repeats >= 1, "repeats must be >= 1");
    require(threads >= 1, "threads must be >= 1");
    require(tile_size >= 1, "tile_size must be >= 1");
    require(downscale >= 1, "downscale must be >= 1");
    require(lambda_dssim >= 0.0 && lambda_dssim <= 1.0, "lambda_dssim must lie in [0, 1]");
    require(densify != DensifyMode::Mcmc || mcmc.budget >= 1, "budget must be >= 1 in mcmc mode");
    require(membench.growth_factor >= 1.0, "growth_factor must be >= 1");
    require(membench.copy_window_seconds >= 0.0, "copy_window_seconds must be >= 0");
    require(position_lr_final_factor > 0.0, "position_lr_final_factor must be > 0");
    require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "Adam betas must lie in [0, 1)");
    require(densify_default.split_factor > 0.0, "split_factor must be > 0");
    require(!scene.empty() || (synthetic.gaussians >= 1 && synthetic.cameras >= 1 && synthetic.width >= 1 &&
                               synthetic.height >= 1),
            "synthetic scene sizes must be >= 1");
}

RunConfig parse_config(std::istream& in, RunConfig base) {
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigTOML().from_config(in);
    } catch (const CLI::Error& e) {
        throw Error(ErrorCode::ConfigError, e.what());
    }
    Registry reg = registry_for(base);
    for (const auto& item : items) {
        if (item.name == "++" || item.name == "--") continue; // section open/close markers
        const std::string section = CLI::detail::join(item.parents, ".");
        const Field* field = nullptr;
        for (const auto& f : reg.fields())
            if (f.section == section && f.key == item.name) field = &f;
        if (!field) throw Error(ErrorCode::ConfigError, "unknown config key '" + item.fullname() + "'");
        if (item.inputs.size() != 1) {
            throw Error(ErrorCode::ConfigError, "config key '" + item.fullname() + "' needs exactly one value");
        }
        field->set(unquote(item.inputs.front()));
    }
    base.validate();
    return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open config file " + path.string());
    return parse_config(in, std::move(base));
}

std::string config_to_text(const RunConfig& config) {
    RunConfig copy = config;
    const Registry reg = registry_for(copy);
    std::string out, current;
    for (const auto& f : reg.fields()) {
        if (f.section != current) {
            if (!out.empty()) out += '\n';
            out += "[" + f.section + "]\n";
            current = f.section;
        }
        out += f.key + " = " + f.get() + "\n";
    }
    return out;
}

} // namespace tilesplat
