#pragma once

// Experiment configuration: one JSON document with nested sections.  Parsing
// is strict — unknown keys are rejected, every diagnostic names the config
// path it refers to — and validation reuses the module preconditions, so a
// bad parameter is reported with the same constraint text everywhere.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "characteristics.hpp"
#include "cogarch.hpp"
#include "generator.hpp"
#include "levy.hpp"
#include "quadrature.hpp"

namespace cogarch {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutputOptions {
    std::string directory = ".";
    std::string prefix = "run";
    std::string format = "csv"; // csv | json (tables; the JSON report is always written)
};

struct McOptions {
    long n_paths = 100000;
    std::uint64_t seed = 1;
    std::vector<double> t_ladder = {0.02, 0.01, 0.005};
    std::vector<double> r_list = {1.0};
    int workers = 0; // 0 = all available cores
    double step = 0.005;
    double jump_cutoff = 1e-3;
    double rel_slack = 0.05; // relative escape for verify verdicts where |p| is large
    bool compare_closed_form = false;
};

struct SimulateOptions {
    double t_max = 1.0;
    double step = 0.01;
    long n_paths = 1;
    std::optional<double> exit_radius;
};

struct GeneratorOptions {
    double t = 0.5;                    // martingale-residual horizon
    double width = 0.7;                // Gaussian bump width
    double amplitude = 1.0;
    std::vector<Vec2> bump_centers = {{0.0, 0.0}};
};

struct CharacteristicsOptions {
    double t = 1.0;
    long n_paths = 10000;
    std::vector<Rectangle> rectangles;
};

struct ExperimentConfig {
    CogarchParams model;
    std::vector<StatePoint> starts = {{0.0, 0.0}};
    std::vector<std::array<double, 2>> frequencies = {{1.0, 0.0}};
    McOptions mc;
    QuadratureOptions quadrature;
    OutputOptions outputs;
    SimulateOptions simulate;
    GeneratorOptions generator;
    CharacteristicsOptions characteristics;
};

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void config_fail(const std::string& where, const std::string& what) {
    throw ConfigError("config error at " + where + ": " + what);
}

inline void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) config_fail(where, "expected an object");
}

inline void reject_unknown_keys(const json& obj, const std::string& where,
                                std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* a : allowed) {
            if (item.key() == a) {
                known = true;
                break;
            }
        }
        if (!known) config_fail(where, "unknown key \"" + item.key() + "\"");
    }
}

inline double get_number(const json& obj, const std::string& where, const char* key,
                         std::optional<double> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        config_fail(where, std::string("missing required key \"") + key + "\"");
    }
    const json& v = obj.at(key);
    if (!v.is_number()) config_fail(where + "/" + key, "expected a number");
    return v.get<double>();
}

inline long get_integer(const json& obj, const std::string& where, const char* key,
                        std::optional<long> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        config_fail(where, std::string("missing required key \"") + key + "\"");
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer()) config_fail(where + "/" + key, "expected an integer");
    return v.get<long>();
}

inline std::string get_string(const json& obj, const std::string& where, const char* key,
                              std::optional<std::string> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        config_fail(where, std::string("missing required key \"") + key + "\"");
    }
    const json& v = obj.at(key);
    if (!v.is_string()) config_fail(where + "/" + key, "expected a string");
    return v.get<std::string>();
}

inline std::vector<double> get_number_list(const json& obj, const std::string& where,
                                           const char* key,
                                           std::optional<std::vector<double>> fallback) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        config_fail(where, std::string("missing required key \"") + key + "\"");
    }
    const json& v = obj.at(key);
    if (!v.is_array()) config_fail(where + "/" + key, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number())
            config_fail(where + "/" + key + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

inline std::vector<std::array<double, 2>> get_pair_list(const json& obj, const std::string& where,
                                                        const char* key) {
    const json& v = obj.at(key);
    if (!v.is_array()) config_fail(where + "/" + key, "expected an array of [a, b] pairs");
    std::vector<std::array<double, 2>> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string at = where + "/" + key + "[" + std::to_string(i) + "]";
        if (!v[i].is_array() || v[i].size() != 2 || !v[i][0].is_number() || !v[i][1].is_number())
            config_fail(at, "expected a pair of numbers [a, b]");
        out.push_back({v[i][0].get<double>(), v[i][1].get<double>()});
    }
    return out;
}

inline LevyMeasure parse_measure(const json& j, const std::string& where) {
    require_object(j, where);
    const std::string type = get_string(j, where, "type");
    if (type == "none") {
        reject_unknown_keys(j, where, {"type"});
        return AtomicMeasure{};
    }
    if (type == "atoms") {
        reject_unknown_keys(j, where, {"type", "atoms"});
        if (!j.contains("atoms") || !j.at("atoms").is_array())
            config_fail(where, "measure type \"atoms\" needs an \"atoms\" array");
        AtomicMeasure m;
        const json& arr = j.at("atoms");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string at = where + "/atoms[" + std::to_string(i) + "]";
            require_object(arr[i], at);
            reject_unknown_keys(arr[i], at, {"size", "rate"});
            Atom a;
            a.size = get_number(arr[i], at, "size");
            a.rate = get_number(arr[i], at, "rate");
            m.atoms.push_back(a);
        }
        return m;
    }
    if (type == "tempered_stable") {
        // density scale * |y|^{-1-alpha} * exp(-tempering |y|) on support\{0}
        reject_unknown_keys(j, where, {"type", "alpha", "scale", "tempering", "support"});
        const double alpha = get_number(j, where, "alpha");
        const double scale = get_number(j, where, "scale", 1.0);
        const double tempering = get_number(j, where, "tempering", 1.0);
        std::vector<double> support =
            get_number_list(j, where, "support", std::vector<double>{-8.0, 8.0});
        if (support.size() != 2) config_fail(where + "/support", "expected [y_min, y_max]");
        if (!(alpha >= 0.0 && alpha < 2.0))
            config_fail(where + "/alpha", "small-jump exponent must satisfy 0 <= alpha < 2");
        if (!(scale > 0.0)) config_fail(where + "/scale", "scale must be > 0");
        if (!(tempering >= 0.0)) config_fail(where + "/tempering", "tempering must be >= 0");
        DensityMeasure d;
        d.small_jump_exponent = alpha;
        d.y_min = support[0];
        d.y_max = support[1];
        d.density = [scale, alpha, tempering](double y) {
            const double a = std::abs(y);
            return scale * std::pow(a, -1.0 - alpha) * std::exp(-tempering * a);
        };
        return d;
    }
    config_fail(where + "/type",
                "unknown measure type \"" + type + "\" (expected none | atoms | tempered_stable)");
}

inline CogarchParams parse_model(const json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown_keys(j, where, {"beta", "delta", "lambda", "driver"});
    CogarchParams p;
    p.beta = get_number(j, where, "beta", 1.0);
    p.delta = get_number(j, where, "delta", 0.5);
    p.lam = get_number(j, where, "lambda", 0.0);
    if (j.contains("driver")) {
        const json& d = j.at("driver");
        const std::string dw = where + "/driver";
        require_object(d, dw);
        reject_unknown_keys(d, dw, {"drift", "gaussian", "measure"});
        p.driver.drift = get_number(d, dw, "drift", 0.0);
        p.driver.gaussian = get_number(d, dw, "gaussian", 0.0);
        if (d.contains("measure")) p.driver.measure = parse_measure(d.at("measure"), dw + "/measure");
    }
    try {
        validate(p);
    } catch (const std::invalid_argument& e) {
        config_fail(where, e.what());
    }
    return p;
}

inline Rectangle parse_rectangle(const json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown_keys(j, where, {"z1", "z2"});
    auto read_side = [&](const char* key) {
        if (!j.contains(key))
            config_fail(where, std::string("missing required key \"") + key + "\"");
        const json& v = j.at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            config_fail(where + "/" + key, "expected [lo, hi]");
        return std::array<double, 2>{v[0].get<double>(), v[1].get<double>()};
    };
    Rectangle r;
    const auto z1 = read_side("z1");
    const auto z2 = read_side("z2");
    r.z1_lo = z1[0];
    r.z1_hi = z1[1];
    r.z2_lo = z2[0];
    r.z2_hi = z2[1];
    try {
        validate_rectangle(r);
    } catch (const std::invalid_argument& e) {
        config_fail(where, e.what());
    }
    return r;
}

} // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& root) {
    using detail::config_fail;
    using detail::get_integer;
    using detail::get_number;
    using detail::get_number_list;
    using detail::get_pair_list;
    using detail::get_string;
    using detail::reject_unknown_keys;
    using detail::require_object;

    require_object(root, "/");
    reject_unknown_keys(root, "/",
                        {"model", "grids", "mc", "quadrature", "outputs", "simulate", "generator",
                         "characteristics"});

    ExperimentConfig cfg;
    if (root.contains("model")) cfg.model = detail::parse_model(root.at("model"), "/model");

    if (root.contains("grids")) {
        const nlohmann::json& g = root.at("grids");
        require_object(g, "/grids");
        reject_unknown_keys(g, "/grids", {"starts", "frequencies"});
        if (g.contains("starts")) {
            cfg.starts.clear();
            for (const auto& p : get_pair_list(g, "/grids", "starts"))
                cfg.starts.push_back({p[0], p[1]});
            if (cfg.starts.empty()) config_fail("/grids/starts", "needs at least one (g, v) start");
        }
        if (g.contains("frequencies")) {
            cfg.frequencies = get_pair_list(g, "/grids", "frequencies");
            if (cfg.frequencies.empty())
                config_fail("/grids/frequencies", "needs at least one (xi1, xi2) point");
        }
    }

    if (root.contains("mc")) {
        const nlohmann::json& m = root.at("mc");
        require_object(m, "/mc");
        reject_unknown_keys(m, "/mc",
                            {"n_paths", "seed", "t_ladder", "r_list", "workers", "step",
                             "jump_cutoff", "rel_slack", "compare_closed_form"});
        cfg.mc.n_paths = get_integer(m, "/mc", "n_paths", cfg.mc.n_paths);
        const long seed = get_integer(m, "/mc", "seed", static_cast<long>(cfg.mc.seed));
        cfg.mc.seed = static_cast<std::uint64_t>(seed);
        cfg.mc.t_ladder = get_number_list(m, "/mc", "t_ladder", cfg.mc.t_ladder);
        cfg.mc.r_list = get_number_list(m, "/mc", "r_list", cfg.mc.r_list);
        cfg.mc.workers = static_cast<int>(get_integer(m, "/mc", "workers", cfg.mc.workers));
        cfg.mc.step = get_number(m, "/mc", "step", cfg.mc.step);
        cfg.mc.jump_cutoff = get_number(m, "/mc", "jump_cutoff", cfg.mc.jump_cutoff);
        cfg.mc.rel_slack = get_number(m, "/mc", "rel_slack", cfg.mc.rel_slack);
        if (m.contains("compare_closed_form")) {
            if (!m.at("compare_closed_form").is_boolean())
                config_fail("/mc/compare_closed_form", "expected a boolean");
            cfg.mc.compare_closed_form = m.at("compare_closed_form").get<bool>();
        }
        if (cfg.mc.n_paths < 2) config_fail("/mc/n_paths", "needs at least 2 paths");
        if (cfg.mc.workers < 0) config_fail("/mc/workers", "workers must be >= 0 (0 = all cores)");
        for (double t : cfg.mc.t_ladder)
            if (!(t > 0.0)) config_fail("/mc/t_ladder", "ladder times must be > 0");
        for (double r : cfg.mc.r_list)
            if (!(r > 0.0)) config_fail("/mc/r_list", "radii must be > 0");
        if (!(cfg.mc.step > 0.0)) config_fail("/mc/step", "step must be > 0");
        if (!(cfg.mc.jump_cutoff > 0.0)) config_fail("/mc/jump_cutoff", "cutoff must be > 0");
        if (!(cfg.mc.rel_slack >= 0.0)) config_fail("/mc/rel_slack", "slack must be >= 0");
    }

    if (root.contains("quadrature")) {
        const nlohmann::json& q = root.at("quadrature");
        require_object(q, "/quadrature");
        reject_unknown_keys(q, "/quadrature", {"abs_tol", "rel_tol", "max_panels"});
        cfg.quadrature.abs_tol = get_number(q, "/quadrature", "abs_tol", cfg.quadrature.abs_tol);
        cfg.quadrature.rel_tol = get_number(q, "/quadrature", "rel_tol", cfg.quadrature.rel_tol);
        cfg.quadrature.max_panels = static_cast<int>(
            get_integer(q, "/quadrature", "max_panels", cfg.quadrature.max_panels));
        if (!(cfg.quadrature.abs_tol > 0.0) || !(cfg.quadrature.rel_tol > 0.0))
            config_fail("/quadrature", "tolerances must be > 0");
        if (cfg.quadrature.max_panels < 1) config_fail("/quadrature/max_panels", "must be >= 1");
    }

    if (root.contains("outputs")) {
        const nlohmann::json& o = root.at("outputs");
        require_object(o, "/outputs");
        reject_unknown_keys(o, "/outputs", {"directory", "prefix", "format"});
        cfg.outputs.directory = get_string(o, "/outputs", "directory", cfg.outputs.directory);
        cfg.outputs.prefix = get_string(o, "/outputs", "prefix", cfg.outputs.prefix);
        cfg.outputs.format = get_string(o, "/outputs", "format", cfg.outputs.format);
        if (cfg.outputs.format != "csv" && cfg.outputs.format != "json")
            config_fail("/outputs/format", "expected \"csv\" or \"json\"");
        if (cfg.outputs.prefix.empty() ||
            cfg.outputs.prefix.find_first_of("/\\") != std::string::npos)
            config_fail("/outputs/prefix", "prefix must be a non-empty bare file name");
    }

    if (root.contains("simulate")) {
        const nlohmann::json& s = root.at("simulate");
        require_object(s, "/simulate");
        reject_unknown_keys(s, "/simulate", {"t_max", "step", "n_paths", "exit_radius"});
        cfg.simulate.t_max = get_number(s, "/simulate", "t_max", cfg.simulate.t_max);
        cfg.simulate.step = get_number(s, "/simulate", "step", cfg.simulate.step);
        cfg.simulate.n_paths = get_integer(s, "/simulate", "n_paths", cfg.simulate.n_paths);
        if (s.contains("exit_radius")) {
            if (!s.at("exit_radius").is_null())
                cfg.simulate.exit_radius = get_number(s, "/simulate", "exit_radius");
        }
        if (!(cfg.simulate.t_max > 0.0)) config_fail("/simulate/t_max", "t_max must be > 0");
        if (!(cfg.simulate.step > 0.0)) config_fail("/simulate/step", "step must be > 0");
        if (cfg.simulate.n_paths < 1) config_fail("/simulate/n_paths", "needs at least 1 path");
        if (cfg.simulate.exit_radius && !(*cfg.simulate.exit_radius > 0.0))
            config_fail("/simulate/exit_radius", "exit radius must be > 0 (or null)");
    }

    if (root.contains("generator")) {
        const nlohmann::json& g = root.at("generator");
        require_object(g, "/generator");
        reject_unknown_keys(g, "/generator", {"t", "width", "amplitude", "bump_centers"});
        cfg.generator.t = get_number(g, "/generator", "t", cfg.generator.t);
        cfg.generator.width = get_number(g, "/generator", "width", cfg.generator.width);
        cfg.generator.amplitude = get_number(g, "/generator", "amplitude", cfg.generator.amplitude);
        if (g.contains("bump_centers")) {
            cfg.generator.bump_centers.clear();
            for (const auto& p : get_pair_list(g, "/generator", "bump_centers"))
                cfg.generator.bump_centers.push_back({p[0], p[1]});
            if (cfg.generator.bump_centers.empty())
                config_fail("/generator/bump_centers", "needs at least one center");
        }
        if (!(cfg.generator.t > 0.0)) config_fail("/generator/t", "t must be > 0");
        if (!(cfg.generator.width > 0.0)) config_fail("/generator/width", "width must be > 0");
    }

    if (root.contains("characteristics")) {
        const nlohmann::json& c = root.at("characteristics");
        require_object(c, "/characteristics");
        reject_unknown_keys(c, "/characteristics", {"t", "n_paths", "rectangles"});
        cfg.characteristics.t = get_number(c, "/characteristics", "t", cfg.characteristics.t);
        cfg.characteristics.n_paths =
            get_integer(c, "/characteristics", "n_paths", cfg.characteristics.n_paths);
        if (c.contains("rectangles")) {
            const nlohmann::json& arr = c.at("rectangles");
            if (!arr.is_array()) config_fail("/characteristics/rectangles", "expected an array");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                cfg.characteristics.rectangles.push_back(detail::parse_rectangle(
                    arr[i], "/characteristics/rectangles[" + std::to_string(i) + "]"));
            }
        }
        if (!(cfg.characteristics.t > 0.0)) config_fail("/characteristics/t", "t must be > 0");
        if (cfg.characteristics.n_paths < 2)
            config_fail("/characteristics/n_paths", "needs at least 2 paths");
    }

    return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(root);
}

inline ExperimentConfig load_config(const std::string& path, std::string* raw_text = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (raw_text) *raw_text = buf.str();
    return parse_config_text(buf.str());
}

// FNV-1a over the raw config document, reported for reproducibility.
inline std::string config_hash_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace cogarch
