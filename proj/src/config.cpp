#include "lab/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "lab/builtins.hpp"
#include "lab/errors.hpp"
#include "lab/poly.hpp"

namespace lab {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_real(const std::string& key, const std::string& v) {
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("key '" + key + "': expected a real number, got '" + v + "'");
    return x;
}

long long parse_int(const std::string& key, const std::string& v) {
    char* end = nullptr;
    long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
    return x;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(parse_real(key, item));
    }
    if (out.empty()) throw ConfigError("key '" + key + "': expected a comma-separated list");
    return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    cfg.raw_text = text;

    static const std::set<std::string> known = {
        "family", "nvars", "command", "tmin", "tmax", "steps", "method", "budget",
        "ball_radius", "epsilon", "radii", "c", "r_min", "grid_h", "draws", "s_target",
        "tol", "start_x", "start_t", "k_sigma", "directions", "seed", "workers", "out"};

    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!known.count(key))
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (value.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" + key + "'");

        if (key == "family") cfg.family = value;
        else if (key == "nvars") cfg.nvars = static_cast<int>(parse_int(key, value));
        else if (key == "command") cfg.command = value;
        else if (key == "tmin") cfg.tmin = parse_real(key, value);
        else if (key == "tmax") cfg.tmax = parse_real(key, value);
        else if (key == "steps") cfg.steps = static_cast<int>(parse_int(key, value));
        else if (key == "method") cfg.method = value;
        else if (key == "budget") cfg.budget = parse_int(key, value);
        else if (key == "ball_radius") cfg.ball_radius = parse_real(key, value);
        else if (key == "epsilon") cfg.epsilon = parse_real(key, value);
        else if (key == "radii") cfg.radii = parse_list(key, value);
        else if (key == "c") cfg.c = parse_real(key, value);
        else if (key == "r_min") cfg.r_min = parse_real(key, value);
        else if (key == "grid_h") cfg.grid_h = parse_real(key, value);
        else if (key == "draws") cfg.draws = parse_int(key, value);
        else if (key == "s_target") cfg.s_target = parse_real(key, value);
        else if (key == "tol") cfg.tol = parse_real(key, value);
        else if (key == "start_x") cfg.start_x = parse_list(key, value);
        else if (key == "start_t") cfg.start_t = parse_real(key, value);
        else if (key == "k_sigma") cfg.k_sigma = parse_real(key, value);
        else if (key == "directions") cfg.directions = static_cast<int>(parse_int(key, value));
        else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
            cfg.seed_set = true;
        } else if (key == "workers") cfg.workers = static_cast<int>(parse_int(key, value));
        else if (key == "out") cfg.out_dir = value;
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void validate_config(const ExperimentConfig& cfg) {
    static const std::set<std::string> commands = {"profile", "acv",  "spherical", "cloud",
                                                   "flow",    "crofton", "all"};
    if (cfg.family.empty()) throw ConfigError("missing required key 'family'");
    if (!commands.count(cfg.command))
        throw ConfigError("command must be one of profile/acv/spherical/cloud/flow/crofton/all");
    if (!cfg.seed_set) throw ConfigError("seed is mandatory (no wall-clock seeding)");

    if (is_builtin(cfg.family)) {
        // catalog entry carries its own nvars
    } else {
        if (cfg.nvars < 1)
            throw ConfigError("nvars >= 1 required for a non-builtin polynomial family");
        try {
            parse_polynomial(cfg.family, cfg.nvars);
        } catch (const ParseError& e) {
            throw ConfigError(std::string("family does not parse: ") + e.what());
        }
    }

    if (cfg.method != "tracer" && cfg.method != "thin_shell")
        throw ConfigError("method must be tracer or thin_shell");
    if (cfg.steps < 2) throw ConfigError("steps must be >= 2");
    if (!(cfg.tmin < cfg.tmax)) throw ConfigError("tmin must be < tmax");
    if (cfg.ball_radius <= 0) throw ConfigError("ball_radius must be positive");
    if (cfg.epsilon <= 0) throw ConfigError("epsilon must be positive");
    if (cfg.budget < 0) throw ConfigError("budget must be non-negative");
    if (cfg.draws <= 0) throw ConfigError("draws must be positive");
    if (cfg.grid_h <= 0) throw ConfigError("grid_h must be positive");
    if (cfg.r_min <= 0) throw ConfigError("r_min must be positive");
    if (cfg.tol <= 0) throw ConfigError("tol must be positive");
    if (cfg.k_sigma <= 0) throw ConfigError("k_sigma must be positive");
    if (cfg.directions <= 0) throw ConfigError("directions must be positive");
    if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
    for (std::size_t i = 1; i < cfg.radii.size(); ++i)
        if (cfg.radii[i] <= cfg.radii[i - 1])
            throw ConfigError("radii must be strictly increasing");
    for (double r : cfg.radii)
        if (r <= 0) throw ConfigError("radii must be positive");
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    // FNV-1a over the raw config text plus the effective overrides.
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](const std::string& s) {
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 1099511628211ull;
        }
    };
    mix(cfg.raw_text);
    mix("|seed=" + std::to_string(cfg.seed));
    mix("|out=" + cfg.out_dir);
    return h;
}

}  // namespace lab
