#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lab {

// One experiment per file.  Flat key = value lines, '#' comments, whitespace
// insignificant.  Every referenced parameter is validated before any
// computation starts; the seed is mandatory (no wall-clock seeding).
struct ExperimentConfig {
    std::string family;  // builtin name or polynomial text
    int nvars = 0;       // required when family is polynomial text
    std::string command; // profile | acv | spherical | cloud | flow | crofton | all

    double tmin = 0.5, tmax = 4.0;
    int steps = 30;
    std::string method = "tracer";  // tracer | thin_shell
    long long budget = 0;           // 0 = per-command default
    double ball_radius = 10.0;
    double epsilon = 0.1;
    std::vector<double> radii = {10, 30, 100, 300, 1000};
    double c = 0.0;
    double r_min = 20.0;
    double grid_h = 0.1;
    long long draws = 2000;
    double s_target = 0.5;
    double tol = 1e-8;
    std::vector<double> start_x;
    double start_t = 0.0;
    double k_sigma = 5.0;
    int directions = 256;

    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 1;
    std::string out_dir = "results";

    std::string raw_text;  // exact config text, hashed into the manifest
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Throws ConfigError on any invalid or missing parameter.
void validate_config(const ExperimentConfig& cfg);

std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace lab
