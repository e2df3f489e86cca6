#pragma once

#include <string>
#include <vector>

#include "lab/config.hpp"
#include "lab/geom.hpp"

namespace lab {

struct RunResult {
    std::vector<std::string> artifacts;  // paths relative to the output directory
};

// Executes the configured pipeline and writes one CSV/JSON artifact per
// sub-result plus a manifest (config hash, seed, version; the manifest is
// the only artifact carrying a timestamp).  Identical configs produce
// byte-identical artifact bodies.  Throws ConfigError for invalid configs
// and LabError subclasses for runtime failures; artifacts written before a
// failure are left in place.
RunResult run_experiment(const ExperimentConfig& cfg);

Family family_from_config(const ExperimentConfig& cfg);

std::string list_builtin_text();

}  // namespace lab
