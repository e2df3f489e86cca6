#include "lab/builtins.hpp"

#include "lab/errors.hpp"

namespace lab {

const std::vector<BuiltinFamily>& builtin_catalog() {
    static const std::vector<BuiltinFamily> catalog = {
        {"sphere2", "x1^2 + x2^2 - t", 2, 2,
         "circle pencil; K0 = {0}; every positive level is a circle of total turning 2*pi; "
         "levels compact, so radial slabs are vacuous at large R"},
        {"sphere3", "x1^2 + x2^2 + x3^2 - t", 3, 2,
         "sphere pencil in R^3; K0 = {0}; |K| = 4*pi for t > 0; compact levels"},
        {"linear", "x1 - t", 2, 1,
         "hyperplane pencil; K0 empty; Malgrange holds at every value (mu0 grows like R); "
         "K = |K| = 0"},
        {"broughton", "x1 + x1^2*x2 - t", 2, 3,
         "no critical points (K0 empty) but expected asymptotic critical value at t = 0 with "
         "mu0 decaying like 1/R; |K| jumps across 0; regular spherical values elsewhere"},
        {"plane3", "x1 - t", 3, 1,
         "hyperplane pencil in R^3; K0 empty; Malgrange everywhere; limit normals collapse "
         "to a single direction"},
    };
    return catalog;
}

bool is_builtin(const std::string& name) {
    for (const BuiltinFamily& b : builtin_catalog())
        if (b.name == name) return true;
    return false;
}

Family make_builtin(const std::string& name) {
    for (const BuiltinFamily& b : builtin_catalog())
        if (b.name == name) return Family(parse_polynomial(b.text, b.nvars));
    throw ConfigError("unknown builtin family: " + name);
}

}  // namespace lab
