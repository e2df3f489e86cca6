#pragma once

#include <string>
#include <vector>

#include "lab/geom.hpp"

namespace lab {

struct BuiltinFamily {
    std::string name;
    std::string text;
    int nvars = 0;
    int degree = 0;
    std::string notes;  // documented expectations: K0, asymptotic behavior
};

const std::vector<BuiltinFamily>& builtin_catalog();

// Family from a catalog name; throws ConfigError for unknown names.
Family make_builtin(const std::string& name);

bool is_builtin(const std::string& name);

}  // namespace lab
