#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mcl/linalg.hpp"

namespace mcl::expr {

// Tiny complex-valued expression evaluator for config-supplied matrix
// entries in one variable t. Supported: numbers, i, pi, t, + - * / ^,
// parentheses, exp, sin, cos, sqrt, conj. Throws std::invalid_argument on
// syntax errors (maps to the usage exit code in the CLI).
std::function<Complex(double)> parse_scalar(const std::string& text);

// Matrix of entry expressions -> map t |-> M(t).
std::function<MatC(double)> parse_matrix(
    const std::vector<std::vector<std::string>>& entries);

}  // namespace mcl::expr
