#pragma once

#include <stdexcept>
#include <string>

namespace mcl {

// Typed failures raised by the library. Every condition a caller can sensibly
// branch on gets its own type; plain std::invalid_argument is reserved for
// malformed arguments (wrong sizes, out-of-range indices).

struct InvalidIndexSet : std::runtime_error {
  explicit InvalidIndexSet(const std::string& m) : std::runtime_error(m) {}
};

struct NotUnitary : std::runtime_error {
  explicit NotUnitary(const std::string& m) : std::runtime_error(m) {}
};

struct InvalidFrame : std::runtime_error {
  explicit InvalidFrame(const std::string& m) : std::runtime_error(m) {}
};

struct DegenerateHessian : std::runtime_error {
  explicit DegenerateHessian(const std::string& m) : std::runtime_error(m) {}
};

struct NotInDomain : std::runtime_error {
  explicit NotInDomain(const std::string& m) : std::runtime_error(m) {}
};

struct NotHyperbolic : std::runtime_error {
  explicit NotHyperbolic(const std::string& m) : std::runtime_error(m) {}
};

struct Blowup : std::runtime_error {
  explicit Blowup(const std::string& m) : std::runtime_error(m) {}
};

struct NoConvergence : std::runtime_error {
  explicit NoConvergence(const std::string& m) : std::runtime_error(m) {}
};

struct OnStableManifold : std::runtime_error {
  explicit OnStableManifold(const std::string& m) : std::runtime_error(m) {}
};

struct NumericalBreakdown : std::runtime_error {
  explicit NumericalBreakdown(const std::string& m) : std::runtime_error(m) {}
};

struct SlowConvergence : std::runtime_error {
  explicit SlowConvergence(const std::string& m) : std::runtime_error(m) {}
};

struct InvalidArity : std::runtime_error {
  explicit InvalidArity(const std::string& m) : std::runtime_error(m) {}
};

struct DegreeMismatch : std::runtime_error {
  explicit DegreeMismatch(const std::string& m) : std::runtime_error(m) {}
};

struct UnsupportedDimension : std::runtime_error {
  explicit UnsupportedDimension(const std::string& m) : std::runtime_error(m) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace mcl
