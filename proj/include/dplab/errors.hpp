#pragma once

#include <stdexcept>
#include <string>

namespace dplab {

// Rejected parameters or inconsistent configuration.
struct InvalidConfig : std::invalid_argument {
  explicit InvalidConfig(const std::string& what) : std::invalid_argument(what) {}
};

// Derivative requested where the integrand is not twice differentiable.
struct SingularPoint : std::domain_error {
  explicit SingularPoint(const std::string& what) : std::domain_error(what) {}
};

struct UnboundedConjugate : std::domain_error {
  explicit UnboundedConjugate(const std::string& what) : std::domain_error(what) {}
};

struct AtomCollision : std::domain_error {
  explicit AtomCollision(const std::string& what) : std::domain_error(what) {}
};

struct Infeasible : std::runtime_error {
  explicit Infeasible(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dplab
