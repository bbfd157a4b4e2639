#include "crpnet/distribution.hpp"

#include <map>

namespace crpnet {

void DistributionSpec::validate() const {
  if (!(eps1 > 0.0)) {
    throw StructuralError("distribution eps1 must be > 0");
  }
  switch (family) {
    case DistFamily::Exponential:
    case DistFamily::Deterministic:
      return;
    case DistFamily::Uniform:
      if (shape < 0.0 || shape > 1.0) {
        throw StructuralError("uniform half-width must lie in [0, 1]");
      }
      return;
    case DistFamily::Gamma:
      if (!(shape > 0.0)) {
        throw StructuralError("gamma shape must be > 0");
      }
      return;
    case DistFamily::Lognormal:
      if (!(shape > 0.0)) {
        throw StructuralError("lognormal sigma must be > 0");
      }
      return;
    case DistFamily::Pareto:
      if (!(shape > 1.0)) {
        throw StructuralError("pareto tail index must be > 1 for a finite mean");
      }
      return;
  }
  throw StructuralError("unknown distribution family");
}

double DistributionSpec::variance() const {
  switch (family) {
    case DistFamily::Exponential:
      return 1.0;
    case DistFamily::Uniform:
      return shape * shape / 3.0;
    case DistFamily::Deterministic:
      return 0.0;
    case DistFamily::Gamma:
      return 1.0 / shape;
    case DistFamily::Lognormal:
      return std::expm1(shape * shape);
    case DistFamily::Pareto: {
      if (shape <= 2.0) throw DomainError("pareto variance infinite for alpha <= 2");
      const double a = shape;
      const double xm = (a - 1.0) / a;
      return xm * xm * a / ((a - 1.0) * (a - 1.0) * (a - 2.0));
    }
  }
  throw DomainError("unknown distribution family");
}

bool DistributionSpec::moment_finite(double e) const {
  const double order = 2.0 + 2.0 * e;
  switch (family) {
    case DistFamily::Exponential:
    case DistFamily::Uniform:
    case DistFamily::Deterministic:
    case DistFamily::Gamma:
    case DistFamily::Lognormal:
      return true;
    case DistFamily::Pareto:
      return shape > order;
  }
  return false;
}

std::string DistributionSpec::family_name() const {
  switch (family) {
    case DistFamily::Exponential: return "exponential";
    case DistFamily::Uniform: return "uniform";
    case DistFamily::Deterministic: return "deterministic";
    case DistFamily::Gamma: return "gamma";
    case DistFamily::Lognormal: return "lognormal";
    case DistFamily::Pareto: return "pareto";
  }
  return "unknown";
}

DistFamily dist_family_from_name(const std::string& name) {
  static const std::map<std::string, DistFamily> table = {
      {"exponential", DistFamily::Exponential},
      {"uniform", DistFamily::Uniform},
      {"deterministic", DistFamily::Deterministic},
      {"gamma", DistFamily::Gamma},
      {"lognormal", DistFamily::Lognormal},
      {"pareto", DistFamily::Pareto},
  };
  auto it = table.find(name);
  if (it == table.end()) {
    throw StructuralError("unknown distribution family: " + name);
  }
  return it->second;
}

}  // namespace crpnet
