#pragma once

#include <cmath>
#include <string>

#include "crpnet/errors.hpp"

namespace crpnet {

// Unit-mean distribution for a stochastic increment (interarrival factor or
// service-time factor). Each family is parameterized so that the mean is
// exactly 1 and the support is strictly positive; scaling by arrival rates
// or mean service times happens at the draw site.
enum class DistFamily {
  Exponential,
  Uniform,
  Deterministic,
  Gamma,
  Lognormal,
  Pareto,
};

struct DistributionSpec {
  DistFamily family = DistFamily::Exponential;
  // Family-specific parameter:
  //   uniform    half-width w in [0, 1], support (1-w, 1+w)
  //   gamma      shape k > 0, scale 1/k
  //   lognormal  sigma > 0, mu = -sigma^2/2
  //   pareto     tail index alpha > 1, minimum (alpha-1)/alpha
  //   exponential, deterministic: unused
  double shape = 0.0;
  // Declared moment exponent: E|X|^(2+2*eps1) must be finite.
  double eps1 = 0.5;

  // Throws StructuralError when the parameterization is invalid.
  void validate() const;

  double variance() const;

  // True iff E|X|^(2+2*e) is finite for this family.
  bool moment_finite(double e) const;
  bool moment_finite() const { return moment_finite(eps1); }

  std::string family_name() const;

  // One draw. u01 yields independent uniforms on the open interval (0,1);
  // the number of uniforms consumed varies by family (and per draw for
  // gamma, which uses rejection sampling).
  template <class U01>
  double sample(U01&& u01) const {
    switch (family) {
      case DistFamily::Exponential:
        return -std::log(u01());
      case DistFamily::Uniform:
        return 1.0 - shape + 2.0 * shape * u01();
      case DistFamily::Deterministic:
        return 1.0;
      case DistFamily::Gamma:
        return sample_gamma(shape, u01) / shape;
      case DistFamily::Lognormal: {
        const double u1 = u01();
        const double u2 = u01();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        return std::exp(-0.5 * shape * shape + shape * z);
      }
      case DistFamily::Pareto:
        return (shape - 1.0) / shape * std::pow(u01(), -1.0 / shape);
    }
    throw DomainError("unknown distribution family");
  }

 private:
  // Marsaglia-Tsang gamma(k, 1); the k < 1 boost uses gamma(k+1) * U^(1/k).
  template <class U01>
  static double sample_gamma(double k, U01&& u01) {
    if (k < 1.0) {
      const double g = sample_gamma(k + 1.0, u01);
      return g * std::pow(u01(), 1.0 / k);
    }
    const double d = k - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      const double u1 = u01();
      const double u2 = u01();
      const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
      const double v = 1.0 + c * z;
      if (v <= 0.0) continue;
      const double v3 = v * v * v;
      const double u = u01();
      if (std::log(u) < 0.5 * z * z + d - d * v3 + d * std::log(v3)) {
        return d * v3;
      }
    }
  }
};

DistFamily dist_family_from_name(const std::string& name);

}  // namespace crpnet
