#pragma once

#include <string>
#include <variant>

namespace rxinv {

struct FixedCount {
  int k_max = 1;
};

struct ResidualThreshold {
  double tol = 1e-6;
};

/// Lower level stops once the residual drops below delta / q^j.
struct NoiseCoupled {
  double delta = 0.0;
  double q = 1.0;
};

/// Lower level stops once c_pos * residual <= misfit of the previous upper step.
struct Posterior {
  double c_pos = 1.0;
};

/// Upper level stops once misfit <= tau * delta * ||y||.
struct Discrepancy {
  double tau = 1.5;
  double delta = 0.0;
};

using StoppingRule = std::variant<FixedCount, ResidualThreshold, NoiseCoupled, Posterior, Discrepancy>;

/// Throws ConfigError on out-of-range parameters.
void validate(const StoppingRule& rule);
void validate_lower(const StoppingRule& rule);
void validate_upper(const StoppingRule& rule);

std::string describe(const StoppingRule& rule);

double noise_coupled_threshold(const NoiseCoupled& rule, int j);

bool lower_should_stop(const StoppingRule& rule, int k, double residual, int j, double misfit);
bool upper_should_stop(const StoppingRule& rule, int j, double misfit, double y_norm);

}  // namespace rxinv
