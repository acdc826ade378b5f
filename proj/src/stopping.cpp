#include "rxinv/stopping.hpp"

#include "rxinv/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <type_traits>

namespace rxinv {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void validate(const StoppingRule& rule) {
  std::visit(overloaded{
                 [](const FixedCount& r) {
                   if (r.k_max < 1) throw ConfigError("fixed_count: k_max must be >= 1");
                 },
                 [](const ResidualThreshold& r) {
                   if (!(r.tol > 0.0)) throw ConfigError("residual_threshold: tol must be > 0");
                 },
                 [](const NoiseCoupled& r) {
                   if (!(r.delta >= 0.0)) throw ConfigError("noise_coupled: delta must be >= 0");
                   if (!(r.q >= 1.0)) throw ConfigError("noise_coupled: q must be >= 1");
                 },
                 [](const Posterior& r) {
                   if (!(r.c_pos > 0.0)) throw ConfigError("posterior: c_pos must be > 0");
                 },
                 [](const Discrepancy& r) {
                   if (!(r.tau > 1.0)) throw ConfigError("discrepancy: tau must be > 1");
                   if (!(r.delta >= 0.0)) throw ConfigError("discrepancy: delta must be >= 0");
                 },
             },
             rule);
}

void validate_lower(const StoppingRule& rule) {
  validate(rule);
  if (std::holds_alternative<Discrepancy>(rule)) throw ConfigError("discrepancy rule is an upper-level rule");
}

void validate_upper(const StoppingRule& rule) {
  validate(rule);
  if (std::holds_alternative<NoiseCoupled>(rule) || std::holds_alternative<Posterior>(rule))
    throw ConfigError("noise_coupled and posterior rules are lower-level rules");
}

std::string describe(const StoppingRule& rule) {
  return std::visit(overloaded{
                        [](const FixedCount& r) { return fmt::format("fixed_count(k_max={})", r.k_max); },
                        [](const ResidualThreshold& r) { return fmt::format("residual_threshold(tol={})", r.tol); },
                        [](const NoiseCoupled& r) { return fmt::format("noise_coupled(delta={}, q={})", r.delta, r.q); },
                        [](const Posterior& r) { return fmt::format("posterior(c_pos={})", r.c_pos); },
                        [](const Discrepancy& r) { return fmt::format("discrepancy(tau={}, delta={})", r.tau, r.delta); },
                    },
                    rule);
}

double noise_coupled_threshold(const NoiseCoupled& rule, int j) { return rule.delta / std::pow(rule.q, j); }

bool lower_should_stop(const StoppingRule& rule, int k, double residual, int j, double misfit) {
  return std::visit(overloaded{
                        [&](const FixedCount& r) { return k >= r.k_max; },
                        [&](const ResidualThreshold& r) { return residual <= r.tol; },
                        [&](const NoiseCoupled& r) { return residual <= noise_coupled_threshold(r, j); },
                        [&](const Posterior& r) { return r.c_pos * residual <= misfit; },
                        [&](const Discrepancy&) -> bool { throw ConfigError("discrepancy rule is an upper-level rule"); },
                    },
                    rule);
}

bool upper_should_stop(const StoppingRule& rule, int j, double misfit, double y_norm) {
  return std::visit(overloaded{
                        [&](const FixedCount& r) { return j >= r.k_max; },
                        [&](const ResidualThreshold& r) { return misfit <= r.tol; },
                        [&](const Discrepancy& r) { return r.delta > 0.0 && misfit <= r.tau * r.delta * y_norm; },
                        [&](const NoiseCoupled&) -> bool {
                          throw ConfigError("noise_coupled rule is a lower-level rule");
                        },
                        [&](const Posterior&) -> bool { throw ConfigError("posterior rule is a lower-level rule"); },
                    },
                    rule);
}

}  // namespace rxinv
