#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "shrinklab/marginals.hpp"

namespace shrinklab {

// Declared dependence bounds attached to a process spec. These are
// inputs the pipeline certifies consequences of, not quantities it
// estimates from samples.
struct MixingMetadata {
  std::optional<double> rho1;               // bound on rho at lag 1
  std::optional<double> rho_geometric_rate; // rho(n) <= rate^n
  std::optional<double> rho_star1;          // bound on interlaced rho at lag 1
  bool alpha_vanishes = false;              // alpha(n) -> 0 declared
  std::string provenance;

  // rho(1) < 1 with a summable dyadic rho sequence.
  bool satisfies_rho_summability() const {
    return rho_geometric_rate.has_value() && *rho_geometric_rate < 1.0;
  }
  // interlaced rho(1) < 1 together with vanishing alpha.
  bool satisfies_interlaced_condition() const {
    return rho_star1.has_value() && *rho_star1 < 1.0 && alpha_vanishes;
  }
};

struct IidSpec {
  Marginal marginal;
};

struct GaussianAr1Spec {
  double phi = 0.0;  // |phi| < 1
};

struct MovingAverageSpec {
  std::vector<double> weights;
  Marginal innovation;
};

// Three-state hidden chain emitting 0 in the resting state and a
// +Z/-Z pair across each 2->3 excursion; theta = lambda / 4.
struct CancellationChainSpec {
  double lambda = 0.0;  // in (0, 1)
  double theta() const { return lambda / 4.0; }
};

using ProcessKind =
    std::variant<IidSpec, GaussianAr1Spec, MovingAverageSpec,
                 CancellationChainSpec>;

struct ProcessSpec {
  ProcessKind kind;
  std::optional<MixingMetadata> declared_mixing;

  // Declared metadata if present, else the per-kind defaults.
  MixingMetadata mixing() const;
  std::string describe() const;
};

void validate(const ProcessSpec& spec);

// Row-stochastic one-step law of the hidden chain:
// from 1 stay with 1-theta or step to 2, then 2 -> 3 -> 1 surely.
struct TransitionMatrix {
  double theta = 0.0;
  std::array<std::array<double, 3>, 3> p{};

  static TransitionMatrix for_theta(double theta);
  std::array<std::array<double, 3>, 3> power(std::uint64_t n) const;
};

// Stationary law (pi_1, pi_2, pi_3) = (1, theta, theta) / (1 + 2 theta).
std::array<double, 3> stationary_chain_dist(double theta);

struct SamplePath {
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::vector<double> values;      // X_1 .. X_n
  std::vector<int> hidden_states;  // V_0 .. V_n for the chain, else empty
};

// Strictly stationary realization of X_1..X_n. Same (spec, n, seed)
// reproduces the identical path bit for bit.
SamplePath sample_path(const ProcessSpec& spec, std::int64_t n,
                       std::uint64_t seed);

// Streaming form: fills values[0..n) with X_1..X_n; hidden_states, if
// non-null, receives V_0..V_n (chain only). Buffers are resized.
void generate_path(const ProcessSpec& spec, std::int64_t n,
                   std::uint64_t seed, std::vector<double>& values,
                   std::vector<int>* hidden_states = nullptr);

// Analytic law of a single observation; throws
// UnsupportedDistributionError when no closed marginal exists.
Marginal x0_marginal(const ProcessSpec& spec);

// CSV with header "k,x" (plus ",v" when hidden states are present).
std::string path_to_csv(const SamplePath& path);

}  // namespace shrinklab
