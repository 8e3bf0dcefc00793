#include "shrinklab/processes.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "shrinklab/errors.hpp"

namespace shrinklab {

namespace {

// Lane layout within one time index: lane 0 carries decision
// uniforms (state walks, mixture choices), lanes 1-2 carry the
// Box-Muller pair. Samplers follow the same convention.
constexpr std::uint32_t kDecisionLane = 0;
constexpr std::uint32_t kGaussLane = 1;

struct Validator {
  void operator()(const IidSpec& s) const {
    if (!s.marginal.tail) throw ConfigError("iid: marginal not initialized");
  }
  void operator()(const GaussianAr1Spec& s) const {
    if (!(std::fabs(s.phi) < 1.0)) {
      throw ConfigError("gaussian_ar1: |phi| must be < 1");
    }
  }
  void operator()(const MovingAverageSpec& s) const {
    if (s.weights.empty()) {
      throw ConfigError("moving_average: weights must be non-empty");
    }
    for (double w : s.weights) {
      if (!std::isfinite(w)) {
        throw ConfigError("moving_average: weights must be finite");
      }
    }
    if (!s.innovation.tail) {
      throw ConfigError("moving_average: innovation not initialized");
    }
  }
  void operator()(const CancellationChainSpec& s) const {
    if (!(s.lambda > 0.0 && s.lambda < 1.0)) {
      throw ConfigError("cancellation_chain: lambda must lie in (0, 1)");
    }
  }
};

struct Describe {
  std::string operator()(const IidSpec& s) const {
    return "iid(" + s.marginal.name + ")";
  }
  std::string operator()(const GaussianAr1Spec& s) const {
    std::ostringstream os;
    os << "gaussian_ar1(phi=" << s.phi << ")";
    return os.str();
  }
  std::string operator()(const MovingAverageSpec& s) const {
    std::ostringstream os;
    os << "moving_average(q=" << s.weights.size()
       << ", innovation=" << s.innovation.name << ")";
    return os.str();
  }
  std::string operator()(const CancellationChainSpec& s) const {
    std::ostringstream os;
    os << "cancellation_chain(lambda=" << s.lambda << ")";
    return os.str();
  }
};

struct DefaultMixing {
  MixingMetadata operator()(const IidSpec&) const {
    MixingMetadata m;
    m.rho1 = 0.0;
    m.rho_geometric_rate = 0.0;
    m.rho_star1 = 0.0;
    m.alpha_vanishes = true;
    m.provenance = "independence: all dependence coefficients vanish";
    return m;
  }
  MixingMetadata operator()(const GaussianAr1Spec& s) const {
    MixingMetadata m;
    const double a = std::fabs(s.phi);
    m.rho1 = a;
    m.rho_geometric_rate = a;
    m.alpha_vanishes = true;
    m.provenance =
        "stationary Gaussian AR(1): maximal correlation across a lag-n gap "
        "equals |phi|^n; declared, checked only through pairwise "
        "correlations";
    return m;
  }
  MixingMetadata operator()(const MovingAverageSpec& s) const {
    MixingMetadata m;
    m.alpha_vanishes = true;  // finite-order dependence
    m.provenance =
        "finite moving average of order " + std::to_string(s.weights.size()) +
        ": coefficients vanish beyond the window; no lag-1 interlaced bound "
        "declared by default";
    return m;
  }
  MixingMetadata operator()(const CancellationChainSpec& s) const {
    MixingMetadata m;
    m.rho1 = 1.0;
    m.rho_star1 = 1.0;
    m.alpha_vanishes = true;
    std::ostringstream os;
    os << "cancellation chain: the excursion-entry and excursion-exit "
          "indicators coincide a.s., so rho at lag 1 equals 1; alpha(1) <= "
       << s.lambda;
    m.provenance = os.str();
    return m;
  }
};

int draw_initial_state(const RngStream& s, const std::array<double, 3>& pi) {
  const double u = s.uniform(0, kDecisionLane);
  if (u < pi[0]) return 1;
  if (u < pi[0] + pi[1]) return 2;
  return 3;
}

}  // namespace

MixingMetadata ProcessSpec::mixing() const {
  if (declared_mixing.has_value()) return *declared_mixing;
  return std::visit(DefaultMixing{}, kind);
}

std::string ProcessSpec::describe() const {
  return std::visit(Describe{}, kind);
}

void validate(const ProcessSpec& spec) { std::visit(Validator{}, spec.kind); }

TransitionMatrix TransitionMatrix::for_theta(double theta) {
  if (!(theta > 0.0 && theta < 0.25)) {
    throw ConfigError("TransitionMatrix: theta must lie in (0, 1/4)");
  }
  TransitionMatrix t;
  t.theta = theta;
  t.p = {{{1.0 - theta, theta, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}}};
  return t;
}

namespace {
std::array<std::array<double, 3>, 3> matmul3(
    const std::array<std::array<double, 3>, 3>& a,
    const std::array<std::array<double, 3>, 3>& b) {
  std::array<std::array<double, 3>, 3> c{};
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      const double aik = a[i][k];
      if (aik == 0.0) continue;
      for (int j = 0; j < 3; ++j) c[i][j] += aik * b[k][j];
    }
  }
  return c;
}
}  // namespace

std::array<std::array<double, 3>, 3> TransitionMatrix::power(
    std::uint64_t n) const {
  std::array<std::array<double, 3>, 3> result = {
      {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
  std::array<std::array<double, 3>, 3> base = p;
  while (n > 0) {
    if (n & 1) result = matmul3(result, base);
    base = matmul3(base, base);
    n >>= 1;
  }
  return result;
}

std::array<double, 3> stationary_chain_dist(double theta) {
  if (!(theta > 0.0 && theta < 0.25)) {
    throw ConfigError("stationary_chain_dist: theta must lie in (0, 1/4)");
  }
  const double z = 1.0 + 2.0 * theta;
  return {1.0 / z, theta / z, theta / z};
}

void generate_path(const ProcessSpec& spec, std::int64_t n,
                   std::uint64_t seed, std::vector<double>& values,
                   std::vector<int>* hidden_states) {
  if (n < 1) throw ConfigError("generate_path: n must be >= 1");
  validate(spec);
  values.resize(static_cast<std::size_t>(n));
  if (hidden_states) hidden_states->clear();

  const RngStream stream = make_stream(seed, StreamPurpose::kPathGen, 0);

  if (const auto* iid = std::get_if<IidSpec>(&spec.kind)) {
    for (std::int64_t k = 1; k <= n; ++k) {
      values[static_cast<std::size_t>(k - 1)] =
          iid->marginal.sampler(stream, static_cast<std::uint64_t>(k));
    }
    return;
  }

  if (const auto* ar = std::get_if<GaussianAr1Spec>(&spec.kind)) {
    // Stationary start: X_0 ~ N(0,1), then X_k = phi X_{k-1} + c eps_k.
    const double c = std::sqrt(1.0 - ar->phi * ar->phi);
    double x = stream.normal(0, kGaussLane);
    for (std::int64_t k = 1; k <= n; ++k) {
      x = ar->phi * x +
          c * stream.normal(static_cast<std::uint64_t>(k), kGaussLane);
      values[static_cast<std::size_t>(k - 1)] = x;
    }
    return;
  }

  if (const auto* ma = std::get_if<MovingAverageSpec>(&spec.kind)) {
    // X_k = sum_j w_j eps_{k-j}; innovation indices run from 1-q so the
    // window is fully pre-rolled at k = 1.
    const std::int64_t q = static_cast<std::int64_t>(ma->weights.size());
    std::vector<double> ring(static_cast<std::size_t>(q));
    const auto eps = [&](std::int64_t i) {
      return ma->innovation.sampler(stream,
                                    static_cast<std::uint64_t>(i + q));
    };
    for (std::int64_t i = 1 - q; i <= 0; ++i) {
      ring[static_cast<std::size_t>((i % q + q) % q)] = eps(i);
    }
    for (std::int64_t k = 1; k <= n; ++k) {
      ring[static_cast<std::size_t>(k % q)] = eps(k);
      double x = 0.0;
      for (std::int64_t j = 0; j < q; ++j) {
        x += ma->weights[static_cast<std::size_t>(j)] *
             ring[static_cast<std::size_t>(((k - j) % q + q) % q)];
      }
      values[static_cast<std::size_t>(k - 1)] = x;
    }
    return;
  }

  const auto& cc = std::get<CancellationChainSpec>(spec.kind);
  const double theta = cc.theta();
  const auto pi = stationary_chain_dist(theta);
  std::vector<int> local_states;
  std::vector<int>& states = hidden_states ? *hidden_states : local_states;
  states.resize(static_cast<std::size_t>(n) + 1);

  // Z stream indexed by time so the -Z_{k-1} emission reuses the very
  // same draw the state-2 visit emitted, not an equal-in-law copy.
  const auto z = [&stream](std::int64_t k) {
    return stream.normal(static_cast<std::uint64_t>(k), kGaussLane);
  };

  states[0] = draw_initial_state(stream, pi);
  for (std::int64_t k = 1; k <= n; ++k) {
    const int prev = states[static_cast<std::size_t>(k - 1)];
    int next;
    if (prev == 1) {
      next = stream.uniform(static_cast<std::uint64_t>(k), kDecisionLane) <
                     1.0 - theta
                 ? 1
                 : 2;
    } else if (prev == 2) {
      next = 3;
    } else {
      next = 1;
    }
    states[static_cast<std::size_t>(k)] = next;
    double x = 0.0;
    if (next == 2) {
      x = z(k);
    } else if (next == 3) {
      x = -z(k - 1);
    }
    values[static_cast<std::size_t>(k - 1)] = x;
  }
}

SamplePath sample_path(const ProcessSpec& spec, std::int64_t n,
                       std::uint64_t seed) {
  SamplePath path;
  path.n = n;
  path.seed = seed;
  const bool chain = std::holds_alternative<CancellationChainSpec>(spec.kind);
  generate_path(spec, n, seed, path.values,
                chain ? &path.hidden_states : nullptr);
  return path;
}

Marginal x0_marginal(const ProcessSpec& spec) {
  validate(spec);
  if (const auto* iid = std::get_if<IidSpec>(&spec.kind)) {
    return iid->marginal;
  }
  if (std::holds_alternative<GaussianAr1Spec>(spec.kind)) {
    return standard_normal();
  }
  if (const auto* ma = std::get_if<MovingAverageSpec>(&spec.kind)) {
    if (ma->innovation.family != MarginalFamily::kNormal) {
      throw UnsupportedDistributionError(
          "x0_marginal: no closed marginal for a moving average with "
          "non-normal innovations");
    }
    const double mu_inn = ma->innovation.params[0];
    const double sd_inn = ma->innovation.params[1];
    double wsum = 0.0;
    double w2 = 0.0;
    for (double w : ma->weights) {
      wsum += w;
      w2 += w * w;
    }
    return normal(mu_inn * wsum, sd_inn * std::sqrt(w2));
  }
  const auto& cc = std::get<CancellationChainSpec>(spec.kind);
  const auto pi = stationary_chain_dist(cc.theta());
  return zero_inflated_normal(pi[0]);
}

std::string path_to_csv(const SamplePath& path) {
  const bool with_states = !path.hidden_states.empty();
  std::string out = with_states ? "k,x,v\n" : "k,x\n";
  char buf[64];
  for (std::int64_t k = 1; k <= path.n; ++k) {
    const double x = path.values[static_cast<std::size_t>(k - 1)];
    if (with_states) {
      std::snprintf(buf, sizeof(buf), "%lld,%.17g,%d\n",
                    static_cast<long long>(k), x,
                    path.hidden_states[static_cast<std::size_t>(k)]);
    } else {
      std::snprintf(buf, sizeof(buf), "%lld,%.17g\n",
                    static_cast<long long>(k), x);
    }
    out += buf;
  }
  return out;
}

}  // namespace shrinklab
