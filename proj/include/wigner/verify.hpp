#pragma once

// Identity suites over seeded random instances and their reports.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wigner/fock.hpp"
#include "wigner/oracle.hpp"
#include "wigner/random.hpp"
#include "wigner/serialize.hpp"

namespace wigner::verify {

struct SuiteConfig {
  std::size_t basis = 6;
  std::size_t max_degree = 5;
  std::size_t fock_level = 10;
  /// Overrides the per-check tolerance of every deterministic check.
  std::optional<double> tol;
  std::uint64_t seed = 42;
  std::vector<std::string> suites{"all"};
  std::size_t gue_dim = 300;
  std::size_t gue_samples = 20;
  /// Width of a time block; the basis vector e_j is the normalized
  /// indicator of [j*block, (j+1)*block).
  double block = 1.0;
};

enum class Status { Pass, Fail, Error };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::Pass: return "PASS";
    case Status::Fail: return "FAIL";
    case Status::Error: return "ERROR";
  }
  return "ERROR";
}

struct CheckRecord {
  std::string suite;
  std::string id;
  std::string anchor;
  Status status = Status::Error;
  double residual = 0;
  double tolerance = 0;
  double elapsed_ms = 0;
  std::string message;
  json failing_input;
};

struct Report {
  SuiteConfig config;
  std::vector<CheckRecord> checks;

  std::size_t passed() const {
    return static_cast<std::size_t>(
        std::count_if(checks.begin(), checks.end(), [](const auto& c) { return c.status == Status::Pass; }));
  }
  bool all_passed() const { return passed() == checks.size(); }
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Largest residual seen so far together with the inputs that produced it.
class Worst {
 public:
  void observe(double residual, const std::function<json()>& inputs) {
    if (!std::isfinite(residual)) residual = std::numeric_limits<double>::infinity();
    if (residual > residual_ || !seen_) {
      residual_ = residual;
      inputs_ = inputs();
      seen_ = true;
    }
  }
  double residual() const { return residual_; }
  const json& inputs() const { return inputs_; }

 private:
  double residual_ = 0;
  json inputs_;
  bool seen_ = false;
};

using CheckFn = std::function<Worst(const SuiteConfig&, RandomSource&)>;

struct CheckSpec {
  std::string suite;
  std::string id;
  std::string anchor;
  double tolerance;
  bool statistical;
  CheckFn run;
};

/// One anchor per acceptance criterion.
inline const std::vector<std::string>& acceptance_anchors() {
  static const std::vector<std::string> anchors{
      "Wigner-Ito isometry",       "Product formula",        "Chebyshev identity",
      "Free Stroock round trip",   "Divergence coherence",   "Commutations",
      "Clark-Ocone",               "Variance identities",    "Sobolev characterization",
      "Fock commutator lemma",     "Haagerup inequality",    "Hypercontractivity spot check",
      "Dilation limit",            "Rotation automorphism"};
  return anchors;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"isometry", "product",   "malliavin", "stroock",     "clark-ocone",
                                              "variance", "cebron",    "fock",      "commutators", "gue"};
  return names;
}

namespace detail {

inline double rel(double diff, double scale) { return diff / std::max(1.0, scale); }

inline json chaos_json(const ChaosExpansion& f) { return to_json(f); }

inline json kernels_json(std::span<const Kernel> ks) {
  json out = json::array();
  for (const auto& k : ks) out.push_back(to_json(k));
  return out;
}

inline Kernel unit_on(std::size_t basis, RandomSource& rng, std::size_t support) {
  Kernel h(1);
  double s = 0;
  std::vector<double> c;
  std::set<BasisIndex> idx;
  while (idx.size() < std::min(support, basis)) idx.insert(static_cast<BasisIndex>(rng.index(basis)));
  for (std::size_t q = 0; q < idx.size(); ++q) {
    c.push_back(rng.uniform(-1, 1));
    s += c.back() * c.back();
  }
  std::size_t q = 0;
  for (auto i : idx) h.add({i}, c[q++] / std::sqrt(s));
  return h;
}

/// Random order-1 biprocess sum_k (A_k (x) B_k) h_k with deg A + deg B < D.
inline Gradient random_biprocess(RandomSource& rng, std::size_t d, std::size_t top, std::size_t terms) {
  Gradient u(1);
  for (std::size_t t = 0; t < terms; ++t) {
    const std::size_t da = rng.index(top), db = rng.index(top - da);
    u += elementary_biprocess(rng.chaos(0, da, d), rng.chaos(0, db, d), rng.real_vector(d));
  }
  return u.prune();
}

// ---------------------------------------------------------------------------

inline Worst isometry(const SuiteConfig& cfg, RandomSource& rng) {
  Worst w;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = rng.index(cfg.max_degree + 1), m = rng.index(cfg.max_degree + 1);
    const Kernel f = rng.kernel(n, cfg.basis), g = rng.kernel(m, cfg.basis);
    const auto fa = adjoint_functional(ChaosExpansion::integral(f));
    const auto gi = ChaosExpansion::integral(g);
    // Full product where affordable, otherwise its degree-0 term.
    const cx lhs = n + m <= 6 ? trace(multiply(fa, gi, Budget{n + m})) : trace_product(fa, gi);
    const cx rhs = n == m ? inner_product(g, f) : cx{};
    w.observe(std::abs(lhs - rhs), [&] { return json{{"f", to_json(f)}, {"g", to_json(g)}}; });
  }
  return w;
}

inline Worst product_fock(const SuiteConfig& cfg, RandomSource& rng) {
  const std::size_t d = std::min<std::size_t>(cfg.basis, 3);
  const std::size_t level = std::min<std::size_t>(cfg.fock_level, 6);
  const std::size_t top = std::min<std::size_t>(cfg.max_degree, level / 2);
  const FockModel model(FockSpace(d, level));
  Worst w;
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = rng.chaos(0, top, d), g = rng.chaos(0, top, d);
    const auto fg = multiply(f, g, Budget{2 * top});
    const SparseMatrix xf = model.chaos_to_operator(f).matrix, xg = model.chaos_to_operator(g).matrix;
    const DenseVector v = xf * (xg * DenseVector::Unit(static_cast<long>(model.space().dimension()), 0));
    double r = 0;
    for (long i = 0; i < v.size(); ++i) {
      const Word word = model.space().word(static_cast<std::size_t>(i));
      r = std::max(r, std::abs(v(i) - fg.component(word.size()).at(word)));
    }
    w.observe(r, [&] { return json{{"F", to_json(f)}, {"G", to_json(g)}}; });
  }
  return w;
}

inline Worst product_words(const SuiteConfig& cfg, RandomSource& rng) {
  Worst w;
  for (int trial = 0; trial < 100; ++trial) {
    const auto word = rng.basis_word(1 + rng.index(10), cfg.basis);
    const cx lhs = word_moment(word, Budget{word.size()});
    w.observe(std::abs(lhs - wick_moment(word)), [&] { return json{{"word", kernels_json(word)}}; });
  }
  // Generic real directions on a two-dimensional subspace keep the products small.
  for (int trial = 0; trial < 30; ++trial) {
    const auto word = rng.real_word(1 + rng.index(8), std::min<std::size_t>(cfg.basis, 2));
    const cx lhs = word_moment(word, Budget{word.size()});
    w.observe(std::abs(lhs - wick_moment(word)), [&] { return json{{"word", kernels_json(word)}}; });
  }
  return w;
}

inline Worst chebyshev(const SuiteConfig& cfg, RandomSource& rng) {
  Worst w;
  std::vector<Kernel> units;
  for (BasisIndex i = 0; i < cfg.basis; ++i) units.push_back(Kernel::basis(i));
  for (int k = 0; k < 4; ++k) units.push_back(unit_on(cfg.basis, rng, 2));
  for (const auto& e : units)
    for (std::size_t p = 1; p <= 8; ++p) {
      const auto lhs = chebyshev_eval(p, e, Budget{8});
      w.observe(max_abs_diff(lhs, ChaosExpansion::integral(tensor_power(e, p))),
                [&] { return json{{"e", to_json(e)}, {"p", p}}; });
    }
  return w;
}

inline Worst stroock(const SuiteConfig& cfg, RandomSource& rng) {
  Worst w;
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = rng.chaos(0, cfg.max_degree, cfg.basis);
    const double r = std::max(max_abs_diff(stroock_reconstruct(f), f), max_abs_diff(stroock_reconstruct(f, true), f));
    w.observe(r, [&] { return json{{"F", to_json(f)}}; });
  }
  return w;
}

inline Worst divergence(const SuiteConfig& cfg, RandomSource& rng) {
  const std::size_t d = cfg.basis, top = cfg.max_degree;
  const Budget budget{top};
  std::vector<GradientOperator> ops;
  for (std::size_t p = 1; p <= std::min<std::size_t>(4, top); ++p) ops.emplace_back(d, p, budget);
  Worst w;
  for (std::size_t p = 1; p <= ops.size(); ++p)
    for (int trial = 0; trial < 5; ++trial) {
      const Kernel f = rng.kernel(p, d);
      const auto lhs = divergence_adjoint(deterministic_multiprocess(f), ops[p - 1]);
      w.observe(max_abs_diff(lhs, divergence_deterministic(f)), [&] { return json{{"f", to_json(f)}}; });
    }
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t da = rng.index(top), db = rng.index(top - da);
    const auto a = rng.chaos(0, da, d), b = rng.chaos(0, db, d);
    const Kernel h = rng.real_vector(d);
    const auto lhs = divergence_elementary(a, b, h, budget);
    const auto rhs = divergence_adjoint(elementary_biprocess(a, b, h), ops[0]);
    w.observe(max_abs_diff(lhs, rhs), [&] { return json{{"A", to_json(a)}, {"B", to_json(b)}, {"h", to_json(h)}}; });
  }
  for (std::size_t p = 1; p <= std::min<std::size_t>(3, ops.size()); ++p)
    for (int trial = 0; trial < 10; ++trial) {
      const auto f = rng.chaos(0, top, d);
      const Gradient u = gradient(rng.chaos(p, top, d), p);
      const cx lhs = inner_product(gradient(f, p), u);
      const cx rhs = inner(f, divergence_adjoint(u, ops[p - 1]));
      w.observe(rel(std::abs(lhs - rhs), std::abs(lhs)), [&] { return json{{"F", to_json(f)}, {"U", to_json(u)}}; });
    }
  return w;
}

inline Worst commutations(const SuiteConfig& cfg, RandomSource& rng) {
  const std::size_t d = cfg.basis, top = cfg.max_degree;
  Worst w;
  for (std::size_t k = 1; k <= std::min<std::size_t>(3, top); ++k)
    for (int trial = 0; trial < 5; ++trial) {
      const auto f = rng.chaos(0, top, d);
      const double t = rng.uniform(0, 2);
      const Gradient lhs = gradient(apply_spectral(f, SpectralMode::ou(t)), k);
      Gradient rhs = apply_ou_legs(gradient(f, k), t);
      rhs *= std::exp(-double(k) * t);
      w.observe(max_abs_diff(lhs, rhs), [&] { return json{{"F", to_json(f)}, {"t", t}, {"k", k}}; });
    }
  const GradientOperator op(d, 1, Budget{top});
  for (int trial = 0; trial < 10; ++trial) {
    const Gradient u = trial % 2 ? gradient(rng.chaos(1, top, d), 1) : random_biprocess(rng, d, top, 3);
    const Gradient lhs = gradient(divergence_adjoint(u, op), 1);
    const Gradient rhs = u + skorohod_of_derivative(u);
    w.observe(max_abs_diff(lhs, rhs), [&] { return json{{"U", to_json(u)}}; });
  }
  for (int trial = 0; trial < 10; ++trial) {
    std::set<BasisIndex> a;
    for (BasisIndex i = 0; i < d; ++i)
      if (rng.uniform() < 0.5) a.insert(i);
    const auto f = rng.chaos(0, top, d);
    const Gradient lhs = gradient(conditional_expectation(f, a), 1);
    const Gradient projected = conditional_expectation_legs(gradient(f, 1), a);
    Gradient rhs(1);
    for (const auto& [t, m] : projected.components())
      if (a.contains(t[0])) rhs.add(t, m);
    w.observe(max_abs_diff(lhs, rhs), [&] { return json{{"F", to_json(f)}, {"A", a}}; });
  }
  return w;
}

inline Worst clark_ocone_check(const SuiteConfig& cfg, RandomSource& rng) {
  const std::size_t top = std::min<std::size_t>(4, cfg.max_degree);
  const GradientOperator op(cfg.basis, 1, Budget{top});
  Worst w;
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = rng.increasing_chaos(top, cfg.basis);
    const auto co = clark_ocone(f);
    const auto rebuilt = ChaosExpansion::constant(co.mean) + ito_integral(co.integrand);
    const auto via_adjoint = ChaosExpansion::constant(co.mean) + divergence_adjoint(co.integrand.gradient(), op);
    w.observe(std::max(max_abs_diff(rebuilt, f), max_abs_diff(via_adjoint, f)),
              [&] { return json{{"F", to_json(f)}}; });
  }
  return w;
}

inline Worst variance(const SuiteConfig& cfg, RandomSource& rng) {
  const std::size_t d = cfg.basis, top = cfg.max_degree;
  Worst w;
  for (int trial = 0; trial < 200; ++trial) {
    const auto f = rng.chaos(0, top, d);
    const double var = norm2_squared(centered(f));
    const double grad = norm_squared(gradient(f, 1));
    const double gap = rel(std::max(0.0, var - grad), grad);
    const double stroock_gap = rel(std::abs(variance_stroock(f) - var), var);
    w.observe(std::max(gap, stroock_gap), [&] { return json{{"F", to_json(f)}}; });
  }
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = rng.chaos(0, top, d), g = rng.chaos(0, top, d);
    const cx direct = trace_product(f, g) - trace(f) * trace(g);
    w.observe(rel(std::abs(covariance_ou(f, g) - direct), std::abs(direct)),
              [&] { return json{{"F", to_json(f)}, {"G", to_json(g)}}; });
  }
  return w;
}

inline Worst cebron(const SuiteConfig& cfg, RandomSource& rng) {
  const std::size_t d = cfg.basis, top = cfg.max_degree;
  Worst w;
  for (std::size_t p = 1; p <= std::min<std::size_t>(3, top); ++p)
    for (int trial = 0; trial < 10; ++trial) {
      const auto a = rng.chaos(p, top, d), b = rng.chaos(p, top, d);
      const cx direct = trace_product(a, b);
      const cx lhs = cebron_product(a, b, p);
      w.observe(rel(std::abs(lhs - direct), std::abs(direct)),
                [&] { return json{{"A", to_json(a)}, {"B", to_json(b)}, {"p", p}}; });
    }
  return w;
}

inline Worst sobolev(const SuiteConfig& cfg, RandomSource& rng) {
  const std::size_t d = cfg.basis, top = cfg.max_degree;
  Worst w;
  for (std::size_t p = 1; p <= std::min<std::size_t>(4, top); ++p) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto f = rng.chaos(0, top, d);
      const double closed = sobolev_closed_form(f, p);
      w.observe(rel(std::abs(sobolev_seminorm(f, p, true) - closed), closed),
                [&] { return json{{"F", to_json(f)}, {"p", p}}; });
    }
    // nabla^p F = 0 exactly on P_{p-1}, and never above it.
    const auto low = rng.chaos(0, p - 1, d);
    w.observe(gradient(low, p).empty() ? 0.0 : 1.0, [&] { return json{{"F", to_json(low)}, {"p", p}}; });
    const auto high = low + ChaosExpansion::integral(rng.kernel(p + rng.index(top - p + 1), d));
    w.observe(gradient(high, p).empty() ? 1.0 : 0.0, [&] { return json{{"F", to_json(high)}, {"p", p}}; });
  }
  return w;
}

inline Worst dilation(const SuiteConfig& cfg, RandomSource& rng) {
  const double eps = 1e-4;
  Worst w;
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = rng.chaos(0, cfg.max_degree, cfg.basis);
    const auto quotient = (1.0 / eps) * (dilate(f, 1.0 - eps) - f);
    const double lhs = norm2(quotient - apply_spectral(f, SpectralMode::generator()));
    const double bound = dilation_taylor_constant(cfg.max_degree) * norm2(centered(f)) * eps;
    w.observe(std::max(0.0, lhs - bound), [&] { return json{{"F", to_json(f)}, {"eps", eps}}; });
  }
  return w;
}

inline Worst fock_commutator(const SuiteConfig& cfg, RandomSource& rng) {
  const std::size_t d = std::min<std::size_t>(cfg.basis, 3);
  const std::size_t level = std::min<std::size_t>(cfg.fock_level, 8);
  const std::size_t top = std::min<std::size_t>(3, level / 2);
  const FockModel model(FockSpace(d, level));
  Worst w;
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = rng.chaos(0, top, d);
    const Kernel h = rng.real_vector(d);
    const auto lhs = commutator_rstar(model, h, f);
    const auto rhs = gradient_sharp_vacuum(model, h, f);
    w.observe(max_abs_diff(lhs, rhs, level - f.degree()), [&] { return json{{"F", to_json(f)}, {"h", to_json(h)}}; });
  }
  return w;
}

inline Worst haagerup_fock(const SuiteConfig& cfg, RandomSource& rng) {
  const std::size_t d = std::min<std::size_t>(cfg.basis, 2);
  const FockSpace space(d, std::min<std::size_t>(cfg.fock_level, 7));
  Worst w;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.index(std::min<std::size_t>(4, cfg.max_degree));
    const Kernel f = rng.kernel(n, d);
    const double op = operator_norm(compress_chaos(space, ChaosExpansion::integral(f)));
    w.observe(std::max(0.0, op - double(n + 1) * norm(f)), [&] { return json{{"f", to_json(f)}}; });
  }
  return w;
}

// Residual is the worst ratio of the GUE norm estimate to (n+1)||f||.
inline Worst haagerup_gue(const SuiteConfig& cfg, RandomSource& rng) {
  const std::size_t d = std::min<std::size_t>(cfg.basis, 2);
  std::vector<ChaosExpansion> fs;
  std::vector<double> bounds;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 1 + rng.index(std::min<std::size_t>(4, cfg.max_degree));
    const Kernel f = rng.kernel(n, d);
    fs.push_back(ChaosExpansion::integral(f));
    bounds.push_back(double(n + 1) * norm(f));
  }
  const GueConfig gue{cfg.gue_dim, cfg.gue_samples, cfg.seed};
  const auto est = gue_operator_norms(fs, gue);
  Worst w;
  for (std::size_t q = 0; q < fs.size(); ++q)
    w.observe(est[q].mean / bounds[q],
              [&] { return json{{"F", to_json(fs[q])}, {"estimate", est[q].mean}, {"std_error", est[q].std_error}}; });
  return w;
}

inline Worst hypercontractivity(const SuiteConfig& cfg, RandomSource& rng) {
  const std::size_t d = std::min<std::size_t>(cfg.basis, 2);
  const std::size_t level = cfg.fock_level;
  const std::size_t top = std::min<std::size_t>(cfg.max_degree, level / 2);
  const FockSpace space(d, level);
  const double t = 0.5 * std::log(3.0);
  Worst w;
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = rng.chaos(0, top, d);
    const double f2 = norm2(f);
    const double f4 = lp_norm_even(compress_chaos(space, f), 4);
    double r = std::max(0.0, lp_norm_even(compress_chaos(space, apply_spectral(f, SpectralMode::ou(t))), 4) - f2);
    for (const auto& [n, k] : f.components()) {
      const double pn4 = lp_norm_even(compress_chaos(space, ChaosExpansion::integral(k)), 4);
      r = std::max(r, pn4 - std::pow(3.0, double(n) / 2) * f4);
    }
    w.observe(r, [&] { return json{{"F", to_json(f)}}; });
  }
  return w;
}

inline Worst rotation(const SuiteConfig& cfg, RandomSource& rng) {
  const std::size_t d = cfg.basis;
  const std::size_t letters = std::min<std::size_t>(d, 2);
  Worst w;
  for (int trial = 0; trial < 50; ++trial) {
    const auto word = trial % 2 ? rng.real_word(1 + rng.index(6), letters) : rng.basis_word(1 + rng.index(8), letters);
    const cx reference = wick_moment(word);
    const auto product = word_product(word, Budget{word.size()});
    for (double t : {0.3, 1.2}) {
      std::vector<Kernel> rotated;
      for (const auto& h : word) {
        Kernel r(1);
        for (const auto& [i, c] : h.entries()) {
          r.add(i, std::cos(t) * c);
          r.add({i[0] + static_cast<BasisIndex>(d)}, std::sin(t) * c);
        }
        rotated.push_back(r);
      }
      const auto image = rotate_pair(product, d, t);
      // The rotation is multiplicative: alpha_t(S(h_1)...S(h_k)) = S(R h_1)...S(R h_k).
      const double r = std::max({std::abs(wick_moment(rotated) - reference), std::abs(trace(image) - reference),
                                 max_abs_diff(image, word_product(rotated, Budget{word.size()}))});
      w.observe(r, [&] { return json{{"word", kernels_json(word)}, {"t", t}}; });
    }
  }
  return w;
}

inline std::uint64_t check_seed(std::uint64_t seed, const std::string& id) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : id) h = (h ^ c) * 1099511628211ULL;
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (h | 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Every registered check, ordered by id.
inline const std::vector<CheckSpec>& registry() {
  static const std::vector<CheckSpec> specs = [] {
    std::vector<CheckSpec> v{
        {"cebron", "cebron.generalized", "Variance identities", 1e-10, false, detail::cebron},
        {"clark-ocone", "clark-ocone.reconstruction", "Clark-Ocone", 1e-12, false, detail::clark_ocone_check},
        {"commutators", "commutators.fock_rstar", "Fock commutator lemma", 1e-10, false, detail::fock_commutator},
        {"fock", "fock.haagerup", "Haagerup inequality", 1e-9, false, detail::haagerup_fock},
        {"fock", "fock.hypercontractivity", "Hypercontractivity spot check", 1e-9, false,
         detail::hypercontractivity},
        {"gue", "gue.haagerup", "Haagerup inequality", 1.1, true, detail::haagerup_gue},
        {"isometry", "isometry.wigner_ito", "Wigner-Ito isometry", 1e-12, false, detail::isometry},
        {"malliavin", "malliavin.commutations", "Commutations", 1e-10, false, detail::commutations},
        {"malliavin", "malliavin.dilation", "Dilation limit", 1e-12, false, detail::dilation},
        {"malliavin", "malliavin.divergence", "Divergence coherence", 1e-10, false, detail::divergence},
        {"malliavin", "malliavin.sobolev", "Sobolev characterization", 1e-12, false, detail::sobolev},
        {"product", "product.chebyshev", "Chebyshev identity", 1e-12, false, detail::chebyshev},
        {"product", "product.fock_oracle", "Product formula", 1e-10, false, detail::product_fock},
        {"product", "product.nc_words", "Product formula", 1e-10, false, detail::product_words},
        {"product", "product.rotation", "Rotation automorphism", 1e-10, false, detail::rotation},
        {"stroock", "stroock.round_trip", "Free Stroock round trip", 1e-12, false, detail::stroock},
        {"variance", "variance.identities", "Variance identities", 1e-12, false, detail::variance},
    };
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return v;
  }();
  return specs;
}

inline void validate(const SuiteConfig& cfg) {
  if (cfg.tol && !(*cfg.tol > 0)) throw ConfigError("tolerance must be positive");
  if (cfg.basis < 1) throw ConfigError("basis size must be at least 1");
  if (cfg.max_degree < 1) throw ConfigError("max degree must be at least 1");
  if (!(cfg.block > 0)) throw ConfigError("time block width must be positive");
  if (cfg.suites.empty()) throw ConfigError("no suite selected");
  bool fock = false;
  for (const auto& s : cfg.suites) {
    if (s == "all") {
      fock = true;
      continue;
    }
    if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
      throw ConfigError("unknown suite '" + s + "'");
    fock = fock || s == "fock" || s == "commutators";
  }
  if (fock && cfg.max_degree > cfg.fock_level)
    throw ConfigError("max degree " + std::to_string(cfg.max_degree) + " exceeds Fock level " +
                      std::to_string(cfg.fock_level));
  if (fock && cfg.fock_level < 2) throw ConfigError("Fock level must be at least 2");
  const bool gue = std::find(cfg.suites.begin(), cfg.suites.end(), "gue") != cfg.suites.end() ||
                   std::find(cfg.suites.begin(), cfg.suites.end(), "all") != cfg.suites.end();
  if (gue && (cfg.gue_dim < 2 || cfg.gue_samples < 1)) throw ConfigError("GUE needs dimension >= 2 and samples >= 1");
}

inline bool selected(const SuiteConfig& cfg, const std::string& suite) {
  for (const auto& s : cfg.suites)
    if (s == "all" || s == suite) return true;
  return false;
}

inline CheckRecord run_check(const CheckSpec& spec, const SuiteConfig& cfg) {
  CheckRecord rec;
  rec.suite = spec.suite;
  rec.id = spec.id;
  rec.anchor = spec.anchor;
  rec.tolerance = (cfg.tol && !spec.statistical) ? *cfg.tol : spec.tolerance;
  RandomSource rng(detail::check_seed(cfg.seed, spec.id));
  const auto start = std::chrono::steady_clock::now();
  try {
    const Worst w = spec.run(cfg, rng);
    rec.residual = w.residual();
    rec.status = w.residual() <= rec.tolerance ? Status::Pass : Status::Fail;
    if (rec.status == Status::Fail) rec.failing_input = w.inputs();
  } catch (const std::exception& e) {
    rec.status = Status::Error;
    rec.message = e.what();
  }
  rec.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

/// Runs the selected suites; records are ordered by check id.
inline Report run_suite(const SuiteConfig& cfg) {
  validate(cfg);
  Report r{cfg, {}};
  for (const auto& spec : registry())
    if (selected(cfg, spec.suite)) r.checks.push_back(run_check(spec, cfg));
  return r;
}

enum class Format { Json, Table };

inline json config_json(const SuiteConfig& c) {
  json j{{"basis", c.basis},         {"max_degree", c.max_degree}, {"fock_level", c.fock_level},
         {"seed", c.seed},           {"suites", c.suites},         {"gue_dim", c.gue_dim},
         {"gue_samples", c.gue_samples}, {"block", c.block}};
  j["tol"] = c.tol ? json(*c.tol) : json(nullptr);
  return j;
}

inline std::string format_double(double x) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << x;
  return os.str();
}

/// JSON or aligned table. Timings are omitted when `timing` is false so
/// that two runs with the same configuration compare byte for byte.
inline std::string report_emit(const Report& r, Format format, bool timing = true) {
  if (format == Format::Json) {
    json checks = json::array();
    for (const auto& c : r.checks) {
      json j{{"suite", c.suite},       {"id", c.id},
             {"anchor", c.anchor},     {"status", to_string(c.status)},
             {"residual", c.residual}, {"tolerance", c.tolerance}};
      if (timing) j["elapsed_ms"] = c.elapsed_ms;
      if (!c.message.empty()) j["message"] = c.message;
      if (c.status != Status::Pass && !c.failing_input.is_null()) j["failing_input"] = c.failing_input;
      checks.push_back(std::move(j));
    }
    const std::size_t passed = r.passed();
    json out{{"config", config_json(r.config)},
             {"summary", {{"total", r.checks.size()}, {"passed", passed}, {"failed", r.checks.size() - passed}}},
             {"checks", std::move(checks)}};
    return out.dump(2) + "\n";
  }
  std::vector<std::vector<std::string>> rows{{"STATUS", "CHECK", "ANCHOR", "RESIDUAL", "TOLERANCE"}};
  if (timing) rows[0].push_back("MS");
  for (const auto& c : r.checks) {
    rows.push_back({to_string(c.status), c.id, c.anchor, format_double(c.residual), format_double(c.tolerance)});
    if (timing) {
      std::ostringstream ms;
      ms << std::fixed << std::setprecision(1) << c.elapsed_ms;
      rows.back().push_back(ms.str());
    }
  }
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& row : rows)
    for (std::size_t q = 0; q < row.size(); ++q) width[q] = std::max(width[q], row[q].size());
  std::ostringstream os;
  for (const auto& row : rows) {
    for (std::size_t q = 0; q < row.size(); ++q) {
      if (q + 1 == row.size()) {
        os << row[q];
        break;
      }
      os << std::left << std::setw(static_cast<int>(width[q])) << row[q] << "  ";
    }
    os << "\n";
  }
  for (const auto& c : r.checks)
    if (!c.message.empty()) os << c.id << ": " << c.message << "\n";
  return os.str();
}

}  // namespace wigner::verify
