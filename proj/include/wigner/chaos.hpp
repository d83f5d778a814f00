#pragma once

// Finite Wigner chaos expansions F = sum_n I_n(f_n) and the operations that
// act on them: the product formula, trace, spectral calculus of the
// Ornstein-Uhlenbeck generator, conditional expectations, Chebyshev
// evaluation and the rotation automorphism.

#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "wigner/kernel.hpp"

namespace wigner {

class ChaosExpansion {
 public:
  using Components = std::map<std::size_t, Kernel>;

  ChaosExpansion() = default;

  static ChaosExpansion constant(cx c) {
    ChaosExpansion f;
    f.add(Kernel::scalar(c));
    return f;
  }

  /// I_n(f) with n = f.order()
  static ChaosExpansion integral(const Kernel& f) {
    ChaosExpansion out;
    out.add(f);
    return out;
  }

  /// S(h) = I_1(h)
  static ChaosExpansion field(const Kernel& h) {
    if (h.order() != 1) throw ArityError("field direction must be an order-1 kernel");
    return integral(h);
  }

  const Components& components() const { return components_; }
  bool empty() const { return components_.empty(); }

  Kernel component(std::size_t n) const {
    auto it = components_.find(n);
    return it == components_.end() ? Kernel(n) : it->second;
  }

  /// Highest stored degree; 0 for the zero expansion.
  std::size_t degree() const { return components_.empty() ? 0 : components_.rbegin()->first; }

  /// Lowest stored degree; 0 for the zero expansion.
  std::size_t min_degree() const { return components_.empty() ? 0 : components_.begin()->first; }

  void add(const Kernel& k, cx alpha = 1.0, double prune = kDefaultPrune) {
    auto [it, inserted] = components_.try_emplace(k.order(), k.order());
    for (const auto& [w, c] : k.entries()) it->second.add(w, alpha * c);
    it->second.prune(prune);
    if (it->second.empty()) components_.erase(it);
  }

  ChaosExpansion& operator+=(const ChaosExpansion& o) {
    for (const auto& [n, k] : o.components_) add(k);
    return *this;
  }
  ChaosExpansion& operator-=(const ChaosExpansion& o) {
    for (const auto& [n, k] : o.components_) add(k, -1.0);
    return *this;
  }
  ChaosExpansion& operator*=(cx alpha) {
    for (auto& [n, k] : components_) k *= alpha;
    std::erase_if(components_, [](const auto& kv) { return kv.second.empty(); });
    return *this;
  }
  friend ChaosExpansion operator+(ChaosExpansion a, const ChaosExpansion& b) { return a += b; }
  friend ChaosExpansion operator-(ChaosExpansion a, const ChaosExpansion& b) { return a -= b; }
  friend ChaosExpansion operator*(cx alpha, ChaosExpansion a) { return a *= alpha; }

  friend double max_abs_diff(const ChaosExpansion& a, const ChaosExpansion& b) {
    double m = 0;
    for (const auto& [n, k] : a.components_) m = std::max(m, max_abs_diff(k, b.component(n)));
    for (const auto& [n, k] : b.components_)
      if (!a.components_.contains(n)) m = std::max(m, max_abs_diff(Kernel(n), k));
    return m;
  }

  friend bool operator==(const ChaosExpansion&, const ChaosExpansion&) = default;

 private:
  Components components_;
};

inline ChaosExpansion linear_combine(std::span<const std::pair<cx, ChaosExpansion>> terms,
                                     double prune = kDefaultPrune) {
  ChaosExpansion out;
  std::map<std::size_t, Kernel> acc;
  for (const auto& [alpha, f] : terms)
    for (const auto& [n, k] : f.components()) {
      auto [it, ins] = acc.try_emplace(n, n);
      for (const auto& [w, c] : k.entries()) it->second.add(w, alpha * c);
    }
  for (auto& [n, k] : acc) out.add(k, 1.0, prune);
  return out;
}

/// I_n(f) I_m(g) = sum_{p <= min(n,m)} I_{n+m-2p}(f contracted_p g), bilinearly.
inline ChaosExpansion multiply(const ChaosExpansion& f, const ChaosExpansion& g,
                               const Budget& budget = {}) {
  if (!f.empty() && !g.empty() && f.degree() + g.degree() > budget.max_degree)
    throw TruncationError("product of degrees " + std::to_string(f.degree()) + " and " +
                          std::to_string(g.degree()) + " exceeds max_degree " +
                          std::to_string(budget.max_degree));
  std::map<std::size_t, Kernel> acc;
  for (const auto& [n, fk] : f.components())
    for (const auto& [m, gk] : g.components())
      for (std::size_t p = 0; p <= std::min(n, m); ++p) {
        Kernel c = contract(fk, gk, p, 0.0);
        auto [it, ins] = acc.try_emplace(c.order(), c.order());
        for (const auto& [w, v] : c.entries()) it->second.add(w, v);
      }
  ChaosExpansion out;
  for (auto& [n, k] : acc) out.add(k, 1.0, budget.prune);
  return out;
}

/// I_n(f)* = I_n(f*)
inline ChaosExpansion adjoint_functional(const ChaosExpansion& f) {
  ChaosExpansion out;
  for (const auto& [n, k] : f.components()) out.add(adjoint(k));
  return out;
}

inline bool is_self_adjoint(const ChaosExpansion& f, double tol = 1e-12) {
  return max_abs_diff(f, adjoint_functional(f)) <= tol;
}

/// tau(F) = f_0
inline cx trace(const ChaosExpansion& f) { return f.component(0).at(Word{}); }

/// tau(FG) without forming the product: the degree-0 term of the product
/// formula, sum_n contract(f_n, g_n, n).
inline cx trace_product(const ChaosExpansion& f, const ChaosExpansion& g) {
  cx s{};
  for (const auto& [n, k] : f.components()) {
    auto it = g.components().find(n);
    if (it != g.components().end()) s += contract(k, it->second, n).at(Word{});
  }
  return s;
}

/// tau(G* F) = sum_n <f_n, g_n>
inline cx inner(const ChaosExpansion& f, const ChaosExpansion& g) {
  cx s{};
  for (const auto& [n, k] : f.components()) s += inner_product(k, g.component(n));
  return s;
}

inline double norm2_squared(const ChaosExpansion& f) {
  double s = 0;
  for (const auto& [n, k] : f.components()) s += norm_squared(k);
  return s;
}

inline double norm2(const ChaosExpansion& f) { return std::sqrt(norm2_squared(f)); }

/// F - tau(F)
inline ChaosExpansion centered(const ChaosExpansion& f) {
  ChaosExpansion out = f;
  out -= ChaosExpansion::constant(trace(f));
  return out;
}

/// pi_n
inline ChaosExpansion project_chaos(const ChaosExpansion& f, std::size_t n) {
  ChaosExpansion out;
  out.add(f.component(n));
  return out;
}

// ---------------------------------------------------------------------------
// Diagonal operators of the Ornstein-Uhlenbeck calculus.

struct SpectralMode {
  enum class Kind { OrnsteinUhlenbeck, Generator, Number, Cauchy, PseudoInverse };
  Kind kind;
  double time = 0.0;  // only read by OrnsteinUhlenbeck

  static SpectralMode ou(double t) { return {Kind::OrnsteinUhlenbeck, t}; }
  static SpectralMode generator() { return {Kind::Generator}; }
  static SpectralMode number() { return {Kind::Number}; }
  static SpectralMode cauchy() { return {Kind::Cauchy}; }
  static SpectralMode pseudo_inverse() { return {Kind::PseudoInverse}; }

  /// Eigenvalue on the n-th chaos.
  double eigenvalue(std::size_t n) const {
    const double dn = static_cast<double>(n);
    switch (kind) {
      case Kind::OrnsteinUhlenbeck: return std::exp(-dn * time);
      case Kind::Generator: return -dn;
      case Kind::Number: return dn;
      case Kind::Cauchy: return -std::sqrt(dn);
      case Kind::PseudoInverse: return n == 0 ? 0.0 : -1.0 / dn;
    }
    return 0.0;
  }
};

inline ChaosExpansion apply_spectral(const ChaosExpansion& f, SpectralMode mode) {
  if (mode.kind == SpectralMode::Kind::OrnsteinUhlenbeck && !(mode.time >= 0.0))
    throw PreconditionError("Ornstein-Uhlenbeck semigroup requires t >= 0");
  ChaosExpansion out;
  for (const auto& [n, k] : f.components()) out.add(k, mode.eigenvalue(n));
  return out;
}

/// F_lambda = tau(F) + sum_{n>=1} lambda^n I_n(f_n)
inline ChaosExpansion dilate(const ChaosExpansion& f, cx lambda) {
  ChaosExpansion out;
  for (const auto& [n, k] : f.components())
    out.add(k, n == 0 ? cx{1.0} : std::pow(lambda, static_cast<double>(n)));
  return out;
}

/// Bound on |((1-eps)^n - 1)/eps + n| used for the dilation limit:
/// the alternating binomial tail is dominated by its first term eps*n(n-1)/2.
inline double dilation_taylor_constant(std::size_t max_degree) {
  const double d = static_cast<double>(max_degree);
  return d * (d - 1.0) / 2.0;
}

/// U_p(S(h)) by the three-term recurrence X U_k = U_{k+1} + U_{k-1}.
inline ChaosExpansion chebyshev_eval(std::size_t p, const Kernel& h, const Budget& budget = {}) {
  if (h.order() != 1) throw ArityError("chebyshev_eval needs an order-1 direction");
  if (std::abs(norm(h) - 1.0) > 1e-12) throw PreconditionError("chebyshev_eval needs a unit vector");
  const ChaosExpansion x = ChaosExpansion::field(h);
  ChaosExpansion prev = ChaosExpansion::constant(1.0);
  if (p == 0) return prev;
  ChaosExpansion cur = x;
  for (std::size_t k = 1; k < p; ++k) {
    ChaosExpansion next = multiply(x, cur, budget) - prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

/// tau(F | F_A): keeps kernel entries whose indices all lie in A.
inline ChaosExpansion conditional_expectation(const ChaosExpansion& f,
                                              const std::set<BasisIndex>& subset) {
  ChaosExpansion out;
  for (const auto& [n, k] : f.components()) {
    Kernel kept(n);
    for (const auto& [w, c] : k.entries())
      if (std::all_of(w.begin(), w.end(), [&](BasisIndex i) { return subset.contains(i); }))
        kept.add(w, c);
    out.add(kept);
  }
  return out;
}

/// Applies e_i -> cos(t) e_i + sin(t) e_{i+d} to every tensor slot. Input
/// indices must lie in [0, d); indices d..2d-1 carry the independent copy.
inline ChaosExpansion rotate_pair(const ChaosExpansion& f, std::size_t block, double t,
                                  double prune = kDefaultPrune) {
  const double c = std::cos(t);
  const double s = std::sin(t);
  ChaosExpansion out;
  for (const auto& [n, k] : f.components()) {
    Kernel acc(n);
    for (const auto& [w, coeff] : k.entries()) {
      for (auto i : w)
        if (i >= block)
          throw DomainError("index " + std::to_string(i) + " outside the rotated block of size " +
                            std::to_string(block));
      // Expand the product of n two-term sums.
      const std::size_t terms = std::size_t{1} << n;
      Word v(n);
      for (std::size_t mask = 0; mask < terms; ++mask) {
        cx weight = coeff;
        for (std::size_t q = 0; q < n; ++q) {
          const bool copy = (mask >> q) & 1U;
          v[q] = copy ? static_cast<BasisIndex>(w[q] + block) : w[q];
          weight *= copy ? s : c;
        }
        if (weight != cx{}) acc.add(v, weight);
      }
    }
    out.add(acc, 1.0, prune);
  }
  return out;
}

/// tau(S(h_1) ... S(h_k)) by folding the product formula.
inline cx word_moment(std::span<const Kernel> word, const Budget& budget = {}) {
  if (word.size() > budget.max_degree)
    throw TruncationError("word of length " + std::to_string(word.size()) +
                          " exceeds max_degree " + std::to_string(budget.max_degree));
  ChaosExpansion acc = ChaosExpansion::constant(1.0);
  for (const auto& h : word) acc = multiply(acc, ChaosExpansion::field(h), budget);
  return trace(acc);
}

/// Product of S(h_1) ... S(h_k) as a chaos expansion.
inline ChaosExpansion word_product(std::span<const Kernel> word, const Budget& budget = {}) {
  ChaosExpansion acc = ChaosExpansion::constant(1.0);
  for (const auto& h : word) acc = multiply(acc, ChaosExpansion::field(h), budget);
  return acc;
}

/// Product formula on elementary words: I(e_u) I(e_v) = sum_p I(e_{u' v'})
/// over the p for which the last p letters of u, reversed, equal the first
/// p letters of v.
inline std::vector<Word> elementary_product(const Word& u, const Word& v) {
  std::vector<Word> out;
  const std::size_t top = std::min(u.size(), v.size());
  for (std::size_t p = 0; p <= top; ++p) {
    bool match = true;
    for (std::size_t q = 0; q < p && match; ++q) match = u[u.size() - 1 - q] == v[q];
    if (!match) break;  // a mismatch at depth q rules out every deeper p
    Word w(u.begin(), u.end() - static_cast<long>(p));
    w.insert(w.end(), v.begin() + static_cast<long>(p), v.end());
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace wigner
