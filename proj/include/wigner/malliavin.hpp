#pragma once

// Free Malliavin calculus on finite chaos expansions: iterated gradients,
// pairings, Skorohod divergences, the Stroock and Clark-Ocone
// representations, and the variance identities built on them.
//
// A gradient of order p is stored by basis tuple (j_1..j_p): the component
// at that tuple is the coefficient of e_{j_1} (x) ... (x) e_{j_p} in the
// derivative variables, an element of chaos^{(x)(p+1)}.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <span>
#include <vector>

#include "wigner/chaos.hpp"
#include "wigner/multikernel.hpp"

namespace wigner {

class Gradient {
 public:
  using Components = std::map<Word, MultiKernel>;

  Gradient() : Gradient(1) {}
  explicit Gradient(std::size_t order) : order_(order) {
    if (order == 0) throw ArityError("gradient order must be at least 1");
  }

  std::size_t order() const { return order_; }
  const Components& components() const { return components_; }
  bool empty() const { return components_.empty(); }

  MultiKernel component(const Word& tuple) const {
    auto it = components_.find(tuple);
    return it == components_.end() ? MultiKernel(order_ + 1) : it->second;
  }

  void add(const Word& tuple, const MultiKernel& m, cx alpha = 1.0) {
    check_tuple(tuple);
    if (m.arity() != order_ + 1) throw ArityError("gradient component has wrong arity");
    auto [it, ins] = components_.try_emplace(tuple, order_ + 1);
    it->second += alpha * m;
    if (it->second.empty()) components_.erase(it);
  }

  void add_entry(const Word& tuple, const Degrees& d, const Word& w, cx c) {
    check_tuple(tuple);
    auto [it, ins] = components_.try_emplace(tuple, order_ + 1);
    it->second.add(d, w, c);
  }

  Gradient& prune(double eps = kDefaultPrune) {
    for (auto& [t, m] : components_) m.prune(eps);
    std::erase_if(components_, [](const auto& kv) { return kv.second.empty(); });
    return *this;
  }

  Gradient& operator+=(const Gradient& o) {
    if (o.order_ != order_) throw ArityError("adding gradients of different order");
    for (const auto& [t, m] : o.components_) add(t, m);
    return *this;
  }
  Gradient& operator-=(const Gradient& o) {
    if (o.order_ != order_) throw ArityError("subtracting gradients of different order");
    for (const auto& [t, m] : o.components_) add(t, m, -1.0);
    return *this;
  }
  Gradient& operator*=(cx alpha) {
    for (auto& [t, m] : components_) m *= alpha;
    return prune();
  }
  friend Gradient operator+(Gradient a, const Gradient& b) { return a += b; }
  friend Gradient operator-(Gradient a, const Gradient& b) { return a -= b; }
  friend Gradient operator*(cx alpha, Gradient a) { return a *= alpha; }

  /// <U, V> = sum over tuples of the multikernel inner products.
  friend cx inner_product(const Gradient& a, const Gradient& b) {
    cx s{};
    for (const auto& [t, m] : a.components_) {
      auto it = b.components_.find(t);
      if (it != b.components_.end()) s += inner_product(m, it->second);
    }
    return s;
  }

  friend double norm_squared(const Gradient& a) {
    double s = 0;
    for (const auto& [t, m] : a.components_) s += norm_squared(m);
    return s;
  }

  friend double max_abs_diff(const Gradient& a, const Gradient& b) {
    double m = 0;
    for (const auto& [t, x] : a.components_) m = std::max(m, max_abs_diff(x, b.component(t)));
    for (const auto& [t, x] : b.components_)
      if (!a.components_.contains(t)) m = std::max(m, max_abs_diff(MultiKernel(x.arity()), x));
    return m;
  }

  friend bool operator==(const Gradient&, const Gradient&) = default;

 private:
  void check_tuple(const Word& t) const {
    if (t.size() != order_) throw ArityError("gradient tuple length does not match order");
  }

  std::size_t order_;
  Components components_;
};

namespace detail {

/// Calls f(positions) for every increasing p-subset of {0..n-1}.
template <typename F>
void for_each_combination(std::size_t n, std::size_t p, F&& f) {
  if (p > n) return;
  std::vector<std::size_t> pos(p);
  std::iota(pos.begin(), pos.end(), 0);
  while (true) {
    f(std::as_const(pos));
    if (p == 0) return;
    std::size_t i = p;
    while (i > 0 && pos[i - 1] == n - p + (i - 1)) --i;
    if (i == 0) return;
    ++pos[i - 1];
    for (std::size_t j = i; j < p; ++j) pos[j] = pos[j - 1] + 1;
  }
}

inline double factorial(std::size_t n) {
  double r = 1;
  for (std::size_t i = 2; i <= n; ++i) r *= static_cast<double>(i);
  return r;
}

inline double falling_factorial(std::size_t n, std::size_t p) {
  if (p > n) return 0.0;
  double r = 1;
  for (std::size_t i = 0; i < p; ++i) r *= static_cast<double>(n - i);
  return r;
}

}  // namespace detail

/// nabla^p F, or D^p F = p! nabla^p F when symmetrized.
///
/// For every entry of f_n and every increasing slot selection i_1<...<i_p,
/// the selected letters form the tuple and the remaining letters are split
/// into p+1 legs of lengths (i_1-1, i_2-i_1-1, ..., n-i_p).
inline Gradient gradient(const ChaosExpansion& f, std::size_t p, bool symmetrized = false,
                         double prune = kDefaultPrune) {
  if (p == 0) throw ArityError("gradient of order 0 is the identity; pass the expansion itself");
  Gradient out(p);
  const cx scale = symmetrized ? detail::factorial(p) : 1.0;
  Word tuple(p);
  Degrees degrees(p + 1);
  for (const auto& [n, k] : f.components()) {
    if (n < p) continue;
    Word rest(n - p);
    for (const auto& [w, c] : k.entries()) {
      detail::for_each_combination(n, p, [&](const std::vector<std::size_t>& pos) {
        std::size_t prev = 0, r = 0;
        for (std::size_t q = 0; q < p; ++q) {
          tuple[q] = w[pos[q]];
          degrees[q] = pos[q] - prev;
          for (std::size_t i = prev; i < pos[q]; ++i) rest[r++] = w[i];
          prev = pos[q] + 1;
        }
        degrees[p] = n - prev;
        for (std::size_t i = prev; i < n; ++i) rest[r++] = w[i];
        out.add_entry(tuple, degrees, rest, scale * c);
      });
    }
  }
  return out.prune(prune);
}

/// <nabla^p F, h_1 (x) ... (x) h_p>: sum over tuples of
/// prod_q conj(h_q[j_q]) times the component.
inline MultiKernel pair_gradient(const Gradient& g, std::span<const Kernel> directions) {
  if (directions.size() != g.order())
    throw ArityError("pairing a gradient of order " + std::to_string(g.order()) + " with " +
                     std::to_string(directions.size()) + " directions");
  for (const auto& h : directions)
    if (h.order() != 1) throw ArityError("pairing directions must be order-1 kernels");
  MultiKernel out(g.order() + 1);
  for (const auto& [tuple, m] : g.components()) {
    cx weight = 1.0;
    for (std::size_t q = 0; q < tuple.size() && weight != cx{}; ++q)
      weight *= std::conj(directions[q].at(Word{tuple[q]}));
    if (weight != cx{}) out += weight * m;
  }
  return out;
}

/// Directional derivative nabla^h F.
inline MultiKernel directional_derivative(const ChaosExpansion& f, const Kernel& h) {
  const Kernel dirs[] = {h};
  return pair_gradient(gradient(f, 1), dirs);
}

/// tau^{(x)(n+1)}(nabla^n F), assembled into an order-n kernel. With the
/// symmetrized derivative the 1/n! normalization is applied.
inline Kernel stroock_kernel(const ChaosExpansion& f, std::size_t n, bool symmetrized = false) {
  if (n == 0) return f.component(0);
  Kernel out(n);
  const Gradient g = gradient(f, n, symmetrized);
  const double norm = symmetrized ? 1.0 / detail::factorial(n) : 1.0;
  for (const auto& [tuple, m] : g.components()) {
    const cx t = m.full_trace();
    if (t != cx{}) out.add(tuple, norm * t);
  }
  return out.prune();
}

/// sum_n I_n(stroock_kernel(F, n))
inline ChaosExpansion stroock_reconstruct(const ChaosExpansion& f, bool symmetrized = false) {
  ChaosExpansion out;
  for (std::size_t n = 0; n <= f.degree(); ++n) out.add(stroock_kernel(f, n, symmetrized));
  return out;
}

// ---------------------------------------------------------------------------
// Leg algebra on multikernels.

/// Multiplies leg `leg` of m by F, on the left (F * a) or on the right (a * F).
inline MultiKernel multiply_leg(const MultiKernel& m, std::size_t leg, const ChaosExpansion& f,
                                bool on_left, double prune = kDefaultPrune) {
  if (leg >= m.arity()) throw ArityError("leg index out of range");
  MultiKernel out(m.arity());
  m.for_each_entry([&](const Degrees& d, const Word& w, cx c) {
    auto parts = split_word(w, d);
    const Word u = parts[leg];
    Degrees nd = d;
    for (const auto& [n, k] : f.components())
      for (const auto& [v, cv] : k.entries()) {
        auto words = on_left ? elementary_product(v, u) : elementary_product(u, v);
        for (auto& x : words) {
          nd[leg] = x.size();
          parts[leg] = std::move(x);
          out.add(nd, join_words(parts), c * cv);
        }
      }
  });
  return out.prune(prune);
}

/// F . (a_1 (x) ... (x) a_k) = F a_1 (x) ... (x) a_k
inline MultiKernel left_act(const ChaosExpansion& f, const MultiKernel& m) {
  return multiply_leg(m, 0, f, true);
}

/// (a_1 (x) ... (x) a_k) . G = a_1 (x) ... (x) a_k G
inline MultiKernel right_act(const MultiKernel& m, const ChaosExpansion& g) {
  return multiply_leg(m, m.arity() - 1, g, false);
}

/// (id^{(x)(k-1)} (x) m_1 (x) id^{(x)(l-1)})(a (x) b): the last leg of a is
/// multiplied with the first leg of b.
inline MultiKernel merge_legs(const MultiKernel& a, const MultiKernel& b,
                              double prune = kDefaultPrune) {
  const std::size_t ka = a.arity();
  MultiKernel out(ka + b.arity() - 1);
  a.for_each_entry([&](const Degrees& da, const Word& wa, cx ca) {
    const auto pa = split_word(wa, da);
    b.for_each_entry([&](const Degrees& db, const Word& wb, cx cb) {
      const auto pb = split_word(wb, db);
      for (auto& mid : elementary_product(pa.back(), pb.front())) {
        std::vector<Word> parts(pa.begin(), pa.end() - 1);
        Degrees d(da.begin(), da.end() - 1);
        d.push_back(mid.size());
        parts.push_back(std::move(mid));
        for (std::size_t q = 1; q < pb.size(); ++q) {
          parts.push_back(pb[q]);
          d.push_back(db[q]);
        }
        out.add(d, join_words(parts), ca * cb);
      }
    });
  });
  return out.prune(prune);
}

/// m_1 applied to every adjacent leg pair: collapses a multikernel to a
/// chaos expansion by multiplying all legs left to right.
inline ChaosExpansion collapse_legs(const MultiKernel& m) {
  std::map<std::size_t, Kernel> acc;
  m.for_each_entry([&](const Degrees& d, const Word& w, cx c) {
    auto parts = split_word(w, d);
    std::vector<Word> current{parts[0]};
    for (std::size_t q = 1; q < parts.size(); ++q) {
      std::vector<Word> next;
      for (const auto& x : current)
        for (auto& y : elementary_product(x, parts[q])) next.push_back(std::move(y));
      current = std::move(next);
    }
    for (const auto& x : current) {
      auto [it, ins] = acc.try_emplace(x.size(), x.size());
      it->second.add(x, c);
    }
  });
  ChaosExpansion out;
  for (auto& [n, k] : acc) out.add(k);
  return out;
}

/// The chaos expansion carried by one leg when all other legs are traced
/// out: (tau^{(x)a} (x) id (x) tau^{(x)b}).
inline ChaosExpansion leg_marginal(const MultiKernel& m, std::size_t leg) {
  ChaosExpansion out;
  for (const auto& [d, k] : m.blocks()) {
    bool others_constant = true;
    for (std::size_t q = 0; q < d.size(); ++q)
      if (q != leg && d[q] != 0) others_constant = false;
    if (others_constant) out.add(k);
  }
  return out;
}

/// tau applied to leg `leg`, lowering the arity by one.
inline MultiKernel trace_leg(const MultiKernel& m, std::size_t leg) {
  if (m.arity() < 2) throw ArityError("cannot trace the only leg of a multikernel");
  MultiKernel out(m.arity() - 1);
  for (const auto& [d, k] : m.blocks()) {
    if (d[leg] != 0) continue;
    Degrees nd = d;
    nd.erase(nd.begin() + static_cast<long>(leg));
    out.add_block(nd, k);
  }
  return out;
}

/// nabla acting on leg `leg` of m, keyed by the new derivative index. The
/// leg splits into two legs at the differentiated slot.
inline std::map<BasisIndex, MultiKernel> differentiate_leg(const MultiKernel& m, std::size_t leg) {
  std::map<BasisIndex, MultiKernel> out;
  m.for_each_entry([&](const Degrees& d, const Word& w, cx c) {
    auto parts = split_word(w, d);
    const Word u = parts[leg];
    for (std::size_t pos = 0; pos < u.size(); ++pos) {
      std::vector<Word> np(parts.begin(), parts.begin() + static_cast<long>(leg));
      Degrees nd(d.begin(), d.begin() + static_cast<long>(leg));
      np.emplace_back(u.begin(), u.begin() + static_cast<long>(pos));
      np.emplace_back(u.begin() + static_cast<long>(pos) + 1, u.end());
      nd.push_back(pos);
      nd.push_back(u.size() - pos - 1);
      for (std::size_t q = leg + 1; q < parts.size(); ++q) {
        np.push_back(parts[q]);
        nd.push_back(d[q]);
      }
      auto [it, ins] = out.try_emplace(u[pos], m.arity() + 1);
      it->second.add(nd, join_words(np), c);
    }
  });
  for (auto& [j, x] : out) x.prune();
  std::erase_if(out, [](const auto& kv) { return kv.second.empty(); });
  return out;
}

/// Raises a gradient of order p to order p+1 by differentiating leg `leg`
/// of every component; the new index is appended (leg = p) or prepended
/// (leg = 0) to the tuple so that the result is comparable to nabla^{p+1}.
inline Gradient differentiate_gradient_leg(const Gradient& g, std::size_t leg) {
  Gradient out(g.order() + 1);
  for (const auto& [tuple, m] : g.components())
    for (const auto& [j, x] : differentiate_leg(m, leg)) {
      Word t = tuple;
      if (leg == 0)
        t.insert(t.begin(), j);
      else
        t.push_back(j);
      out.add(t, x);
    }
  return out;
}

/// P_t^{(x)(p+1)} applied leg-wise to every component.
inline Gradient apply_ou_legs(const Gradient& g, double t) {
  Gradient out(g.order());
  for (const auto& [tuple, m] : g.components()) {
    MultiKernel x(m.arity());
    for (const auto& [d, k] : m.blocks()) {
      const double total = static_cast<double>(std::accumulate(d.begin(), d.end(), 0UL));
      x.add_block(d, std::exp(-total * t) * k);
    }
    out.add(tuple, x);
  }
  return out;
}

/// (E_A (x) ... (x) E_A) applied leg-wise to every component.
inline Gradient conditional_expectation_legs(const Gradient& g, const std::set<BasisIndex>& subset) {
  Gradient out(g.order());
  for (const auto& [tuple, m] : g.components()) {
    MultiKernel x(m.arity());
    m.for_each_entry([&](const Degrees& d, const Word& w, cx c) {
      if (std::all_of(w.begin(), w.end(), [&](BasisIndex i) { return subset.contains(i); }))
        x.add(d, w, c);
    });
    x.prune();
    if (!x.empty()) out.add(tuple, x);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Divergences.

/// nabla^p on the truncated space spanned by basis words over d letters of
/// length p..D, assembled as an explicit sparse matrix. Rows are keyed by
/// (tuple, leg degrees, remaining letters); columns by words.
class GradientOperator {
 public:
  GradientOperator(std::size_t basis_size, std::size_t order, const Budget& budget = {})
      : basis_size_(basis_size), order_(order), budget_(budget) {
    if (order == 0) throw ArityError("gradient operator order must be at least 1");
    for (std::size_t n = order; n <= budget.max_degree; ++n) {
      Word w(n, 0);
      enumerate(w, 0);
    }
  }

  std::size_t basis_size() const { return basis_size_; }
  std::size_t order() const { return order_; }
  std::size_t columns() const { return columns_.size(); }
  std::size_t rows() const { return rows_.size(); }
  std::size_t nonzeros() const {
    std::size_t s = 0;
    for (const auto& [k, v] : rows_) s += v.size();
    return s;
  }

  /// Forward application through the assembled matrix.
  Gradient apply(const ChaosExpansion& f) const {
    std::map<RowKey, cx> acc;
    for (const auto& [key, entries] : rows_) {
      cx s{};
      for (const auto& [col, value] : entries) {
        const Word& w = columns_[col];
        s += value * f.component(w.size()).at(w);
      }
      if (s != cx{}) acc[key] = s;
    }
    Gradient out(order_);
    for (const auto& [key, c] : acc) out.add_entry(key.tuple, key.degrees, key.rest, c);
    return out.prune(budget_.prune);
  }

  /// Conjugate transpose applied to U.
  ChaosExpansion apply_adjoint(const Gradient& u) const {
    if (u.order() != order_) throw ArityError("divergence order does not match the operator");
    std::map<std::size_t, Kernel> acc;
    for (const auto& [tuple, m] : u.components()) {
      m.for_each_entry([&](const Degrees& d, const Word& rest, cx c) {
        RowKey key{tuple, d, rest};
        auto it = rows_.find(key);
        if (it == rows_.end()) {
          const std::size_t deg = rest.size() + order_;
          if (deg > budget_.max_degree)
            throw TruncationError("divergence produces degree " + std::to_string(deg) +
                                  " beyond max_degree " + std::to_string(budget_.max_degree));
          throw DomainError("biprocess entry uses basis indices outside the operator's basis");
        }
        for (const auto& [col, value] : it->second) {
          const Word& w = columns_[col];
          auto [kit, ins] = acc.try_emplace(w.size(), w.size());
          kit->second.add(w, std::conj(value) * c);
        }
      });
    }
    ChaosExpansion out;
    for (auto& [n, k] : acc) out.add(k, 1.0, budget_.prune);
    return out;
  }

 private:
  struct RowKey {
    Word tuple;
    Degrees degrees;
    Word rest;
    auto operator<=>(const RowKey&) const = default;
  };

  void enumerate(Word& w, std::size_t slot) {
    if (slot == w.size()) {
      add_column(w);
      return;
    }
    for (BasisIndex i = 0; i < basis_size_; ++i) {
      w[slot] = i;
      enumerate(w, slot + 1);
    }
  }

  void add_column(const Word& w) {
    const std::size_t col = columns_.size();
    columns_.push_back(w);
    const Gradient g = gradient(ChaosExpansion::integral(Kernel::elementary(w)), order_);
    for (const auto& [tuple, m] : g.components())
      m.for_each_entry([&](const Degrees& d, const Word& rest, cx c) {
        rows_[RowKey{tuple, d, rest}].emplace_back(col, c);
      });
  }

  std::size_t basis_size_;
  std::size_t order_;
  Budget budget_;
  std::vector<Word> columns_;
  std::map<RowKey, std::vector<std::pair<std::size_t, cx>>> rows_;
};

/// delta^p(U): the adjoint of nabla^p on the truncated space.
inline ChaosExpansion divergence_adjoint(const Gradient& u, const GradientOperator& op) {
  return op.apply_adjoint(u);
}

inline ChaosExpansion divergence_adjoint(const Gradient& u, std::size_t basis_size,
                                         const Budget& budget = {}) {
  return GradientOperator(basis_size, u.order(), budget).apply_adjoint(u);
}

/// delta^p(f . 1^{(x)(p+1)}) = I_p(f)
inline ChaosExpansion divergence_deterministic(const Kernel& f) {
  return ChaosExpansion::integral(f);
}

/// The constant multiprocess f . 1^{(x)(p+1)}.
inline Gradient deterministic_multiprocess(const Kernel& f) {
  Gradient u(f.order());
  for (const auto& [w, c] : f.entries()) u.add_entry(w, Degrees(f.order() + 1, 0), Word{}, c);
  return u;
}

/// The biprocess (A (x) B) . h.
inline Gradient elementary_biprocess(const ChaosExpansion& a, const ChaosExpansion& b,
                                     const Kernel& h) {
  if (h.order() != 1) throw ArityError("biprocess direction must be an order-1 kernel");
  MultiKernel ab(2);
  for (const auto& [n, ka] : a.components())
    for (const auto& [m, kb] : b.components())
      for (const auto& [wa, ca] : ka.entries())
        for (const auto& [wb, cb] : kb.entries()) {
          Word w = wa;
          w.insert(w.end(), wb.begin(), wb.end());
          ab.add(Degrees{n, m}, w, ca * cb);
        }
  ab.prune();
  Gradient u(1);
  for (const auto& [w, c] : h.entries()) u.add(w, ab, c);
  return u;
}

/// Voiculescu formula:
///   delta((A (x) B) h) = A S(h) B - m_1 (id (x) tau (x) id) <(nabla (x) id + id (x) nabla)(A (x) B), h>
/// The correction reduces to sum_j h_j [ (id (x) tau)(nabla_j A) B + A (tau (x) id)(nabla_j B) ].
inline ChaosExpansion divergence_elementary(const ChaosExpansion& a, const ChaosExpansion& b,
                                            const Kernel& h, const Budget& budget = {}) {
  if (!is_real_vector(h)) throw PreconditionError("divergence_elementary needs a real direction");
  ChaosExpansion out = multiply(multiply(a, ChaosExpansion::field(h), budget), b, budget);
  const MultiKernel da = directional_derivative(a, h);
  const MultiKernel db = directional_derivative(b, h);
  out -= multiply(leg_marginal(da, 0), b, budget);
  out -= multiply(a, leg_marginal(db, 1), budget);
  return out;
}

// ---------------------------------------------------------------------------
// Adapted biprocesses and the Clark-Ocone representation on time blocks.

/// Order-1 gradient whose component at block j only uses indices < j.
class AdaptedBiprocess {
 public:
  AdaptedBiprocess() = default;
  explicit AdaptedBiprocess(Gradient g) : g_(std::move(g)) {
    if (g_.order() != 1) throw ArityError("adapted biprocesses are order-1 gradients");
    for (const auto& [tuple, m] : g_.components())
      m.for_each_entry([&](const Degrees&, const Word& w, cx) {
        for (auto i : w)
          if (i >= tuple[0])
            throw PreconditionError("biprocess component at block " + std::to_string(tuple[0]) +
                                    " uses index " + std::to_string(i));
      });
  }
  const Gradient& gradient() const { return g_; }

 private:
  Gradient g_{1};
};

/// Gamma: keeps, at block j, the entries whose every index is < j.
inline AdaptedBiprocess adapted_projection(const Gradient& g) {
  if (g.order() != 1) throw ArityError("adapted projection acts on order-1 gradients");
  Gradient out(1);
  for (const auto& [tuple, m] : g.components()) {
    const BasisIndex j = tuple[0];
    MultiKernel x(2);
    m.for_each_entry([&](const Degrees& d, const Word& w, cx c) {
      if (std::all_of(w.begin(), w.end(), [j](BasisIndex i) { return i < j; })) x.add(d, w, c);
    });
    x.prune();
    if (!x.empty()) out.add(tuple, x);
  }
  return AdaptedBiprocess(std::move(out));
}

/// Ito integral of an adapted biprocess on blocks: each a (x) b at block j
/// becomes the kernel a e_j b.
inline ChaosExpansion ito_integral(const AdaptedBiprocess& u) {
  std::map<std::size_t, Kernel> acc;
  for (const auto& [tuple, m] : u.gradient().components())
    m.for_each_entry([&](const Degrees& d, const Word& w, cx c) {
      Word x(w.begin(), w.begin() + static_cast<long>(d[0]));
      x.push_back(tuple[0]);
      x.insert(x.end(), w.begin() + static_cast<long>(d[0]), w.end());
      auto [it, ins] = acc.try_emplace(x.size(), x.size());
      it->second.add(x, c);
    });
  ChaosExpansion out;
  for (auto& [n, k] : acc) out.add(k);
  return out;
}

inline bool has_increasing_support(const ChaosExpansion& f) {
  for (const auto& [n, k] : f.components())
    for (const auto& [w, c] : k.entries())
      for (std::size_t i = 1; i < w.size(); ++i)
        if (!(w[i - 1] < w[i])) return false;
  return true;
}

struct ClarkOcone {
  cx mean;
  AdaptedBiprocess integrand;
};

/// F = tau(F) + delta(Gamma nabla F) on functionals with strictly
/// increasing block support.
inline ClarkOcone clark_ocone(const ChaosExpansion& f) {
  if (!has_increasing_support(f))
    throw PreconditionError("Clark-Ocone needs kernels supported on strictly increasing tuples");
  return {trace(f), adapted_projection(gradient(f, 1))};
}

// ---------------------------------------------------------------------------
// Heisenberg commutation.

/// delta_s(nabla_t U_s) as an order-1 gradient in t, where nabla_t acts on
/// both legs of U_s and delta_s re-inserts e_s at the gap it came from.
inline Gradient skorohod_of_derivative(const Gradient& u) {
  if (u.order() != 1) throw ArityError("expected an order-1 biprocess");
  Gradient out(1);
  for (const auto& [tuple, m] : u.components()) {
    const BasisIndex s = tuple[0];
    for (std::size_t leg = 0; leg < 2; ++leg)
      for (const auto& [t, x] : differentiate_leg(m, leg)) {
        // x has three legs; e_s sits between legs 1|2 (leg 0 split) or 0|1.
        const std::size_t gap = leg == 0 ? 1 : 0;
        MultiKernel merged(2);
        x.for_each_entry([&](const Degrees& d, const Word& w, cx c) {
          auto parts = split_word(w, d);
          Word mid = parts[gap];
          mid.push_back(s);
          mid.insert(mid.end(), parts[gap + 1].begin(), parts[gap + 1].end());
          std::vector<Word> np;
          for (std::size_t q = 0; q < 3; ++q) {
            if (q == gap) np.push_back(mid);
            else if (q != gap + 1) np.push_back(parts[q]);
          }
          merged.add(Degrees{np[0].size(), np[1].size()}, join_words(np), c);
        });
        out.add(Word{t}, merged.prune());
      }
  }
  return out.prune();
}

// ---------------------------------------------------------------------------
// Variance identities.

/// cov(F, G) = int_0^inf e^{-t} <P_t^{(x)2} nabla F, nabla G*> dt. A block of
/// total leg degree k decays as e^{-(k+1)t}, so it contributes 1/(k+1).
inline cx covariance_ou(const ChaosExpansion& f, const ChaosExpansion& g) {
  const Gradient df = gradient(f, 1);
  const Gradient dg = gradient(adjoint_functional(g), 1);
  cx s{};
  for (const auto& [tuple, m] : df.components()) {
    const MultiKernel other = dg.component(tuple);
    for (const auto& [d, k] : m.blocks()) {
      const double weight = 1.0 / static_cast<double>(d[0] + d[1] + 1);
      s += weight * inner_product(k, other.block(d));
    }
  }
  return s;
}

/// var(F) = sum_{n>=1} || tau^{(x)(n+1)}(nabla^n F) ||^2
inline double variance_stroock(const ChaosExpansion& f) {
  double s = 0;
  for (std::size_t n = 1; n <= f.degree(); ++n) s += norm_squared(stroock_kernel(f, n));
  return s;
}

/// Generalized Cebron formula:
///   tau(AB) = tau( int (id (x) tau^p)(nabla^p_{t_p..t_1} A) (tau^p (x) id)(nabla^p_{t_1..t_p} B) dt )
/// Requires every nonzero chaos component of A and B to have degree >= p.
inline cx cebron_product(const ChaosExpansion& a, const ChaosExpansion& b, std::size_t p) {
  if (p == 0) throw PreconditionError("Cebron formula needs p >= 1");
  for (const auto* x : {&a, &b})
    if (!x->empty() && x->min_degree() < p)
      throw PreconditionError("Cebron formula needs both factors in chaoses of degree >= p");
  const Gradient ga = gradient(a, p);
  const Gradient gb = gradient(b, p);
  cx s{};
  for (const auto& [tuple, mb] : gb.components()) {
    const Word reversed(tuple.rbegin(), tuple.rend());
    auto it = ga.components().find(reversed);
    if (it == ga.components().end()) continue;
    const ChaosExpansion left = leg_marginal(it->second, 0);
    const ChaosExpansion right = leg_marginal(mb, p);
    s += trace_product(left, right);
  }
  return s;
}

/// ||nabla^k F||^2 summed over components; with `symmetrized` the norm of
/// D^k F = k! nabla^k F on symmetrized multiprocesses, which carries a 1/k!
/// weight, i.e. k! ||nabla^k F||^2.
inline double sobolev_seminorm(const ChaosExpansion& f, std::size_t k, bool symmetrized = false) {
  const Gradient g = gradient(f, k, symmetrized);
  const double s = norm_squared(g);
  return symmetrized ? s / detail::factorial(k) : s;
}

/// sum_n n(n-1)...(n-k+1) ||f_n||^2
inline double sobolev_closed_form(const ChaosExpansion& f, std::size_t k) {
  double s = 0;
  for (const auto& [n, kern] : f.components()) s += detail::falling_factorial(n, k) * norm_squared(kern);
  return s;
}

}  // namespace wigner
