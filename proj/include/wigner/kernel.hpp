#pragma once

// Sparse kernels f in L^2(R_+^n), stored as coefficients on the orthonormal
// tensor basis e_{i_1} (x) ... (x) e_{i_n}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "wigner/config.hpp"

namespace wigner {

class Kernel {
 public:
  using Entries = std::map<Word, cx>;

  Kernel() : Kernel(0) {}
  explicit Kernel(std::size_t order) : order_(order) {}

  static Kernel scalar(cx value, double prune = kDefaultPrune) {
    Kernel k(0);
    k.add(Word{}, value);
    k.prune(prune);
    return k;
  }

  /// c * e_{w_1} (x) ... (x) e_{w_n}
  static Kernel elementary(const Word& w, cx coeff = 1.0) {
    Kernel k(w.size());
    k.add(w, coeff);
    return k;
  }

  static Kernel basis(BasisIndex i, cx coeff = 1.0) { return elementary(Word{i}, coeff); }

  /// Order-1 kernel from a dense coefficient vector.
  static Kernel vector(std::span<const double> coeffs) {
    Kernel k(1);
    for (std::size_t i = 0; i < coeffs.size(); ++i)
      if (coeffs[i] != 0.0) k.add(Word{static_cast<BasisIndex>(i)}, coeffs[i]);
    return k;
  }

  std::size_t order() const { return order_; }
  const Entries& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  cx at(const Word& w) const {
    auto it = entries_.find(w);
    return it == entries_.end() ? cx{} : it->second;
  }

  /// Accumulates c into the coefficient at w. Does not prune.
  void add(const Word& w, cx c) {
    if (w.size() != order_)
      throw ArityError("kernel entry " + to_string(w) + " does not match order " +
                       std::to_string(order_));
    entries_[w] += c;
  }

  void set(const Word& w, cx c) {
    if (w.size() != order_)
      throw ArityError("kernel entry " + to_string(w) + " does not match order " +
                       std::to_string(order_));
    entries_[w] = c;
  }

  Kernel& prune(double eps = kDefaultPrune) {
    std::erase_if(entries_, [eps](const auto& kv) { return std::abs(kv.second) < eps; });
    return *this;
  }

  Kernel& operator+=(const Kernel& other) {
    if (other.order_ != order_) throw ArityError("adding kernels of different order");
    for (const auto& [w, c] : other.entries_) entries_[w] += c;
    return prune();
  }

  Kernel& operator-=(const Kernel& other) {
    if (other.order_ != order_) throw ArityError("subtracting kernels of different order");
    for (const auto& [w, c] : other.entries_) entries_[w] -= c;
    return prune();
  }

  Kernel& operator*=(cx alpha) {
    for (auto& [w, c] : entries_) c *= alpha;
    return prune();
  }

  friend Kernel operator+(Kernel a, const Kernel& b) { return a += b; }
  friend Kernel operator-(Kernel a, const Kernel& b) { return a -= b; }
  friend Kernel operator*(cx alpha, Kernel a) { return a *= alpha; }

  /// Largest index appearing in any slot, or -1 for no entries / order 0.
  long max_index() const {
    long m = -1;
    for (const auto& [w, c] : entries_)
      for (auto i : w) m = std::max<long>(m, i);
    return m;
  }

  /// Entrywise maximum absolute difference.
  friend double max_abs_diff(const Kernel& a, const Kernel& b) {
    if (a.order_ != b.order_) {
      double m = 0;
      for (const auto& [w, c] : a.entries_) m = std::max(m, std::abs(c));
      for (const auto& [w, c] : b.entries_) m = std::max(m, std::abs(c));
      return a.empty() && b.empty() ? 0.0 : std::max(m, 1.0);
    }
    double m = 0;
    auto ia = a.entries_.begin();
    auto ib = b.entries_.begin();
    while (ia != a.entries_.end() || ib != b.entries_.end()) {
      if (ib == b.entries_.end() || (ia != a.entries_.end() && ia->first < ib->first)) {
        m = std::max(m, std::abs(ia->second));
        ++ia;
      } else if (ia == a.entries_.end() || ib->first < ia->first) {
        m = std::max(m, std::abs(ib->second));
        ++ib;
      } else {
        m = std::max(m, std::abs(ia->second - ib->second));
        ++ia;
        ++ib;
      }
    }
    return m;
  }

  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  std::size_t order_;
  Entries entries_;
};

/// f*(t_1..t_n) = conj f(t_n..t_1)
inline Kernel adjoint(const Kernel& f) {
  Kernel out(f.order());
  for (const auto& [w, c] : f.entries()) {
    Word r(w.rbegin(), w.rend());
    out.set(r, std::conj(c));
  }
  return out;
}

inline Kernel tensor_product(const Kernel& f, const Kernel& g, const Budget& budget = {}) {
  const std::size_t order = f.order() + g.order();
  if (order > budget.max_degree)
    throw TruncationError("tensor product of order " + std::to_string(order) +
                          " exceeds max_degree " + std::to_string(budget.max_degree));
  Kernel out(order);
  Word w(order);
  for (const auto& [a, ca] : f.entries()) {
    std::copy(a.begin(), a.end(), w.begin());
    for (const auto& [b, cb] : g.entries()) {
      std::copy(b.begin(), b.end(), w.begin() + static_cast<long>(a.size()));
      out.add(w, ca * cb);
    }
  }
  return out.prune(budget.prune);
}

/// Nested contraction of order p: the last p slots of f, read backwards,
/// are paired with the first p slots of g. No conjugation is applied.
inline Kernel contract(const Kernel& f, const Kernel& g, std::size_t p,
                       double prune = kDefaultPrune) {
  if (p > std::min(f.order(), g.order()))
    throw ArityError("contraction of order " + std::to_string(p) + " between kernels of order " +
                     std::to_string(f.order()) + " and " + std::to_string(g.order()));
  const std::size_t keep_f = f.order() - p;
  const std::size_t keep_g = g.order() - p;

  // Bucket g by its first p slots.
  std::map<Word, std::vector<std::pair<const Word*, cx>>> buckets;
  for (const auto& [w, c] : g.entries()) {
    Word head(w.begin(), w.begin() + static_cast<long>(p));
    buckets[std::move(head)].emplace_back(&w, c);
  }

  Kernel out(keep_f + keep_g);
  Word key(p);
  Word w(keep_f + keep_g);
  for (const auto& [a, ca] : f.entries()) {
    std::reverse_copy(a.begin() + static_cast<long>(keep_f), a.end(), key.begin());
    auto it = buckets.find(key);
    if (it == buckets.end()) continue;
    std::copy(a.begin(), a.begin() + static_cast<long>(keep_f), w.begin());
    for (const auto& [b, cb] : it->second) {
      std::copy(b->begin() + static_cast<long>(p), b->end(),
                w.begin() + static_cast<long>(keep_f));
      out.add(w, ca * cb);
    }
  }
  return out.prune(prune);
}

/// <f, g> = sum f[w] conj(g[w]); zero across different orders.
inline cx inner_product(const Kernel& f, const Kernel& g) {
  if (f.order() != g.order()) return {};
  cx s{};
  const auto& small = f.size() <= g.size() ? f : g;
  const auto& large = f.size() <= g.size() ? g : f;
  for (const auto& [w, c] : small.entries()) {
    auto it = large.entries().find(w);
    if (it == large.entries().end()) continue;
    s += (&small == &f) ? c * std::conj(it->second) : it->second * std::conj(c);
  }
  return s;
}

inline double norm_squared(const Kernel& f) {
  double s = 0;
  for (const auto& [w, c] : f.entries()) s += std::norm(c);
  return s;
}

inline double norm(const Kernel& f) { return std::sqrt(norm_squared(f)); }

/// h^{(x) n}
inline Kernel tensor_power(const Kernel& h, std::size_t n, const Budget& budget = {}) {
  Kernel out = Kernel::scalar(1.0);
  for (std::size_t i = 0; i < n; ++i) out = tensor_product(out, h, budget);
  return out;
}

inline bool is_real_vector(const Kernel& h) {
  if (h.order() != 1) return false;
  return std::all_of(h.entries().begin(), h.entries().end(),
                     [](const auto& kv) { return kv.second.imag() == 0.0; });
}

}  // namespace wigner
