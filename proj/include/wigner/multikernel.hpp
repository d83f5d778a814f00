#pragma once

// Elements of H_{n_1} (x) ... (x) H_{n_k}, stored block-wise by degree
// vector. A block with degrees (n_1..n_k) holds one kernel of order
// n_1+...+n_k whose slots are read left to right across the legs.

#include <functional>
#include <map>
#include <numeric>
#include <vector>

#include "wigner/kernel.hpp"

namespace wigner {

using Degrees = std::vector<std::size_t>;

/// Cuts a word into consecutive pieces of the given lengths.
inline std::vector<Word> split_word(const Word& w, const Degrees& degrees) {
  std::vector<Word> parts;
  parts.reserve(degrees.size());
  auto it = w.begin();
  for (auto d : degrees) {
    parts.emplace_back(it, it + static_cast<long>(d));
    it += static_cast<long>(d);
  }
  return parts;
}

inline Word join_words(const std::vector<Word>& parts) {
  Word w;
  for (const auto& p : parts) w.insert(w.end(), p.begin(), p.end());
  return w;
}

class MultiKernel {
 public:
  using Blocks = std::map<Degrees, Kernel>;

  MultiKernel() : MultiKernel(1) {}
  explicit MultiKernel(std::size_t arity) : arity_(arity) {
    if (arity == 0) throw ArityError("multikernel arity must be at least 1");
  }

  /// c * 1 (x) ... (x) 1
  static MultiKernel constant(std::size_t arity, cx c = 1.0) {
    MultiKernel m(arity);
    m.add(Degrees(arity, 0), Word{}, c);
    return m.prune();
  }

  std::size_t arity() const { return arity_; }
  const Blocks& blocks() const { return blocks_; }
  bool empty() const { return blocks_.empty(); }

  void add(const Degrees& degrees, const Word& w, cx c) {
    check_degrees(degrees);
    auto [it, inserted] = blocks_.try_emplace(degrees, total(degrees));
    it->second.add(w, c);
  }

  void add_block(const Degrees& degrees, const Kernel& k) {
    check_degrees(degrees);
    if (k.order() != total(degrees)) throw ArityError("block kernel order mismatch");
    auto [it, inserted] = blocks_.try_emplace(degrees, total(degrees));
    for (const auto& [w, c] : k.entries()) it->second.add(w, c);
  }

  /// Kernel of the block with these degrees, or an empty kernel.
  Kernel block(const Degrees& degrees) const {
    auto it = blocks_.find(degrees);
    return it == blocks_.end() ? Kernel(total(degrees)) : it->second;
  }

  /// Applies f(degrees, word, coefficient) to every stored entry.
  void for_each_entry(const std::function<void(const Degrees&, const Word&, cx)>& f) const {
    for (const auto& [d, k] : blocks_)
      for (const auto& [w, c] : k.entries()) f(d, w, c);
  }

  MultiKernel& prune(double eps = kDefaultPrune) {
    for (auto& [d, k] : blocks_) k.prune(eps);
    std::erase_if(blocks_, [](const auto& kv) { return kv.second.empty(); });
    return *this;
  }

  MultiKernel& operator+=(const MultiKernel& o) {
    if (o.arity_ != arity_) throw ArityError("adding multikernels of different arity");
    for (const auto& [d, k] : o.blocks_) add_block(d, k);
    return prune();
  }
  MultiKernel& operator-=(const MultiKernel& o) { return *this += (-1.0) * o; }
  MultiKernel& operator*=(cx alpha) {
    for (auto& [d, k] : blocks_) k *= alpha;
    return prune();
  }
  friend MultiKernel operator+(MultiKernel a, const MultiKernel& b) { return a += b; }
  friend MultiKernel operator-(MultiKernel a, const MultiKernel& b) { return a -= b; }
  friend MultiKernel operator*(cx alpha, MultiKernel a) { return a *= alpha; }

  /// tau^{(x) k}: the coefficient of the all-constant block.
  cx full_trace() const {
    auto it = blocks_.find(Degrees(arity_, 0));
    return it == blocks_.end() ? cx{} : it->second.at(Word{});
  }

  friend cx inner_product(const MultiKernel& a, const MultiKernel& b) {
    cx s{};
    for (const auto& [d, k] : a.blocks_) {
      auto it = b.blocks_.find(d);
      if (it != b.blocks_.end()) s += inner_product(k, it->second);
    }
    return s;
  }

  friend double norm_squared(const MultiKernel& a) {
    double s = 0;
    for (const auto& [d, k] : a.blocks_) s += norm_squared(k);
    return s;
  }

  friend double max_abs_diff(const MultiKernel& a, const MultiKernel& b) {
    double m = 0;
    for (const auto& [d, k] : a.blocks_) m = std::max(m, max_abs_diff(k, b.block(d)));
    for (const auto& [d, k] : b.blocks_)
      if (!a.blocks_.contains(d)) m = std::max(m, max_abs_diff(Kernel(k.order()), k));
    return m;
  }

  friend bool operator==(const MultiKernel&, const MultiKernel&) = default;

 private:
  static std::size_t total(const Degrees& d) { return std::accumulate(d.begin(), d.end(), 0UL); }
  void check_degrees(const Degrees& d) const {
    if (d.size() != arity_)
      throw ArityError("degree vector of length " + std::to_string(d.size()) +
                       " in multikernel of arity " + std::to_string(arity_));
  }

  std::size_t arity_;
  Blocks blocks_;
};

/// (A_1 (x) ... (x) A_k)* = A_1* (x) ... (x) A_k*
inline MultiKernel adjoint(const MultiKernel& m) {
  MultiKernel out(m.arity());
  m.for_each_entry([&](const Degrees& d, const Word& w, cx c) {
    auto parts = split_word(w, d);
    for (auto& p : parts) std::reverse(p.begin(), p.end());
    out.add(d, join_words(parts), std::conj(c));
  });
  return out.prune();
}

}  // namespace wigner
