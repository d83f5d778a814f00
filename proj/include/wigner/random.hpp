#pragma once

// Seeded random instances: sparse kernels with density 0.3 and
// coefficients uniform on the complex unit disk.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "wigner/chaos.hpp"

namespace wigner {

class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : rng_(seed) {}

  std::mt19937_64& engine() { return rng_; }

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }

  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  /// Uniform on the closed complex unit disk.
  cx disk() {
    const double r = std::sqrt(uniform());
    const double theta = uniform(0.0, 2.0 * std::numbers::pi);
    return std::polar(r, theta);
  }

  /// Sparse kernel over {0..basis-1}^order; never empty.
  Kernel kernel(std::size_t order, std::size_t basis, double density = 0.3) {
    Kernel k(order);
    Word w(order, 0);
    fill(k, w, 0, basis, density);
    if (k.empty()) {
      for (auto& x : w) x = static_cast<BasisIndex>(index(basis));
      k.add(w, nonzero_disk());
    }
    return k;
  }

  /// Kernel supported on strictly increasing tuples.
  Kernel increasing_kernel(std::size_t order, std::size_t basis, double density = 0.3) {
    Kernel k(order);
    std::vector<Word> words;
    Word w;
    increasing(words, w, 0, order, basis);
    for (const auto& x : words)
      if (uniform() < density) k.add(x, nonzero_disk());
    if (k.empty() && !words.empty()) k.add(words[index(words.size())], nonzero_disk());
    return k;
  }

  /// Real order-1 kernel with entries uniform on [-1, 1].
  Kernel real_vector(std::size_t basis) {
    std::vector<double> c(basis);
    for (auto& x : c) x = uniform(-1.0, 1.0);
    return Kernel::vector(c);
  }

  Kernel unit_vector(std::size_t basis) {
    Kernel h = real_vector(basis);
    return (1.0 / norm(h)) * h;
  }

  /// Expansion with one random kernel for each degree in [lo, hi].
  ChaosExpansion chaos(std::size_t lo, std::size_t hi, std::size_t basis, double density = 0.3) {
    ChaosExpansion f;
    for (std::size_t n = lo; n <= hi; ++n) f.add(kernel(n, basis, density));
    return f;
  }

  ChaosExpansion increasing_chaos(std::size_t hi, std::size_t basis) {
    ChaosExpansion f;
    for (std::size_t n = 0; n <= std::min(hi, basis); ++n) f.add(increasing_kernel(n, basis));
    return f;
  }

  /// Word of random basis vectors.
  std::vector<Kernel> basis_word(std::size_t length, std::size_t basis) {
    std::vector<Kernel> w;
    for (std::size_t i = 0; i < length; ++i) w.push_back(Kernel::basis(static_cast<BasisIndex>(index(basis))));
    return w;
  }

  /// Word of random real directions.
  std::vector<Kernel> real_word(std::size_t length, std::size_t basis) {
    std::vector<Kernel> w;
    for (std::size_t i = 0; i < length; ++i) w.push_back(real_vector(basis));
    return w;
  }

 private:
  cx nonzero_disk() {
    cx c = disk();
    while (std::abs(c) < 1e-3) c = disk();
    return c;
  }

  void fill(Kernel& k, Word& w, std::size_t slot, std::size_t basis, double density) {
    if (slot == w.size()) {
      if (uniform() < density) k.add(w, nonzero_disk());
      return;
    }
    for (std::size_t i = 0; i < basis; ++i) {
      w[slot] = static_cast<BasisIndex>(i);
      fill(k, w, slot + 1, basis, density);
    }
  }

  void increasing(std::vector<Word>& out, Word& w, std::size_t start, std::size_t order,
                  std::size_t basis) {
    if (w.size() == order) {
      out.push_back(w);
      return;
    }
    for (std::size_t i = start; i < basis; ++i) {
      w.push_back(static_cast<BasisIndex>(i));
      increasing(out, w, i + 1, order, basis);
      w.pop_back();
    }
  }

  std::mt19937_64 rng_;
};

}  // namespace wigner
