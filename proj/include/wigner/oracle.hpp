#pragma once

// Ground truth independent of the product formula: non-crossing pairings,
// the Wick recursion, Catalan numbers and a GUE matrix model.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "wigner/chaos.hpp"
#include "wigner/polynomial_eval.hpp"

namespace wigner {

/// Perfect matching of {0..2k-1}; pairs are stored with first < second.
struct PairPartition {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  bool crossing() const {
    for (const auto& [a, c] : pairs)
      for (const auto& [b, d] : pairs)
        if (a < b && b < c && c < d) return true;
    return false;
  }
  friend bool operator==(const PairPartition&, const PairPartition&) = default;
};

namespace detail {

inline void nc_pairings(std::size_t lo, std::size_t hi, std::vector<PairPartition>& out) {
  // Pairings of [lo, hi): lo pairs with some j, splitting into (lo, j) and (j, hi).
  if (lo == hi) {
    out.push_back({});
    return;
  }
  for (std::size_t j = lo + 1; j < hi; j += 2) {
    std::vector<PairPartition> inner, outer;
    nc_pairings(lo + 1, j, inner);
    nc_pairings(j + 1, hi, outer);
    for (const auto& a : inner)
      for (const auto& b : outer) {
        PairPartition p;
        p.pairs.emplace_back(lo, j);
        p.pairs.insert(p.pairs.end(), a.pairs.begin(), a.pairs.end());
        p.pairs.insert(p.pairs.end(), b.pairs.begin(), b.pairs.end());
        out.push_back(std::move(p));
      }
  }
}

inline void all_pairings(std::vector<std::size_t> rest, PairPartition current,
                         std::vector<PairPartition>& out) {
  if (rest.empty()) {
    out.push_back(std::move(current));
    return;
  }
  const std::size_t first = rest.front();
  for (std::size_t q = 1; q < rest.size(); ++q) {
    std::vector<std::size_t> next;
    for (std::size_t r = 1; r < rest.size(); ++r)
      if (r != q) next.push_back(rest[r]);
    PairPartition p = current;
    p.pairs.emplace_back(first, rest[q]);
    all_pairings(std::move(next), std::move(p), out);
  }
}

}  // namespace detail

/// All non-crossing pair partitions of {0..k-1}; empty for odd k.
inline std::vector<PairPartition> enumerate_nc_pairings(std::size_t k) {
  std::vector<PairPartition> out;
  if (k % 2 != 0) return out;
  detail::nc_pairings(0, k, out);
  return out;
}

/// Every perfect matching of {0..k-1}, crossing or not.
inline std::vector<PairPartition> enumerate_all_pairings(std::size_t k) {
  std::vector<PairPartition> out;
  if (k % 2 != 0) return out;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  detail::all_pairings(std::move(idx), {}, out);
  return out;
}

inline std::uint64_t catalan(std::size_t k) {
  std::vector<std::uint64_t> c(k + 1, 0);
  c[0] = 1;
  for (std::size_t n = 1; n <= k; ++n)
    for (std::size_t i = 0; i < n; ++i) c[n] += c[i] * c[n - 1 - i];
  return c[k];
}

/// Sum over non-crossing pairings of prod <h_i, h_j>.
inline cx wick_moment(std::span<const Kernel> word) {
  cx total{};
  for (const auto& p : enumerate_nc_pairings(word.size())) {
    cx term = 1.0;
    for (const auto& [i, j] : p.pairs) {
      term *= inner_product(word[i], word[j]);
      if (term == cx{}) break;
    }
    total += term;
  }
  return total;
}

/// tau(S(h_1)..S(h_n)) = sum_k <h_k, h_n> tau(h_1..h_{k-1}) tau(h_{k+1}..h_{n-1}),
/// peeling the last letter; memoized over contiguous ranges.
inline cx wick_recursive(std::span<const Kernel> word) {
  const std::size_t n = word.size();
  std::map<std::pair<std::size_t, std::size_t>, cx> memo;
  std::function<cx(std::size_t, std::size_t)> range = [&](std::size_t lo, std::size_t hi) -> cx {
    if (lo == hi) return 1.0;
    if ((hi - lo) % 2 != 0) return 0.0;
    auto key = std::make_pair(lo, hi);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    cx s{};
    const std::size_t last = hi - 1;
    for (std::size_t k = lo; k < last; ++k) {
      const cx pair = inner_product(word[k], word[last]);
      if (pair == cx{}) continue;
      s += pair * range(lo, k) * range(k + 1, last);
    }
    memo[key] = s;
    return s;
  };
  return range(0, n);
}

// ---------------------------------------------------------------------------
// GUE matrix model.

struct GueConfig {
  std::size_t dimension = 300;
  std::size_t samples = 200;
  std::uint64_t seed = 1;
};

using HermitianMatrix = Eigen::MatrixXcd;

/// Per-sample engine: (seed, sample index) fixes the stream.
inline std::mt19937_64 gue_engine(std::uint64_t seed, std::uint64_t sample) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(sample), static_cast<std::uint32_t>(sample >> 32)};
  return std::mt19937_64(seq);
}

/// One N x N GUE matrix normalized so that E tr_N(X^2) = 1.
inline HermitianMatrix gue_matrix(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const auto dim = static_cast<long>(n);
  Eigen::MatrixXcd g(dim, dim);
  for (long j = 0; j < dim; ++j)
    for (long i = 0; i < dim; ++i) g(i, j) = cx(normal(rng), normal(rng));
  HermitianMatrix h = (g + g.adjoint()) / std::sqrt(2.0 * static_cast<double>(n));
  // Enforce exact hermiticity against rounding.
  for (long i = 0; i < dim; ++i) h(i, i) = h(i, i).real();
  for (long j = 0; j < dim; ++j)
    for (long i = j + 1; i < dim; ++i) h(j, i) = std::conj(h(i, j));
  return h;
}

/// `count` independent GUE matrices for sample `sample`.
inline std::vector<HermitianMatrix> gue_sample_family(const GueConfig& cfg, std::size_t count,
                                                      std::uint64_t sample = 0) {
  if (cfg.dimension < 2 || cfg.samples < 1) throw PreconditionError("GUE needs N >= 2, M >= 1");
  auto rng = gue_engine(cfg.seed, sample);
  std::vector<HermitianMatrix> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(gue_matrix(rng, cfg.dimension));
  return out;
}

struct Estimate {
  double mean = 0;
  double std_error = 0;
};

namespace detail {

inline Estimate summarize(const std::vector<double>& xs) {
  Estimate e;
  const double m = static_cast<double>(xs.size());
  for (double x : xs) e.mean += x;
  e.mean /= m;
  if (xs.size() > 1) {
    double v = 0;
    for (double x : xs) v += (x - e.mean) * (x - e.mean);
    v /= (m - 1);
    e.std_error = std::sqrt(v / m);
  }
  return e;
}

inline std::size_t family_size(std::span<const Kernel> word) {
  long top = -1;
  for (const auto& h : word) top = std::max(top, h.max_index());
  return static_cast<std::size_t>(top + 1);
}

}  // namespace detail

/// Monte Carlo estimate of tau(S(h_1)...S(h_k)) by the normalized trace of
/// the matching product of GUE matrices X(h) = sum_i h_i X_i. The real part
/// is reported.
inline Estimate gue_trace(std::span<const Kernel> word, const GueConfig& cfg) {
  const std::size_t family = std::max<std::size_t>(detail::family_size(word), 1);
  std::vector<double> values;
  for (std::size_t s = 0; s < cfg.samples; ++s) {
    const auto xs = gue_sample_family(cfg, family, s);
    const auto n = static_cast<long>(cfg.dimension);
    Eigen::MatrixXcd prod = Eigen::MatrixXcd::Identity(n, n);
    for (const auto& h : word) {
      Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(n, n);
      for (const auto& [w, c] : h.entries()) x += c * xs[w[0]];
      prod = prod * x;
    }
    values.push_back((prod.trace() / static_cast<double>(n)).real());
  }
  return detail::summarize(values);
}

/// Monte Carlo estimate of the operator norm of F realized on GUE matrices
/// through the first-slot recursion.
inline Estimate gue_operator_norm(const ChaosExpansion& f, const GueConfig& cfg) {
  if (f.degree() > 5) throw PreconditionError("GUE operator-norm estimates support degree <= 5");
  long top = -1;
  for (const auto& [n, k] : f.components()) top = std::max(top, k.max_index());
  const std::size_t family = static_cast<std::size_t>(std::max(top + 1, 1L));
  std::vector<double> values;
  for (std::size_t s = 0; s < cfg.samples; ++s) {
    const auto xs = gue_sample_family(cfg, family, s);
    const auto n = static_cast<long>(cfg.dimension);
    RecursiveEvaluator<Eigen::MatrixXcd> eval(
        [&](BasisIndex i) -> const Eigen::MatrixXcd& { return xs.at(i); },
        Eigen::MatrixXcd::Identity(n, n));
    const Eigen::MatrixXcd m = eval.evaluate(f);
    const Eigen::MatrixXcd g = m.adjoint() * m;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
    values.push_back(std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0)));
  }
  return detail::summarize(values);
}

/// Operator-norm estimates for several functionals on shared samples. Each
/// sample realizes every elementary word once through
///   X(I(e_i v)) = X_i X(I(v)) - [v_1 = i] X(I(v_2..v_k))
/// and the functionals are linear combinations of those matrices.
inline std::vector<Estimate> gue_operator_norms(std::span<const ChaosExpansion> fs, const GueConfig& cfg) {
  long top = -1;
  for (const auto& f : fs) {
    if (f.degree() > 5) throw PreconditionError("GUE operator-norm estimates support degree <= 5");
    for (const auto& [n, k] : f.components()) top = std::max(top, k.max_index());
  }
  const std::size_t family = static_cast<std::size_t>(std::max(top + 1, 1L));
  const auto n = static_cast<long>(cfg.dimension);
  std::vector<std::vector<double>> values(fs.size());
  for (std::size_t s = 0; s < cfg.samples; ++s) {
    const auto xs = gue_sample_family(cfg, family, s);
    std::map<Word, Eigen::MatrixXcd> words;
    words.emplace(Word{}, Eigen::MatrixXcd::Identity(n, n));
    std::function<const Eigen::MatrixXcd&(const Word&)> word = [&](const Word& w) -> const Eigen::MatrixXcd& {
      if (auto it = words.find(w); it != words.end()) return it->second;
      const Word tail(w.begin() + 1, w.end());
      Eigen::MatrixXcd m = xs[w[0]] * word(tail);
      if (!tail.empty() && tail[0] == w[0]) m -= word(Word(tail.begin() + 1, tail.end()));
      return words.emplace(w, std::move(m)).first->second;
    };
    for (std::size_t q = 0; q < fs.size(); ++q) {
      Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
      for (const auto& [deg, k] : fs[q].components())
        for (const auto& [w, c] : k.entries()) m += c * word(w);
      const Eigen::MatrixXcd g = m.adjoint() * m;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
      values[q].push_back(std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0)));
    }
  }
  std::vector<Estimate> out;
  for (const auto& v : values) out.push_back(detail::summarize(v));
  return out;
}

}  // namespace wigner
