#pragma once

// Length-truncated full Fock space over C^d. Words of length 0..L over the
// alphabet {0..d-1} form the orthonormal basis; the empty word is the
// vacuum. Operators are sparse matrices on that basis.
//
// Two routes from chaos expansions to operators are provided:
//   chaos_to_operator  - first-slot recursion through S(e_i); exact on input
//                        words of length <= L - deg(F).
//   compress_chaos     - normal-ordered ladder expansion; the exact
//                        compression P_L X P_L on every column.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "wigner/chaos.hpp"
#include "wigner/malliavin.hpp"
#include "wigner/polynomial_eval.hpp"

namespace wigner {

using SparseMatrix = Eigen::SparseMatrix<cx, Eigen::ColMajor>;
using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;

class FockSpace {
 public:
  FockSpace(std::size_t basis_size, std::size_t level) : d_(basis_size), level_(level) {
    if (basis_size == 0) throw PreconditionError("Fock space needs a nonempty basis");
    offsets_.push_back(0);
    std::size_t pow = 1;
    for (std::size_t k = 0; k <= level; ++k) {
      offsets_.push_back(offsets_.back() + pow);
      pow *= d_;
    }
  }

  std::size_t basis_size() const { return d_; }
  std::size_t level() const { return level_; }
  std::size_t dimension() const { return offsets_.back(); }

  std::size_t index(const Word& w) const {
    if (w.size() > level_) throw TruncationError("word longer than the Fock truncation level");
    std::size_t i = 0;
    for (auto letter : w) {
      if (letter >= d_) throw DomainError("letter " + std::to_string(letter) + " outside basis");
      i = i * d_ + letter;
    }
    return offsets_[w.size()] + i;
  }

  Word word(std::size_t index) const {
    std::size_t len = 0;
    while (offsets_[len + 1] <= index) ++len;
    std::size_t r = index - offsets_[len];
    Word w(len);
    for (std::size_t q = len; q-- > 0;) {
      w[q] = static_cast<BasisIndex>(r % d_);
      r /= d_;
    }
    return w;
  }

  std::size_t length_of(std::size_t index) const {
    std::size_t len = 0;
    while (offsets_[len + 1] <= index) ++len;
    return len;
  }

  friend bool operator==(const FockSpace&, const FockSpace&) = default;

 private:
  std::size_t d_;
  std::size_t level_;
  std::vector<std::size_t> offsets_;
};

/// Sparse vector in the word basis.
using FockVector = std::map<Word, cx>;

struct FockOperator {
  FockSpace space;
  SparseMatrix matrix;
  /// Largest chaos degree the operator moves word lengths by; used for
  /// headroom accounting. Zero for operators not built from chaos.
  std::size_t span = 0;

  DenseMatrix dense() const { return DenseMatrix(matrix); }

  FockOperator adjoint() const { return {space, SparseMatrix(matrix.adjoint()), span}; }

  friend FockOperator operator*(const FockOperator& a, const FockOperator& b) {
    return {a.space, SparseMatrix(a.matrix * b.matrix), a.span + b.span};
  }
  friend FockOperator operator+(const FockOperator& a, const FockOperator& b) {
    return {a.space, SparseMatrix(a.matrix + b.matrix), std::max(a.span, b.span)};
  }
  friend FockOperator operator-(const FockOperator& a, const FockOperator& b) {
    return {a.space, SparseMatrix(a.matrix - b.matrix), std::max(a.span, b.span)};
  }
};

enum class Ladder { LeftCreate, LeftAnnihilate, RightCreate, RightAnnihilate };

/// l(h) prepends h, l*(h) contracts <h, g_1>, r(h) appends h, r*(h)
/// contracts <h, g_n>; the inner product is conjugate-linear in its second
/// slot, so the annihilators carry conj(h).
inline FockVector apply_ladder(Ladder kind, const Kernel& h, const FockVector& v,
                               std::size_t level) {
  if (h.order() != 1) throw ArityError("ladder direction must be an order-1 kernel");
  FockVector out;
  auto push = [&](Word w, cx c) {
    if (c == cx{}) return;
    out[std::move(w)] += c;
  };
  for (const auto& [w, c] : v) {
    switch (kind) {
      case Ladder::LeftCreate:
      case Ladder::RightCreate:
        if (w.size() >= level)
          throw TruncationError("creation on a word at the truncation level " +
                                std::to_string(level));
        for (const auto& [hw, hc] : h.entries()) {
          Word x;
          if (kind == Ladder::LeftCreate) {
            x.push_back(hw[0]);
            x.insert(x.end(), w.begin(), w.end());
          } else {
            x = w;
            x.push_back(hw[0]);
          }
          push(std::move(x), hc * c);
        }
        break;
      case Ladder::LeftAnnihilate:
        if (w.empty()) break;
        push(Word(w.begin() + 1, w.end()), std::conj(h.at(Word{w.front()})) * c);
        break;
      case Ladder::RightAnnihilate:
        if (w.empty()) break;
        push(Word(w.begin(), w.end() - 1), std::conj(h.at(Word{w.back()})) * c);
        break;
    }
  }
  std::erase_if(out, [](const auto& kv) { return kv.second == cx{}; });
  return out;
}

/// Matrix of a ladder operator, compressed to the truncated space.
inline FockOperator ladder_operator(const FockSpace& space, Ladder kind, const Kernel& h) {
  if (h.order() != 1) throw ArityError("ladder direction must be an order-1 kernel");
  std::vector<Eigen::Triplet<cx>> triplets;
  for (std::size_t col = 0; col < space.dimension(); ++col) {
    const Word w = space.word(col);
    const bool creates = kind == Ladder::LeftCreate || kind == Ladder::RightCreate;
    if (creates && w.size() >= space.level()) continue;
    FockVector v{{w, 1.0}};
    for (const auto& [x, c] : apply_ladder(kind, h, v, space.level() + 1))
      triplets.emplace_back(static_cast<int>(space.index(x)), static_cast<int>(col), c);
  }
  const int n = static_cast<int>(space.dimension());
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return {space, m, 1};
}

inline FockOperator identity_operator(const FockSpace& space) {
  const int n = static_cast<int>(space.dimension());
  SparseMatrix m(n, n);
  m.setIdentity();
  return {space, m, 0};
}

/// |Omega><Omega|
inline FockOperator vacuum_projection(const FockSpace& space) {
  const int n = static_cast<int>(space.dimension());
  SparseMatrix m(n, n);
  m.insert(0, 0) = 1.0;
  return {space, m, 0};
}

/// S(h) = l(h) + l*(h)
inline FockOperator field_operator(const FockSpace& space, const Kernel& h) {
  if (!is_real_vector(h)) throw PreconditionError("field operators need a real direction");
  auto l = ladder_operator(space, Ladder::LeftCreate, h);
  auto ls = ladder_operator(space, Ladder::LeftAnnihilate, h);
  return {space, SparseMatrix(l.matrix + ls.matrix), 1};
}

/// Second quantization F(T): T^{(x) n} on words of length n.
inline FockOperator second_quantize(const FockSpace& space, const DenseMatrix& t) {
  const auto d = static_cast<long>(space.basis_size());
  if (t.rows() != d || t.cols() != d) throw ArityError("second quantization needs a d x d matrix");
  Eigen::JacobiSVD<DenseMatrix> svd(t);
  if (svd.singularValues().size() > 0 && svd.singularValues()(0) > 1.0 + 1e-12)
    throw PreconditionError("second quantization needs a contraction");
  std::vector<Eigen::Triplet<cx>> triplets;
  for (std::size_t col = 0; col < space.dimension(); ++col) {
    const Word w = space.word(col);
    // Expand T e_{w_1} (x) ... (x) T e_{w_n} letter by letter.
    std::vector<std::pair<Word, cx>> acc{{Word{}, 1.0}};
    for (auto letter : w) {
      std::vector<std::pair<Word, cx>> next;
      for (const auto& [x, c] : acc)
        for (long r = 0; r < d; ++r) {
          const cx v = t(r, letter);
          if (v == cx{}) continue;
          Word y = x;
          y.push_back(static_cast<BasisIndex>(r));
          next.emplace_back(std::move(y), c * v);
        }
      acc = std::move(next);
    }
    for (const auto& [x, c] : acc)
      triplets.emplace_back(static_cast<int>(space.index(x)), static_cast<int>(col), c);
  }
  const int n = static_cast<int>(space.dimension());
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return {space, m, 0};
}

/// Field operators of a fixed Fock space, cached for repeated conversions.
class FockModel {
 public:
  explicit FockModel(FockSpace space) : space_(std::move(space)), identity_(identity_operator(space_)) {
    for (BasisIndex i = 0; i < space_.basis_size(); ++i) fields_.push_back(field_operator(space_, Kernel::basis(i)));
  }

  const FockSpace& space() const { return space_; }
  const FockOperator& field(BasisIndex i) const {
    if (i >= fields_.size()) throw DomainError("chaos index outside the Fock basis");
    return fields_[i];
  }

  /// Operator of F through the first-slot recursion. Exact on input words
  /// of length <= L - deg(F); requires deg(F) <= L - headroom (default deg(F)).
  FockOperator chaos_to_operator(const ChaosExpansion& f,
                                 std::optional<std::size_t> headroom = std::nullopt) const {
    const std::size_t deg = f.degree();
    const std::size_t room = headroom.value_or(deg);
    if (deg + room > space_.level())
      throw TruncationError("chaos of degree " + std::to_string(deg) + " with headroom " +
                            std::to_string(room) + " does not fit Fock level " +
                            std::to_string(space_.level()));
    RecursiveEvaluator<SparseMatrix> eval(
        [this](BasisIndex i) -> const SparseMatrix& { return field(i).matrix; }, identity_.matrix);
    SparseMatrix m = eval.evaluate(f);
    m.prune(cx{0.0}, 1e-15);
    return {space_, m, deg};
  }

 private:
  FockSpace space_;
  FockOperator identity_;
  std::vector<FockOperator> fields_;
};

inline FockOperator chaos_to_operator(const FockSpace& space, const ChaosExpansion& f,
                                      std::optional<std::size_t> headroom = std::nullopt) {
  return FockModel(space).chaos_to_operator(f, headroom);
}

/// Exact compression of F: column w is the truncation of F * I(e_w), the
/// normal-ordered word l(e_{u_1})..l(e_{u_k}) l*(e_{u_{k+1}})..l*(e_{u_n})
/// expanded over every kernel entry u.
inline FockOperator compress_chaos(const FockSpace& space, const ChaosExpansion& f) {
  std::vector<Eigen::Triplet<cx>> triplets;
  for (std::size_t col = 0; col < space.dimension(); ++col) {
    const Word v = space.word(col);
    for (const auto& [n, k] : f.components())
      for (const auto& [u, c] : k.entries())
        for (const auto& x : elementary_product(u, v))
          if (x.size() <= space.level())
            triplets.emplace_back(static_cast<int>(space.index(x)), static_cast<int>(col), c);
  }
  const int n = static_cast<int>(space.dimension());
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.prune(cx{0.0}, 1e-15);
  return {space, m, f.degree()};
}

/// <X Omega, Omega>
inline cx vacuum_expectation(const FockOperator& x) { return x.matrix.coeff(0, 0); }

/// X Omega as a sparse word vector.
inline FockVector vacuum_image(const FockOperator& x) {
  FockVector out;
  for (SparseMatrix::InnerIterator it(x.matrix, 0); it; ++it)
    if (it.value() != cx{}) out[x.space.word(static_cast<std::size_t>(it.row()))] = it.value();
  return out;
}

/// Reads the chaos kernels back off a Fock vector.
inline ChaosExpansion fock_vector_to_chaos(const FockVector& v) {
  std::map<std::size_t, Kernel> acc;
  for (const auto& [w, c] : v) {
    auto [it, ins] = acc.try_emplace(w.size(), w.size());
    it->second.add(w, c);
  }
  ChaosExpansion out;
  for (auto& [n, k] : acc) out.add(k);
  return out;
}

/// (<(X*X)^{p/2} Omega, Omega>)^{1/p} for even p, evaluated as
/// <(X*X)^a Omega, (X*X)^b Omega> with a+b = p/2 so that no intermediate
/// vector leaves the vacuum-exact region.
inline double lp_norm_even(const FockOperator& x, std::size_t p) {
  if (p == 0 || p % 2 != 0) throw PreconditionError("lp_norm_even needs an even p >= 2");
  const std::size_t half = p / 2;
  const std::size_t a = (half + 1) / 2;
  const std::size_t b = half - a;
  if (2 * a * x.span > x.space.level())
    throw TruncationError("insufficient Fock headroom for the L^" + std::to_string(p) + " norm");
  const SparseMatrix xs = x.matrix.adjoint();
  DenseVector omega = DenseVector::Zero(static_cast<long>(x.space.dimension()));
  omega(0) = 1.0;
  auto power = [&](std::size_t k) {
    DenseVector v = omega;
    for (std::size_t i = 0; i < k; ++i) {
      DenseVector y = x.matrix * v;
      v = xs * y;
    }
    return v;
  };
  const cx value = power(b).dot(power(a));  // conj(power(b)) . power(a)
  return std::pow(std::max(value.real(), 0.0), 1.0 / static_cast<double>(p));
}

/// Largest singular value. Dense eigen-decomposition of X*X up to
/// `dense_limit` rows; Lanczos-free power iteration beyond that.
inline double operator_norm(const FockOperator& x, std::size_t dense_limit = 4096) {
  const auto n = static_cast<long>(x.space.dimension());
  if (static_cast<std::size_t>(n) <= dense_limit) {
    const DenseMatrix m = x.dense();
    const DenseMatrix g = m.adjoint() * m;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(g, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
  }
  const SparseMatrix xs = x.matrix.adjoint();
  DenseVector v = DenseVector::Ones(n).normalized();
  double lambda = 0;
  for (int it = 0; it < 5000; ++it) {
    DenseVector w = xs * (x.matrix * v);
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    if (std::abs(next - lambda) <= 1e-14 * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(lambda);
}

/// [r*(h), X_F]
inline FockOperator commutator_rstar(const FockModel& model, const Kernel& h,
                                     const ChaosExpansion& f) {
  if (!is_real_vector(h)) throw PreconditionError("commutator direction must be real");
  const FockOperator x = model.chaos_to_operator(f);
  const FockOperator rs = ladder_operator(model.space(), Ladder::RightAnnihilate, h);
  return {model.space(), SparseMatrix(rs.matrix * x.matrix - x.matrix * rs.matrix), x.span};
}

/// <nabla F, h> # P_1: every elementary a (x) b of the directional
/// derivative contributes X_a |Omega><Omega| X_b.
inline FockOperator gradient_sharp_vacuum(const FockModel& model, const Kernel& h,
                                          const ChaosExpansion& f) {
  const FockSpace& space = model.space();
  const MultiKernel dh = directional_derivative(f, h);
  std::map<Word, SparseMatrix> cache;
  auto op = [&](const Word& w) -> const SparseMatrix& {
    auto it = cache.find(w);
    if (it == cache.end())
      it = cache.emplace(w, model.chaos_to_operator(ChaosExpansion::integral(Kernel::elementary(w)), 0)
                                .matrix).first;
    return it->second;
  };
  std::map<std::pair<int, int>, cx> acc;
  dh.for_each_entry([&](const Degrees& d, const Word& w, cx c) {
    const auto parts = split_word(w, d);
    const SparseMatrix& a = op(parts[0]);
    const SparseMatrix brow = SparseMatrix(op(parts[1]).row(0));
    for (SparseMatrix::InnerIterator ia(a, 0); ia; ++ia)
      for (int col = 0; col < brow.outerSize(); ++col)
        for (SparseMatrix::InnerIterator ib(brow, col); ib; ++ib)
          acc[{static_cast<int>(ia.row()), col}] += c * ia.value() * ib.value();
  });
  std::vector<Eigen::Triplet<cx>> triplets;
  for (const auto& [rc, v] : acc)
    if (std::abs(v) > 1e-15) triplets.emplace_back(rc.first, rc.second, v);
  const int n = static_cast<int>(space.dimension());
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return {space, m, f.degree()};
}

/// Max |a_ij - b_ij| over all rows and the columns whose word length is at
/// most `max_column_length`.
inline double max_abs_diff(const FockOperator& a, const FockOperator& b,
                           std::size_t max_column_length) {
  const SparseMatrix diff = a.matrix - b.matrix;
  double m = 0;
  for (int col = 0; col < diff.outerSize(); ++col) {
    if (a.space.length_of(static_cast<std::size_t>(col)) > max_column_length) continue;
    for (SparseMatrix::InnerIterator it(diff, col); it; ++it) m = std::max(m, std::abs(it.value()));
  }
  return m;
}

}  // namespace wigner
