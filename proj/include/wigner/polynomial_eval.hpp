#pragma once

// Evaluates a chaos expansion in any concrete realization of the
// semicircular family (Fock-space field operators, random matrices) using
// the first-slot recursion derived from the product formula:
//
//   X(e_i (x) g) = S(e_i) X(g) - X(e_i contracted_1 g)
//
// The caller supplies the field operators S(e_i) and the identity.

#include <functional>
#include <map>

#include "wigner/chaos.hpp"

namespace wigner {

template <typename Matrix>
class RecursiveEvaluator {
 public:
  using FieldFn = std::function<const Matrix&(BasisIndex)>;

  RecursiveEvaluator(FieldFn field, Matrix identity)
      : field_(std::move(field)), identity_(std::move(identity)) {}

  Matrix evaluate(const ChaosExpansion& f) const {
    Matrix acc = zero();
    for (const auto& [n, k] : f.components()) acc += evaluate(k);
    return acc;
  }

  Matrix evaluate(const Kernel& f) const {
    if (f.empty()) return zero();
    if (f.order() == 0) return Matrix(f.at(Word{}) * identity_);
    if (f.order() == 1) {
      Matrix acc = zero();
      for (const auto& [w, c] : f.entries()) acc += c * field_(w[0]);
      return acc;
    }
    // Split f = sum_i e_i (x) f_i by the first slot.
    std::map<BasisIndex, Kernel> tails;
    for (const auto& [w, c] : f.entries()) {
      auto [it, ins] = tails.try_emplace(w[0], f.order() - 1);
      it->second.add(Word(w.begin() + 1, w.end()), c);
    }
    Matrix acc = zero();
    for (const auto& [i, g] : tails) {
      Matrix prod = field_(i) * evaluate(g);
      acc += prod;
      // e_i contracted_1 g keeps the entries of g starting with i, minus that slot.
      Kernel inner(g.order() - 1);
      for (const auto& [w, c] : g.entries())
        if (w[0] == i) inner.add(Word(w.begin() + 1, w.end()), c);
      if (!inner.empty()) acc -= evaluate(inner);
    }
    return acc;
  }

 private:
  Matrix zero() const {
    Matrix z = identity_;
    z.setZero();
    return z;
  }

  FieldFn field_;
  Matrix identity_;
};

}  // namespace wigner
