#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wigner/fock.hpp"
#include "wigner/oracle.hpp"
#include "wigner/random.hpp"

namespace wigner {
namespace {

TEST(FockSpace, IndexingRoundTrip) {
  const FockSpace space(3, 4);
  EXPECT_EQ(space.dimension(), 1u + 3 + 9 + 27 + 81);
  EXPECT_EQ(space.index({}), 0u);
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    const Word w = space.word(i);
    EXPECT_EQ(space.index(w), i);
    EXPECT_EQ(space.length_of(i), w.size());
  }
  EXPECT_THROW(space.index({0, 0, 0, 0, 0}), TruncationError);
  EXPECT_THROW(space.index({3}), DomainError);
}

TEST(Ladder, CreationAndAnnihilation) {
  const Kernel e0 = Kernel::basis(0), e1 = Kernel::basis(1);
  const FockVector v{{{1}, 1.0}};
  EXPECT_EQ(apply_ladder(Ladder::LeftCreate, e0, v, 3), (FockVector{{{0, 1}, 1.0}}));
  EXPECT_EQ(apply_ladder(Ladder::RightCreate, e0, v, 3), (FockVector{{{1, 0}, 1.0}}));
  EXPECT_TRUE(apply_ladder(Ladder::LeftAnnihilate, e0, v, 3).empty());
  EXPECT_EQ(apply_ladder(Ladder::LeftAnnihilate, e1, v, 3), (FockVector{{{}, 1.0}}));
  EXPECT_THROW(apply_ladder(Ladder::LeftCreate, e0, FockVector{{{1, 1, 1}, 1.0}}, 3), TruncationError);
  EXPECT_EQ(apply_ladder(Ladder::LeftAnnihilate, Kernel::basis(0, cx{0, 1}), FockVector{{{0}, 1.0}}, 3),
            (FockVector{{{}, cx(0, -1)}}));
}

TEST(Ladder, AdjointPairsAndCuntzRelation) {
  RandomSource rng(1);
  const FockSpace space(2, 4);
  const Kernel h = rng.kernel(1, 2, 1.0), g = rng.kernel(1, 2, 1.0);
  const auto l = ladder_operator(space, Ladder::LeftCreate, h);
  const auto ls = ladder_operator(space, Ladder::LeftAnnihilate, h);
  const auto r = ladder_operator(space, Ladder::RightCreate, h);
  const auto rs = ladder_operator(space, Ladder::RightAnnihilate, h);
  EXPECT_LT((l.adjoint().dense() - ls.dense()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((r.adjoint().dense() - rs.dense()).cwiseAbs().maxCoeff(), 1e-15);
  // l*(h) l(g) = <g, h> on every level below the cutoff.
  const auto prod = ladder_operator(space, Ladder::LeftAnnihilate, h) *
                    ladder_operator(space, Ladder::LeftCreate, g);
  const DenseMatrix expected = inner_product(g, h) * identity_operator(space).dense();
  EXPECT_LT(max_abs_diff(prod, FockOperator{space, expected.sparseView(), 0}, space.level() - 1), 1e-14);
}

TEST(Field, SingleModeNormIsChebyshevRoot) {
  // S(e) restricted to the span of e^{(x)k}, k <= L, is the path-graph Jacobi
  // matrix with norm 2 cos(pi / (L + 2)).
  for (std::size_t level : {2, 5, 9}) {
    const FockSpace space(1, level);
    const double expected = 2 * std::cos(std::numbers::pi / double(level + 2));
    EXPECT_NEAR(operator_norm(field_operator(space, Kernel::basis(0))), expected, 1e-10);
  }
}

TEST(Field, VacuumMomentsMatchPairingOracle) {
  RandomSource rng(2);
  const FockSpace space(3, 5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto word = rng.real_word(1 + rng.index(10), 3);
    DenseVector v = DenseVector::Zero(static_cast<long>(space.dimension()));
    v(0) = 1.0;
    for (auto it = word.rbegin(); it != word.rend(); ++it) v = field_operator(space, *it).matrix * v;
    EXPECT_LT(std::abs(v(0) - wick_moment(word)), 1e-10);
  }
  EXPECT_THROW(field_operator(space, Kernel::basis(0, cx{0, 1})), PreconditionError);
}

TEST(ChaosOperator, VacuumImageIsKernel) {
  RandomSource rng(3);
  const FockModel model(FockSpace(3, 6));
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = rng.chaos(0, 3, 3);
    const auto x = model.chaos_to_operator(f);
    EXPECT_LT(max_abs_diff(fock_vector_to_chaos(vacuum_image(x)), f), 1e-13);
    EXPECT_LT(std::abs(vacuum_expectation(x) - trace(f)), 1e-14);
    const auto c = compress_chaos(model.space(), f);
    EXPECT_LT(max_abs_diff(x, c, model.space().level() - f.degree()), 1e-13);
  }
  EXPECT_THROW(model.chaos_to_operator(ChaosExpansion::integral(Kernel::elementary({0, 0, 0, 0}))),
               TruncationError);
  EXPECT_THROW(model.field(7), DomainError);
}

TEST(ChaosOperator, ProductFormulaOracle) {
  RandomSource rng(4);
  const FockModel model(FockSpace(3, 8));
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = rng.chaos(0, 2, 3), g = rng.chaos(0, 2, 3);
    const auto fg = multiply(f, g);
    const auto xf = model.chaos_to_operator(f), xg = model.chaos_to_operator(g);
    const auto prod = xf * xg;
    EXPECT_LT(std::abs(vacuum_expectation(prod) - trace(fg)), 1e-12);
    EXPECT_LT(max_abs_diff(fock_vector_to_chaos(vacuum_image(prod)), fg), 1e-12);
    const auto xfg = model.chaos_to_operator(fg);
    EXPECT_LT(max_abs_diff(prod, xfg, model.space().level() - f.degree() - g.degree()), 1e-12);
  }
}

TEST(ChaosOperator, AdjointMatchesFunctionalAdjoint) {
  RandomSource rng(5);
  const FockSpace space(2, 6);
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = rng.chaos(0, 3, 2);
    const auto a = compress_chaos(space, f).adjoint();
    const auto b = compress_chaos(space, adjoint_functional(f));
    EXPECT_LT(max_abs_diff(a, b, space.level()), 1e-14);
  }
}

TEST(SecondQuantization, ActsOnKernelsSlotwise) {
  RandomSource rng(6);
  const FockSpace space(2, 4);
  DenseMatrix t(2, 2);
  const double c = std::cos(0.4), s = std::sin(0.4);
  t << c, -s, s, c;
  const auto gamma = second_quantize(space, t);
  const Kernel f = rng.kernel(3, 2, 1.0);
  DenseVector v = DenseVector::Zero(static_cast<long>(space.dimension()));
  for (const auto& [w, coeff] : f.entries()) v(static_cast<long>(space.index(w))) = coeff;
  const DenseVector gv = gamma.matrix * v;
  // Oracle: T^{(x)3} entry by entry.
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    const Word out = space.word(i);
    cx expected{};
    if (out.size() == 3)
      for (const auto& [w, coeff] : f.entries())
        expected += coeff * t(out[0], w[0]) * t(out[1], w[1]) * t(out[2], w[2]);
    EXPECT_LT(std::abs(gv(static_cast<long>(i)) - expected), 1e-14);
  }
  EXPECT_THROW(second_quantize(space, 2.0 * t), PreconditionError);
}

TEST(LpNorm, EvenNormsFromVacuum) {
  RandomSource rng(7);
  const FockModel model(FockSpace(2, 8));
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = rng.chaos(0, 2, 2);
    const auto x = compress_chaos(model.space(), f);
    EXPECT_NEAR(lp_norm_even(x, 2), norm2(f), 1e-12);
    const auto ff = multiply(adjoint_functional(f), f);
    const double fourth = std::pow(trace(multiply(ff, ff)).real(), 0.25);
    EXPECT_NEAR(lp_norm_even(x, 4), fourth, 1e-12);
  }
  const auto x = compress_chaos(model.space(), ChaosExpansion::field(Kernel::basis(0)));
  EXPECT_NEAR(lp_norm_even(x, 4), std::pow(2.0, 0.25), 1e-14);
  EXPECT_THROW(lp_norm_even(x, 3), PreconditionError);
}

TEST(OperatorNorm, HaagerupBound) {
  RandomSource rng(8);
  const FockSpace space(2, 8);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 1 + rng.index(3);
    const Kernel f = rng.kernel(n, 2);
    const double norm = operator_norm(compress_chaos(space, ChaosExpansion::integral(f)));
    EXPECT_LE(norm, double(n + 1) * wigner::norm(f) + 1e-9);
    // ||X|| >= ||X Omega|| = ||f||.
    EXPECT_GE(norm, wigner::norm(f) - 1e-12);
  }
}

TEST(OperatorNorm, PowerIterationMatchesDense) {
  RandomSource rng(9);
  const FockSpace space(2, 5);
  const auto x = compress_chaos(space, rng.chaos(0, 2, 2));
  EXPECT_NEAR(operator_norm(x, 0), operator_norm(x), 1e-8);
}

TEST(Commutator, RightAnnihilatorAgainstGradient) {
  RandomSource rng(10);
  const FockModel model(FockSpace(2, 6));
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = rng.chaos(0, 3, 2);
    const Kernel h = rng.real_vector(2);
    const auto lhs = commutator_rstar(model, h, f);
    const auto rhs = gradient_sharp_vacuum(model, h, f);
    EXPECT_LT(max_abs_diff(lhs, rhs, model.space().level() - f.degree()), 1e-12);
  }
}

TEST(Commutator, FieldExample) {
  // [r*(h), S(g)] = <g, h> |Omega><Omega|
  const FockModel model(FockSpace(2, 4));
  const Kernel h = Kernel::basis(0), g = Kernel::basis(0, 2.0);
  const auto c = commutator_rstar(model, h, ChaosExpansion::field(g));
  EXPECT_LT(max_abs_diff(c, FockOperator{model.space(), 2.0 * vacuum_projection(model.space()).matrix, 0},
                         3),
            1e-15);
}

}  // namespace
}  // namespace wigner
