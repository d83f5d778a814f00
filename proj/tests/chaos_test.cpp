#include <gtest/gtest.h>

#include <cmath>

#include "wigner/chaos.hpp"
#include "wigner/oracle.hpp"
#include "wigner/random.hpp"

namespace wigner {
namespace {

ChaosExpansion S(BasisIndex i) { return ChaosExpansion::field(Kernel::basis(i)); }
ChaosExpansion I(const Word& w, cx c = 1.0) { return ChaosExpansion::integral(Kernel::elementary(w, c)); }

TEST(Chaos, LinearCombineCancels) {
  RandomSource rng(1);
  const ChaosExpansion f = rng.chaos(0, 3, 3);
  const std::vector<std::pair<cx, ChaosExpansion>> terms{{1.0, f}, {-1.0, f}};
  EXPECT_TRUE(linear_combine(terms).empty());
  const std::vector<std::pair<cx, ChaosExpansion>> twice{{2.0, S(1)}};
  EXPECT_EQ(linear_combine(twice), ChaosExpansion::field(Kernel::basis(1, 2.0)));
}

TEST(Chaos, ScalingIsHomogeneousInNorm) {
  RandomSource rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const ChaosExpansion f = rng.chaos(0, 3, 3);
    const cx alpha = rng.disk();
    EXPECT_NEAR(norm2(alpha * f), std::abs(alpha) * norm2(f), 1e-12);
  }
}

TEST(Chaos, SquareOfFieldFollowsProductFormula) {
  RandomSource rng(3);
  const Kernel h = rng.real_vector(4);
  const ChaosExpansion x = ChaosExpansion::field(h);
  const ChaosExpansion expected =
      ChaosExpansion::integral(tensor_product(h, h)) + ChaosExpansion::constant(norm_squared(h));
  EXPECT_LT(max_abs_diff(multiply(x, x), expected), 1e-14);
}

TEST(Chaos, UnitIsNeutral) {
  RandomSource rng(4);
  const ChaosExpansion f = rng.chaos(0, 3, 3);
  const auto one = ChaosExpansion::constant(1.0);
  EXPECT_EQ(multiply(one, f), f);
  EXPECT_EQ(multiply(f, one), f);
}

TEST(Chaos, CrossingPairingIsExcluded) {
  const std::vector<ChaosExpansion> crossing{S(1), S(2), S(1), S(2)};
  const std::vector<ChaosExpansion> nested{S(1), S(1), S(2), S(2)};
  auto fold = [](const std::vector<ChaosExpansion>& xs) {
    ChaosExpansion acc = ChaosExpansion::constant(1.0);
    for (const auto& x : xs) acc = multiply(acc, x);
    return trace(acc);
  };
  EXPECT_NEAR(std::abs(fold(crossing)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(fold(nested) - 1.0), 0.0, 1e-15);
}

TEST(Chaos, ProductIsAssociative) {
  RandomSource rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = rng.chaos(0, 3, 6), g = rng.chaos(0, 3, 6), h = rng.chaos(0, 2, 6);
    const Budget b{9};
    EXPECT_LT(max_abs_diff(multiply(multiply(f, g, b), h, b), multiply(f, multiply(g, h, b), b)), 1e-10);
  }
}

TEST(Chaos, ProductAdjointReversesOrder) {
  RandomSource rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = rng.chaos(0, 3, 3), g = rng.chaos(0, 3, 3);
    EXPECT_LT(max_abs_diff(adjoint_functional(multiply(f, g)),
                           multiply(adjoint_functional(g), adjoint_functional(f))),
              1e-12);
  }
}

TEST(Chaos, ProductRespectsBudget) {
  EXPECT_THROW(multiply(I({0, 1, 2}), I({0, 1, 2}), Budget{5}), TruncationError);
  EXPECT_NO_THROW(multiply(I({0, 1, 2}), I({0, 1, 2}), Budget{6}));
}

TEST(Chaos, AdjointFunctional) {
  EXPECT_EQ(adjoint_functional(S(3)), S(3));
  EXPECT_EQ(adjoint_functional(I({1, 2})), I({2, 1}));
  RandomSource rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = rng.chaos(0, 3, 3);
    const cx t = trace(multiply(adjoint_functional(f), f));
    EXPECT_GE(t.real(), -1e-14);
    EXPECT_NEAR(t.imag(), 0.0, 1e-12);
    // Mirror-symmetric kernels give self-adjoint functionals.
    const auto sym = f + adjoint_functional(f);
    EXPECT_TRUE(is_self_adjoint(sym));
  }
}

TEST(Chaos, TraceAndIsometry) {
  RandomSource rng(8);
  const Kernel h = rng.real_vector(5);
  const auto x = ChaosExpansion::field(h);
  EXPECT_EQ(trace(x), cx{});
  EXPECT_NEAR(trace(multiply(x, x)).real(), norm_squared(h), 1e-13);
  const auto x2 = multiply(x, x);
  EXPECT_NEAR(trace(multiply(x2, x2)).real(), 2 * std::pow(norm_squared(h), 2), 1e-12);
}

TEST(Chaos, InnerMatchesTraceOfProduct) {
  RandomSource rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = rng.chaos(0, 3, 4), g = rng.chaos(0, 3, 4);
    EXPECT_LT(std::abs(inner(f, g) - trace(multiply(adjoint_functional(g), f))), 1e-12);
    EXPECT_NEAR(inner(f, f).real(), norm2_squared(f), 1e-12);
  }
}

TEST(Chaos, TraceIsTracial) {
  RandomSource rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = rng.chaos(0, 3, 4), g = rng.chaos(0, 3, 4);
    EXPECT_LT(std::abs(trace(multiply(f, g)) - trace(multiply(g, f))), 1e-12);
  }
}

TEST(Chaos, ProjectionsAreOrthogonalAndSumToIdentity) {
  RandomSource rng(11);
  const auto f = rng.chaos(0, 4, 3);
  const auto g = rng.chaos(0, 4, 3);
  ChaosExpansion sum;
  for (std::size_t n = 0; n <= 4; ++n) {
    const auto pn = project_chaos(f, n);
    EXPECT_EQ(project_chaos(pn, n), pn);
    sum += pn;
    for (std::size_t m = 0; m <= 4; ++m)
      if (m != n) {
        EXPECT_EQ(inner(pn, project_chaos(g, m)), cx{});
      }
  }
  EXPECT_LT(max_abs_diff(sum, f), 1e-15);
  EXPECT_EQ(project_chaos(f, 0), ChaosExpansion::constant(trace(f)));
  const auto x = S(2);
  EXPECT_EQ(project_chaos(multiply(x, x), 2), I({2, 2}));
}

TEST(Chaos, SpectralModes) {
  RandomSource rng(12);
  const auto f = rng.chaos(0, 4, 3);
  const double t = 0.37;
  const auto pt = apply_spectral(f, SpectralMode::ou(t));
  for (const auto& [n, k] : f.components())
    EXPECT_LT(max_abs_diff(pt.component(n), std::exp(-double(n) * t) * k), 1e-15);
  EXPECT_TRUE(apply_spectral(ChaosExpansion::constant(1.0), SpectralMode::generator()).empty());
  for (std::size_t n = 0; n <= 4; ++n) {
    const auto pn = project_chaos(f, n);
    EXPECT_LT(max_abs_diff(apply_spectral(pn, SpectralMode::generator()), -double(n) * pn), 1e-15);
    EXPECT_LT(max_abs_diff(apply_spectral(pn, SpectralMode::number()), double(n) * pn), 1e-15);
    EXPECT_LT(max_abs_diff(apply_spectral(pn, SpectralMode::cauchy()), -std::sqrt(double(n)) * pn),
              1e-15);
  }
  // L L^{-1} = id - pi_0
  const auto lli = apply_spectral(apply_spectral(f, SpectralMode::pseudo_inverse()), SpectralMode::generator());
  EXPECT_LT(max_abs_diff(lli, centered(f)), 1e-15);
  // C^2 = N
  const auto cc = apply_spectral(apply_spectral(f, SpectralMode::cauchy()), SpectralMode::cauchy());
  EXPECT_LT(max_abs_diff(cc, apply_spectral(f, SpectralMode::number())), 1e-14);
  EXPECT_THROW(apply_spectral(f, SpectralMode::ou(-1.0)), PreconditionError);
}

TEST(Chaos, OrnsteinUhlenbeckSemigroupAndErgodicity) {
  RandomSource rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = rng.chaos(0, 5, 3);
    const double t = rng.uniform(0, 2), s = rng.uniform(0, 2);
    const auto lhs = apply_spectral(apply_spectral(f, SpectralMode::ou(s)), SpectralMode::ou(t));
    EXPECT_LT(max_abs_diff(lhs, apply_spectral(f, SpectralMode::ou(t + s))), 1e-14);
    EXPECT_LE(norm2(centered(apply_spectral(f, SpectralMode::ou(t)))),
              std::exp(-t) * norm2(centered(f)) + 1e-14);
  }
}

TEST(Chaos, Dilation) {
  RandomSource rng(14);
  const auto f = rng.chaos(0, 6, 2);
  EXPECT_LT(max_abs_diff(dilate(f, 1.0), f), 1e-15);
  EXPECT_EQ(dilate(f, 0.0), ChaosExpansion::constant(trace(f)));
  const auto lf = apply_spectral(f, SpectralMode::generator());
  for (double eps : {1e-3, 1e-4}) {
    const auto quotient = (1.0 / eps) * (dilate(f, 1.0 - eps) - f);
    const double bound = dilation_taylor_constant(f.degree()) * norm2(centered(f)) * eps;
    EXPECT_LE(norm2(quotient - lf), bound);
  }
}

TEST(Chaos, ChebyshevMatchesTensorPowers) {
  const Kernel e = Kernel::basis(1);
  EXPECT_EQ(chebyshev_eval(1, e), S(1));
  EXPECT_EQ(chebyshev_eval(2, e), I({1, 1}));
  EXPECT_LT(max_abs_diff(chebyshev_eval(2, e), multiply(S(1), S(1)) - ChaosExpansion::constant(1.0)), 1e-15);
  for (std::size_t p = 0; p <= 8; ++p)
    EXPECT_EQ(chebyshev_eval(p, e), ChaosExpansion::integral(tensor_power(e, p))) << p;
  EXPECT_THROW(chebyshev_eval(2, Kernel::basis(0, 2.0)), PreconditionError);
}

TEST(Chaos, ChebyshevOrthogonality) {
  RandomSource rng(15);
  const Kernel h = rng.unit_vector(3), g = rng.unit_vector(3);
  const double hg = inner_product(h, g).real();
  for (std::size_t n = 0; n <= 5; ++n)
    for (std::size_t m = 0; m <= 5; ++m) {
      const cx v = inner(chebyshev_eval(n, h), chebyshev_eval(m, g));
      EXPECT_NEAR(std::abs(v - (n == m ? std::pow(hg, double(n)) : 0.0)), 0.0, 1e-12);
    }
}

TEST(Chaos, ConditionalExpectation) {
  RandomSource rng(16);
  const auto f = rng.chaos(0, 3, 4);
  EXPECT_EQ(conditional_expectation(f, {0, 1, 2, 3}), f);
  EXPECT_TRUE(conditional_expectation(I({1, 2}), {1}).empty());
  EXPECT_EQ(conditional_expectation(I({1, 1}), {1}), I({1, 1}));
  const std::set<BasisIndex> a{0, 2};
  const auto ef = conditional_expectation(f, a);
  EXPECT_EQ(trace(ef), trace(f));
  EXPECT_EQ(conditional_expectation(ef, a), ef);
  EXPECT_LE(norm2(ef), norm2(f));
  // F - E_A F is orthogonal to everything measurable with respect to A.
  for (int trial = 0; trial < 5; ++trial) {
    const auto g = conditional_expectation(rng.chaos(0, 3, 4, 0.6), a);
    EXPECT_LT(std::abs(inner(f - ef, g)), 1e-14);
  }
}

TEST(Chaos, RotationAutomorphism) {
  RandomSource rng(17);
  const std::size_t d = 3;
  const auto f = rng.chaos(0, 3, d);
  EXPECT_LT(max_abs_diff(rotate_pair(f, d, 0.0), f), 1e-15);
  const Kernel h = rng.real_vector(d);
  const auto x = ChaosExpansion::field(h);
  for (double t : {0.3, 1.2}) {
    const auto rx = rotate_pair(multiply(x, x), d, t);
    EXPECT_NEAR(trace(rx).real(), norm_squared(h), 1e-13);
    // Multiplicative and trace preserving.
    const auto g = rng.chaos(0, 2, d);
    EXPECT_LT(max_abs_diff(rotate_pair(multiply(f, g), d, t),
                           multiply(rotate_pair(f, d, t), rotate_pair(g, d, t))),
              1e-12);
    EXPECT_LT(std::abs(trace(rotate_pair(f, d, t)) - trace(f)), 1e-14);
  }
  // d/dt at 0 of alpha_t(S(h)) is X(h), the copy on indices d..2d-1.
  const double eps = 1e-6;
  const auto slope = (1.0 / eps) * (rotate_pair(x, d, eps) - x);
  Kernel copy(1);
  for (const auto& [w, c] : h.entries()) copy.add({w[0] + BasisIndex(d)}, c);
  EXPECT_LT(max_abs_diff(slope, ChaosExpansion::field(copy)), 1e-6);
  EXPECT_THROW(rotate_pair(S(3), d, 0.1), DomainError);
}

TEST(Chaos, WordMoments) {
  const Kernel e1 = Kernel::basis(1), e2 = Kernel::basis(2);
  EXPECT_EQ(word_moment(std::vector<Kernel>{e1}), cx{});
  EXPECT_EQ(word_moment(std::vector<Kernel>{e1, e2}), cx{});
  EXPECT_NEAR(word_moment(std::vector<Kernel>(6, e1)).real(), 5.0, 1e-13);
  EXPECT_THROW(word_moment(std::vector<Kernel>(9, e1)), TruncationError);
}

TEST(Chaos, WordMomentsAgreeWithPairingOracle) {
  RandomSource rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    const auto word = rng.real_word(1 + rng.index(8), 3);
    EXPECT_LT(std::abs(word_moment(word) - wick_moment(word)), 1e-10);
  }
}

TEST(Chaos, ChebyshevWickCoherence) {
  for (std::size_t p = 0; p <= 8; ++p) {
    const auto u = chebyshev_eval(p, Kernel::basis(0));
    EXPECT_EQ(u.components().size(), 1u);
    EXPECT_EQ(u.component(p), Kernel::elementary(Word(p, 0)));
  }
}

}  // namespace
}  // namespace wigner
