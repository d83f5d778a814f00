#include <gtest/gtest.h>

#include "wigner/oracle.hpp"
#include "wigner/random.hpp"

namespace wigner {
namespace {

TEST(Pairings, CountsAreCatalanAndDoubleFactorial) {
  const std::uint64_t catalans[] = {1, 1, 2, 5, 14, 42, 132};
  std::uint64_t double_factorial = 1;
  for (std::size_t k = 0; k <= 6; ++k) {
    EXPECT_EQ(catalan(k), catalans[k]);
    EXPECT_EQ(enumerate_nc_pairings(2 * k).size(), catalans[k]);
    if (k > 0) double_factorial *= 2 * k - 1;
    EXPECT_EQ(enumerate_all_pairings(2 * k).size(), double_factorial);
  }
  EXPECT_TRUE(enumerate_nc_pairings(5).empty());
  EXPECT_TRUE(enumerate_all_pairings(3).empty());
}

TEST(Pairings, NonCrossingSubsetOfAll) {
  for (std::size_t k : {4, 6, 8}) {
    std::size_t nc = 0;
    for (const auto& p : enumerate_all_pairings(k)) nc += p.crossing() ? 0 : 1;
    EXPECT_EQ(nc, enumerate_nc_pairings(k).size());
    for (const auto& p : enumerate_nc_pairings(k)) EXPECT_FALSE(p.crossing());
  }
  PairPartition crossing{{{0, 2}, {1, 3}}};
  EXPECT_TRUE(crossing.crossing());
}

TEST(Wick, SemicircleMoments) {
  const Kernel e = Kernel::basis(0);
  for (std::size_t k = 0; k <= 5; ++k) {
    const std::vector<Kernel> word(2 * k, e);
    EXPECT_NEAR(wick_moment(word).real(), double(catalan(k)), 1e-12);
    EXPECT_NEAR(wick_recursive(word).real(), double(catalan(k)), 1e-12);
  }
}

TEST(Wick, RecursionAgreesWithEnumeration) {
  RandomSource rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const auto word = rng.real_word(rng.index(11), 3);
    EXPECT_LT(std::abs(wick_moment(word) - wick_recursive(word)), 1e-11);
  }
  // Complex directions pair through the conjugate-linear inner product.
  const std::vector<Kernel> w{Kernel::basis(0, cx{0, 1}), Kernel::basis(0)};
  EXPECT_LT(std::abs(wick_moment(w) - wick_recursive(w)), 1e-15);
}

TEST(Wick, FreeIndependenceFactorizes) {
  // tau(a1 b a2) with a's free from b: tau(a1 a2) tau(b) for centered b.
  const Kernel e0 = Kernel::basis(0), e1 = Kernel::basis(1);
  EXPECT_NEAR(wick_moment(std::vector<Kernel>{e0, e1, e1, e0}).real(), 1.0, 1e-15);
  EXPECT_NEAR(wick_moment(std::vector<Kernel>{e0, e1, e0, e1}).real(), 0.0, 1e-15);
  EXPECT_NEAR(wick_moment(std::vector<Kernel>{e0, e0, e1, e1, e0, e0}).real(), 2.0, 1e-15);
}

TEST(Gue, SeedingIsReproducible) {
  GueConfig cfg{20, 3, 7};
  const auto a = gue_sample_family(cfg, 2, 1);
  const auto b = gue_sample_family(cfg, 2, 1);
  const auto c = gue_sample_family(cfg, 2, 2);
  EXPECT_EQ((a[0] - b[0]).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT((a[0] - c[0]).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((a[0] - a[0].adjoint()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(gue_sample_family(GueConfig{1, 1, 1}, 1), PreconditionError);
}

TEST(Gue, MomentsApproachSemicircle) {
  const GueConfig cfg{200, 20, 3};
  const Kernel e = Kernel::basis(0);
  for (std::size_t k = 1; k <= 3; ++k) {
    const std::vector<Kernel> word(2 * k, e);
    const Estimate est = gue_trace(word, cfg);
    // Finite-N bias is O(1/N^2) relative; allow it plus five standard errors.
    EXPECT_NEAR(est.mean, double(catalan(k)), 5 * est.std_error + 0.02 * double(catalan(k)));
  }
  const Kernel e0 = Kernel::basis(0), e1 = Kernel::basis(1);
  const Estimate crossing = gue_trace(std::vector<Kernel>{e0, e1, e0, e1}, cfg);
  EXPECT_NEAR(crossing.mean, 0.0, 5 * crossing.std_error + 0.01);
}

TEST(Gue, OperatorNormOfFieldNearTwo) {
  const GueConfig cfg{200, 5, 4};
  const Estimate est = gue_operator_norm(ChaosExpansion::field(Kernel::basis(0)), cfg);
  EXPECT_NEAR(est.mean, 2.0, 0.1);
  EXPECT_THROW(gue_operator_norm(ChaosExpansion::integral(Kernel::elementary(Word(6, 0))), cfg),
               PreconditionError);
}

TEST(Gue, RecursiveEvaluationMatchesChebyshev) {
  // I_2(e (x) e) realizes as X^2 - 1.
  const GueConfig cfg{30, 1, 5};
  const auto xs = gue_sample_family(cfg, 1, 0);
  RecursiveEvaluator<Eigen::MatrixXcd> eval([&](BasisIndex i) -> const Eigen::MatrixXcd& { return xs.at(i); },
                                            Eigen::MatrixXcd::Identity(30, 30));
  const Eigen::MatrixXcd m = eval.evaluate(Kernel::elementary({0, 0}));
  const Eigen::MatrixXcd expected = xs[0] * xs[0] - Eigen::MatrixXcd::Identity(30, 30);
  EXPECT_LT((m - expected).cwiseAbs().maxCoeff(), 1e-13);
}

}  // namespace
}  // namespace wigner
