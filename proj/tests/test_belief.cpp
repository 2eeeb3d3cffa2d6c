#include <gtest/gtest.h>

#include <cmath>

#include "qsearch/belief.hpp"
#include "qsearch/errors.hpp"
#include "qsearch/quadrature.hpp"

using namespace qsearch;

namespace {

void expect_refine_near(const RefineBelief& a, const RefineBelief& b, double tol) {
    EXPECT_NEAR(a.r11, b.r11, tol);
    EXPECT_NEAR(a.r10, b.r10, tol);
    EXPECT_NEAR(a.r01, b.r01, tol);
}

}  // namespace

TEST(ScanPosterior, HandEvaluatedBayes) {
    const auto post = scan_posterior({0.25, 0.5}, 0.0, 1.0, 2.0);
    EXPECT_DOUBLE_EQ(post.p11, 0.5);
    EXPECT_DOUBLE_EQ(post.pmix, 0.5);
    EXPECT_DOUBLE_EQ(post.p00(), 0.0);
}

TEST(ScanPosterior, UninformativeKeepsBelief) {
    const ScanBelief b{0.1, 0.3};
    const auto post = scan_posterior(b, 0.7, 0.7, 0.7);
    EXPECT_NEAR(post.p11, b.p11, 1e-15);
    EXPECT_NEAR(post.pmix, b.pmix, 1e-15);
}

TEST(ScanPosterior, ImpossibleObservationThrows) {
    EXPECT_THROW(scan_posterior({0.2, 0.3}, 0.0, 0.0, 0.0), DegenerateObservation);
    // Only the F0,F0 class could have produced it but it has no mass.
    EXPECT_THROW(scan_posterior({0.5, 0.5}, 1.0, 0.0, 0.0), DegenerateObservation);
}

TEST(ScanUpdate, SwitchResetsToPrior) {
    const auto mixed = mixed_densities(DensityPair::gaussian(1.0, 0.0));
    const auto prior = scan_prior(0.05);
    const auto a = scan_update({0.7, 0.2}, 0.4, true, prior, mixed);
    const auto b = scan_update({0.0, 0.1}, 0.4, true, prior, mixed);
    EXPECT_EQ(a, b);  // bitwise
    EXPECT_NEAR(a.p11, prior.p11, 1e-15);
    EXPECT_NEAR(a.pmix, prior.pmix, 1e-15);
}

TEST(ScanUpdate, SwitchIgnoresPreSwitchBeliefWithSignal) {
    const auto mixed = mixed_densities(DensityPair::gaussian_snr_db(1.0, 3.0));
    const auto prior = scan_prior(0.05);
    for (double z : {-2.0, 0.3, 3.5}) {
        EXPECT_EQ(scan_update({0.9, 0.05}, z, true, prior, mixed),
                  scan_update({0.0, 0.0}, z, true, prior, mixed));
    }
}

TEST(ScanUpdate, StaysOnSimplex) {
    const auto mixed = mixed_densities(DensityPair::gaussian_snr_db(1.0, 3.0));
    const auto prior = scan_prior(0.05);
    Rng rng(4);
    ScanBelief b = prior;
    for (int k = 0; k < 2000; ++k) {
        b = scan_update(b, mixed.fm.sample(rng), false, prior, mixed);
        ASSERT_GE(b.p11, 0.0);
        ASSERT_GE(b.pmix, 0.0);
        ASSERT_LE(b.p11 + b.pmix, 1.0 + 1e-12);
    }
}

TEST(ScanUpdate, MartingaleUnderPredictive) {
    const auto pair = DensityPair::gaussian_snr_db(1.0, 3.0);
    const auto mixed = mixed_densities(pair);
    const auto rule = observation_rule(mixed.f11, QuadratureSpec{});
    const auto prior = scan_prior(0.05);
    for (ScanBelief b : {prior, ScanBelief{0.3, 0.4}, ScanBelief{0.05, 0.9}}) {
        double e11 = 0.0;
        double em = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double z = rule.nodes[q];
            const double w = rule.weights[q] * scan_predictive(b, z, mixed);
            const auto post = scan_update(b, z, false, prior, mixed);
            e11 += w * post.p11;
            em += w * post.pmix;
        }
        EXPECT_NEAR(e11, b.p11, 1e-6);
        EXPECT_NEAR(em, b.pmix, 1e-6);
    }
}

TEST(RefineUpdate, HandEvaluated) {
    // Likelihood ratio 3 with f0(x) = 1.
    const auto post = refine_posterior({0.25, 0.25, 0.25}, 1.0, 3.0);
    expect_refine_near(post, {0.375, 0.375, 0.125}, 1e-15);
}

TEST(RefineUpdate, UninformativeAndAbsorbing) {
    const auto flat = DensityPair::gaussian(1.0, 0.0);
    const RefineBelief b{0.1, 0.2, 0.3};
    expect_refine_near(refine_update(b, 0.8, flat), b, 1e-15);
    const auto pair = DensityPair::gaussian_snr_db(1.0, 3.0);
    for (double x : {-4.0, 0.0, 2.5, 40.0}) {
        expect_refine_near(refine_update({1.0, 0.0, 0.0}, x, pair), {1.0, 0.0, 0.0}, 0.0);
    }
}

TEST(RefineUpdate, DegenerateObservation) {
    const auto pair = DensityPair::discrete({1.0, 0.0}, {1.0, 0.0});
    EXPECT_THROW(refine_update({0.2, 0.2, 0.2}, 1.0, pair), DegenerateObservation);
}

TEST(Embed, InitialConditionAndHandValue) {
    expect_refine_near(embed({0.3, 0.4}, 0.0), {0.3, 0.2, 0.2}, 1e-15);
    expect_refine_near(embed({0.25, 0.5}, std::log(3.0)), {0.375, 0.375, 0.125}, 1e-15);
}

TEST(Embed, LimitsSaturateAtVertices) {
    const auto hi = marginals(embed({0.1, 0.4}, 1e6));
    EXPECT_NEAR(hi.pi_a, 1.0, 1e-15);
    const auto lo = marginals(embed({0.1, 0.4}, -1e6));
    EXPECT_NEAR(lo.pi_a, 0.0, 1e-15);
    const auto b = embed({0.0, 0.5}, 1e6);
    EXPECT_TRUE(std::isfinite(b.r11) && std::isfinite(b.r10) && std::isfinite(b.r01));
}

TEST(Embed, AgreesWithIteratedUpdates) {
    const auto pair = DensityPair::gaussian_snr_db(1.0, 3.0);
    Rng rng(21);
    for (ScanBelief origin : {ScanBelief{0.1, 0.6}, ScanBelief{0.0025, 0.095}, ScanBelief{0.5, 0.1}}) {
        RefineBelief b{origin.p11, origin.pmix / 2, origin.pmix / 2};
        const double r_a = b.r11 / b.r10;
        const double r_b = b.r01 / b.r00();
        double lam = 0.0;
        for (int k = 0; k < 60; ++k) {
            const double x = (k % 3 == 0 ? pair.f1() : pair.f0()).sample(rng);
            b = refine_update(b, x, pair);
            lam += pair.log_likelihood_ratio(x);
            expect_refine_near(b, embed(origin, lam), 1e-10);
            if (b.r10 > 1e-12) {
                EXPECT_NEAR(b.r11 / b.r10 / r_a, 1.0, 1e-9);
            }
            if (b.r00() > 1e-12) {
                EXPECT_NEAR(b.r01 / b.r00() / r_b, 1.0, 1e-9);
            }
        }
    }
}

TEST(Marginals, Values) {
    auto m = marginals({1.0, 0.0, 0.0});
    EXPECT_DOUBLE_EQ(m.pi_a, 1.0);
    EXPECT_DOUBLE_EQ(m.pi_b, 1.0);
    m = marginals({0.0, 0.5, 0.5});
    EXPECT_DOUBLE_EQ(m.pi_a, 0.5);
    EXPECT_DOUBLE_EQ(m.pi_b, 0.5);
    m = marginals({0.2, 0.3, 0.1});
    EXPECT_DOUBLE_EQ(m.pi_a, 0.5);
    EXPECT_DOUBLE_EQ(m.pi_b, 0.30000000000000004);
}

TEST(StopCost, ClosedFormMatchesEmbedding) {
    for (double lam : {-5.0, -0.3, 0.0, 0.7, 9.0}) {
        for (ScanBelief o : {ScanBelief{0.2, 0.6}, ScanBelief{0.0, 1.0}, ScanBelief{0.01, 0.02}}) {
            EXPECT_NEAR(refine_stop_cost(o, lam), stop_cost(embed(o, lam)), 1e-14);
            EXPECT_NEAR(refine_pi_a(o, lam), marginals(embed(o, lam)).pi_a, 1e-14);
        }
    }
    EXPECT_DOUBLE_EQ(refine_stop_cost({1.0, 0.0}, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(refine_stop_cost({0.0, 0.0}, 0.0), 1.0);
}
