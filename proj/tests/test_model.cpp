#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "qsearch/errors.hpp"
#include "qsearch/model.hpp"
#include "qsearch/quadrature.hpp"

using namespace qsearch;

namespace {

double sample_variance(const Density& d, int n, std::uint64_t seed) {
    Rng rng(seed);
    double s = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = d.sample(rng);
        s += x;
        s2 += x * x;
    }
    const double m = s / n;
    return (s2 - n * m * m) / (n - 1);
}

// Narrow triangle of unit mass centred on grid node `at`.
std::vector<double> spike(std::size_t n, std::size_t at, double dx) {
    std::vector<double> f(n, 0.0);
    f[at] = 1.0 / dx;
    return f;
}

}  // namespace

TEST(DensityPair, GaussianParametrization) {
    const auto pair = DensityPair::gaussian_snr_db(1.0, 3.0);
    EXPECT_NEAR(pair.signal_power(), std::pow(10.0, 0.3), 1e-12);
    EXPECT_NEAR(pair.f1().variance(), 1.0 + std::pow(10.0, 0.3), 1e-12);
    EXPECT_NEAR(pair.snr_db(), 3.0, 1e-12);
    EXPECT_DOUBLE_EQ(pair.f0().variance(), 1.0);
    EXPECT_THROW(DensityPair::gaussian(0.0, 1.0), ConfigError);
    EXPECT_THROW(DensityPair::gaussian(1.0, -1.0), ConfigError);
}

TEST(DensityPair, LikelihoodRatio) {
    const auto pair = DensityPair::gaussian(1.0, 3.0);
    // log f1/f0 = -0.5 log 4 + x^2 (1 - 1/4) / 2
    EXPECT_NEAR(pair.log_likelihood_ratio(2.0), -0.5 * std::log(4.0) + 4.0 * 0.375, 1e-12);
    const auto toy = DensityPair::discrete({0.8, 0.2}, {0.2, 0.8});
    EXPECT_NEAR(toy.log_likelihood_ratio(1.0), std::log(4.0), 1e-15);
    EXPECT_NEAR(toy.log_likelihood_ratio(0.0), -std::log(4.0), 1e-15);
    EXPECT_FALSE(toy.uninformative());
    EXPECT_TRUE(DensityPair::gaussian(1.0, 0.0).uninformative());
}

TEST(DensityPair, TabulatedValidation) {
    const double dx = 0.1;
    std::vector<double> uni(11, 1.0);  // uniform on [0, 1]
    EXPECT_NO_THROW(DensityPair::tabulated(0.0, dx, std::vector<double>(21, 0.5),
                                           std::vector<double>(21, 0.5)));
    EXPECT_THROW(DensityPair::tabulated(0.0, dx, uni, uni), ConfigError);  // too coarse
    std::vector<double> bad(21, 0.6);
    EXPECT_THROW(DensityPair::tabulated(0.0, dx, bad, std::vector<double>(21, 0.5)), ConfigError);
    std::vector<double> neg(21, 0.5);
    neg[3] = -0.1;
    neg[4] = 0.7;
    EXPECT_THROW(DensityPair::tabulated(0.0, dx, neg, std::vector<double>(21, 0.5)), ConfigError);
}

TEST(ModelParams, Validation) {
    ModelParams p;
    EXPECT_NO_THROW(p.validate());
    p.pi = 0.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p.pi = 1.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p.pi = 0.5;
    p.c = 0.0;
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(MixedDensities, GaussianWithoutSignalCollapse) {
    const auto m = mixed_densities(DensityPair::gaussian(1.0, 0.0));
    for (double z : {-3.0, -0.5, 0.0, 1.2, 4.0}) {
        EXPECT_NEAR(m.f00.pdf(z), m.fm.pdf(z), 1e-12);
        EXPECT_NEAR(m.f00.pdf(z), m.f11.pdf(z), 1e-12);
    }
    EXPECT_DOUBLE_EQ(m.f00.variance(), 2.0);
}

TEST(MixedDensities, GaussianAtThreeDb) {
    const auto m = mixed_densities(DensityPair::gaussian_snr_db(1.0, 3.0));
    const double p = std::pow(10.0, 0.3);
    EXPECT_NEAR(m.fm.variance(), 2.0 + p, 1e-12);
    EXPECT_NEAR(m.fm.variance(), 3.9953, 1e-4);
    EXPECT_NEAR(m.f11.variance(), 5.9906, 1e-4);
}

TEST(MixedDensities, GaussianMassOverEightSigma) {
    const auto m = mixed_densities(DensityPair::gaussian_snr_db(1.0, 3.0));
    for (const Density* d : {&m.f00, &m.fm, &m.f11}) {
        const double half = 8.0 * std::sqrt(d->variance());
        const auto rule = composite_gauss_legendre(-half, half, 256);
        double mass = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) mass += rule.weights[q] * d->pdf(rule.nodes[q]);
        EXPECT_NEAR(mass, 1.0, 1e-8);
    }
}

TEST(MixedDensities, TabulatedShiftedMassesConvolve) {
    const double dx = 0.05;
    const double x0 = -1.0;
    const std::size_t n = 81;  // [-1, 3]
    const auto pair = DensityPair::tabulated(x0, dx, spike(n, 20, dx), spike(n, 40, dx));
    const auto m = mixed_densities(pair);
    EXPECT_NEAR(m.f11.mean(), 2.0, 1e-9);
    EXPECT_NEAR(m.fm.mean(), 1.0, 1e-9);
    EXPECT_NEAR(m.f00.mean(), 0.0, 1e-9);
    for (const Density* d : {&m.f00, &m.fm, &m.f11}) EXPECT_NEAR(d->total_mass(), 1.0, 1e-6);
}

TEST(MixedDensities, DiscreteToy) {
    const auto m = mixed_densities(DensityPair::discrete({0.8, 0.2}, {0.2, 0.8}));
    const std::vector<double> f00{0.64, 0.32, 0.04};
    const std::vector<double> fm{0.16, 0.68, 0.16};
    const std::vector<double> f11{0.04, 0.32, 0.64};
    for (int z = 0; z < 3; ++z) {
        EXPECT_NEAR(m.f00.pdf(z), f00[static_cast<std::size_t>(z)], 1e-15);
        EXPECT_NEAR(m.fm.pdf(z), fm[static_cast<std::size_t>(z)], 1e-15);
        EXPECT_NEAR(m.f11.pdf(z), f11[static_cast<std::size_t>(z)], 1e-15);
    }
}

TEST(ScanPrior, Values) {
    const auto a = scan_prior(0.05);
    EXPECT_NEAR(a.p11, 0.0025, 1e-15);
    EXPECT_NEAR(a.pmix, 0.095, 1e-15);
    EXPECT_NEAR(a.p00(), 0.9025, 1e-15);
    const auto b = scan_prior(0.5);
    EXPECT_DOUBLE_EQ(b.p11, 0.25);
    EXPECT_DOUBLE_EQ(b.pmix, 0.5);
    const auto c = scan_prior(1.0);
    EXPECT_DOUBLE_EQ(c.p11, 1.0);
    EXPECT_DOUBLE_EQ(c.pmix, 0.0);
}

TEST(SamplePairTruth, Extremes) {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const auto t0 = sample_pair_truth(0.0, rng);
        EXPECT_EQ(t0.a, Label::F0);
        EXPECT_EQ(t0.b, Label::F0);
        const auto t1 = sample_pair_truth(1.0, rng);
        EXPECT_EQ(t1.a, Label::F1);
        EXPECT_EQ(t1.b, Label::F1);
    }
}

TEST(SamplePairTruth, AtLeastOneSignalFrequency) {
    Rng rng(11);
    const int n = 1'000'000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        const auto t = sample_pair_truth(0.05, rng);
        hits += (t.a == Label::F1 || t.b == Label::F1) ? 1 : 0;
    }
    const double p = 1.0 - 0.95 * 0.95;
    EXPECT_NEAR(static_cast<double>(hits) / n, p, 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(SampleObservation, GaussianVariances) {
    const auto pair = DensityPair::gaussian_snr_db(1.0, 3.0);
    const auto m = mixed_densities(pair);
    EXPECT_NEAR(sample_variance(Density::normal(2.0), 100000, 1), 2.0, 0.1);
    for (const Density* d : {&m.f00, &m.fm, &m.f11}) {
        EXPECT_NEAR(sample_variance(*d, 100000, 2) / d->variance(), 1.0, 0.05);
    }
}

TEST(SampleObservation, TabulatedUniformMean) {
    const auto u = Density::tabulated(0.0, 0.05, std::vector<double>(21, 1.0));
    Rng rng(5);
    const int n = 100000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = sample_observation(u, rng);
        ASSERT_GE(x, 0.0);
        ASSERT_LE(x, 1.0);
        s += x;
    }
    EXPECT_NEAR(s / n, 0.5, 3.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(SampleObservation, TabulatedTriangleMatchesMoments) {
    // Triangle on [0, 2] peaking at 1: mean 1, variance 1/6.
    const double dx = 0.01;
    std::vector<double> f(201);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 1.0 - std::abs(static_cast<double>(i) * dx - 1.0);
    const auto tri = Density::tabulated(0.0, dx, f);
    EXPECT_NEAR(tri.mean(), 1.0, 1e-9);
    EXPECT_NEAR(sample_variance(tri, 100000, 9), 1.0 / 6.0, 0.05 / 6.0);
}

TEST(SampleObservation, DiscreteFrequencies) {
    const auto d = Density::discrete({0.16, 0.68, 0.16});
    Rng rng(8);
    std::array<int, 3> counts{};
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = d.sample(rng);
        counts[static_cast<std::size_t>(x)]++;
    }
    EXPECT_NEAR(counts[1] / static_cast<double>(n), 0.68, 0.005);
}
