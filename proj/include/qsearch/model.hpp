#pragma once

#include <cstdint>
#include <vector>

#include "qsearch/density.hpp"
#include "qsearch/simplex.hpp"

namespace qsearch {

// The pair (f0, f1) of per-sequence observation densities.
class DensityPair {
public:
    // f0 = N(0, sigma2), f1 = N(0, sigma2 + signal_power).
    static DensityPair gaussian(double sigma2, double signal_power);
    // Same, with the signal power given as 10 log10(P / sigma2).
    static DensityPair gaussian_snr_db(double sigma2, double snr_db);
    // Both densities on the shared grid x0 + i*dx; each must integrate to
    // 1 within 1e-9 under the trapezoid rule.
    static DensityPair tabulated(double x0, double dx, std::vector<double> f0,
                                 std::vector<double> f1);
    // pmfs on {0, ..., K-1}; each must sum to 1 within 1e-9.
    static DensityPair discrete(std::vector<double> pmf0, std::vector<double> pmf1);

    DensityKind kind() const noexcept { return f0_.kind(); }
    const Density& f0() const noexcept { return f0_; }
    const Density& f1() const noexcept { return f1_; }

    // Gaussian parameters (zero for other kinds).
    double sigma2() const noexcept { return sigma2_; }
    double signal_power() const noexcept { return signal_power_; }
    double snr_db() const;

    // log f1(x) / f0(x); +inf / -inf where exactly one density vanishes.
    // Throws DegenerateObservation where both vanish.
    double log_likelihood_ratio(double x) const;

    // True when f0 and f1 coincide, so observations carry no information.
    bool uninformative() const;

private:
    DensityPair(Density f0, Density f1, double sigma2, double signal_power)
        : f0_(std::move(f0)), f1_(std::move(f1)), sigma2_(sigma2), signal_power_(signal_power) {}

    Density f0_;
    Density f1_;
    double sigma2_ = 0.0;
    double signal_power_ = 0.0;
};

double snr_db_to_power(double sigma2, double snr_db);

struct ModelParams {
    double pi = 0.05;  // prior P(sequence ~ F1)
    double c = 0.01;   // cost per observation
    DensityPair densities = DensityPair::gaussian_snr_db(1.0, 3.0);
    std::uint64_t rng_seed = 1;

    // Throws ConfigError unless 0 < pi < 1 and c > 0.
    void validate() const;
};

// Densities of Z = Y^a + Y^b for the three label classes of a pair.
struct MixedDensities {
    Density f00;
    Density fm;
    Density f11;
};

MixedDensities mixed_densities(const DensityPair& pair);
inline MixedDensities mixed_densities(const ModelParams& params) {
    return mixed_densities(params.densities);
}

// (pi^2, 2 pi (1 - pi)); p00 = (1 - pi)^2 is implied.
ScanBelief scan_prior(double pi);
inline ScanBelief scan_prior(const ModelParams& params) { return scan_prior(params.pi); }

enum class Label : std::uint8_t { F0 = 0, F1 = 1 };

struct PairTruth {
    Label a = Label::F0;
    Label b = Label::F0;
};

// Each label is F1 independently with probability pi (pi in [0, 1]).
PairTruth sample_pair_truth(double pi, Rng& rng);

inline double sample_observation(const Density& density, Rng& rng) { return density.sample(rng); }

}  // namespace qsearch
