#include "qsearch/model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qsearch/errors.hpp"

namespace qsearch {

namespace {

constexpr double kNormTolerance = 1e-9;
constexpr std::size_t kMinTabulatedPoints = 16;

void require_unit_mass(double mass, const char* what) {
    if (std::abs(mass - 1.0) > kNormTolerance) {
        throw ConfigError(std::string(what) + ": density must integrate to 1 (got " +
                          std::to_string(mass) + ")");
    }
}

}  // namespace

double snr_db_to_power(double sigma2, double snr_db) {
    return sigma2 * std::pow(10.0, snr_db / 10.0);
}

DensityPair DensityPair::gaussian(double sigma2, double signal_power) {
    if (!(sigma2 > 0.0)) throw ConfigError("sigma2 must be positive");
    if (!(signal_power >= 0.0) || !std::isfinite(signal_power)) {
        throw ConfigError("signal power must be finite and nonnegative");
    }
    return DensityPair(Density::normal(sigma2), Density::normal(sigma2 + signal_power), sigma2,
                       signal_power);
}

DensityPair DensityPair::gaussian_snr_db(double sigma2, double snr_db) {
    if (!std::isfinite(snr_db)) throw ConfigError("SNR must be finite");
    return gaussian(sigma2, snr_db_to_power(sigma2, snr_db));
}

DensityPair DensityPair::tabulated(double x0, double dx, std::vector<double> f0,
                                   std::vector<double> f1) {
    if (f0.size() != f1.size()) throw ConfigError("tabulated densities must share one grid");
    if (f0.size() < kMinTabulatedPoints) {
        throw ConfigError("tabulated support too coarse: need at least 16 grid points");
    }
    auto d0 = Density::tabulated(x0, dx, std::move(f0));
    auto d1 = Density::tabulated(x0, dx, std::move(f1));
    require_unit_mass(d0.total_mass(), "f0");
    require_unit_mass(d1.total_mass(), "f1");
    return DensityPair(std::move(d0), std::move(d1), 0.0, 0.0);
}

DensityPair DensityPair::discrete(std::vector<double> pmf0, std::vector<double> pmf1) {
    if (pmf0.size() != pmf1.size()) throw ConfigError("discrete pmfs must share one alphabet");
    auto d0 = Density::discrete(std::move(pmf0));
    auto d1 = Density::discrete(std::move(pmf1));
    require_unit_mass(d0.total_mass(), "f0");
    require_unit_mass(d1.total_mass(), "f1");
    return DensityPair(std::move(d0), std::move(d1), 0.0, 0.0);
}

double DensityPair::snr_db() const {
    if (kind() != DensityKind::gaussian) return std::numeric_limits<double>::quiet_NaN();
    return 10.0 * std::log10(signal_power_ / sigma2_);
}

double DensityPair::log_likelihood_ratio(double x) const {
    if (kind() == DensityKind::gaussian) {
        return f1_.log_pdf(x) - f0_.log_pdf(x);
    }
    const double p0 = f0_.pdf(x);
    const double p1 = f1_.pdf(x);
    if (p0 <= 0.0 && p1 <= 0.0) {
        throw DegenerateObservation("observation has zero density under f0 and f1");
    }
    if (p0 <= 0.0) return std::numeric_limits<double>::infinity();
    if (p1 <= 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(p1) - std::log(p0);
}

bool DensityPair::uninformative() const {
    if (kind() == DensityKind::gaussian) return signal_power_ == 0.0;
    const auto a = f0_.values();
    const auto b = f1_.values();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) return false;
    }
    return true;
}

void ModelParams::validate() const {
    if (!(pi > 0.0 && pi < 1.0)) throw ConfigError("pi must lie in (0, 1)");
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("c must be positive");
}

MixedDensities mixed_densities(const DensityPair& pair) {
    const auto& f0 = pair.f0();
    const auto& f1 = pair.f1();
    if (pair.kind() == DensityKind::tabulated && f0.size() < kMinTabulatedPoints) {
        throw ConfigError("tabulated support too coarse: need at least 16 grid points");
    }
    return MixedDensities{convolve(f0, f0), convolve(f0, f1), convolve(f1, f1)};
}

ScanBelief scan_prior(double pi) { return ScanBelief{pi * pi, 2.0 * pi * (1.0 - pi)}; }

PairTruth sample_pair_truth(double pi, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    PairTruth t;
    t.a = unif(rng) < pi ? Label::F1 : Label::F0;
    t.b = unif(rng) < pi ? Label::F1 : Label::F0;
    return t;
}

}  // namespace qsearch
