#include "qsearch/belief.hpp"

#include <algorithm>
#include <cmath>

#include "qsearch/errors.hpp"

namespace qsearch {

ScanBelief scan_posterior(const ScanBelief& belief, double l00, double lm, double l11) {
    const double w11 = belief.p11 * l11;
    const double wm = belief.pmix * lm;
    const double w00 = belief.p00() * l00;
    const double total = w11 + wm + w00;
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw DegenerateObservation("scan update: observation has zero predictive density");
    }
    return ScanBelief{w11 / total, wm / total};
}

ScanBelief scan_update(const ScanBelief& belief, double z, bool switched, const ScanBelief& prior,
                       const MixedDensities& mixed) {
    const ScanBelief& from = switched ? prior : belief;
    return scan_posterior(from, mixed.f00.pdf(z), mixed.fm.pdf(z), mixed.f11.pdf(z));
}

double scan_predictive(const ScanBelief& belief, double z, const MixedDensities& mixed) {
    return belief.p00() * mixed.f00.pdf(z) + belief.pmix * mixed.fm.pdf(z) +
           belief.p11 * mixed.f11.pdf(z);
}

RefineBelief refine_posterior(const RefineBelief& belief, double l0, double l1) {
    const double w11 = belief.r11 * l1;
    const double w10 = belief.r10 * l1;
    const double w01 = belief.r01 * l0;
    const double w00 = belief.r00() * l0;
    const double total = w11 + w10 + w01 + w00;
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw DegenerateObservation("refine update: observation has zero density");
    }
    return RefineBelief{w11 / total, w10 / total, w01 / total};
}

RefineBelief refine_update(const RefineBelief& belief, double x, const DensityPair& pair) {
    const double l0 = pair.f0().pdf(x);
    const double l1 = pair.f1().pdf(x);
    if (l0 <= 0.0 && l1 <= 0.0) {
        throw DegenerateObservation("refine update: observation has zero density");
    }
    if (pair.kind() == DensityKind::gaussian) {
        // Scale by f0 to keep far-tail observations from underflowing both.
        const double lr = std::exp(std::clamp(pair.log_likelihood_ratio(x), -kLogLrClamp,
                                              kLogLrClamp));
        return refine_posterior(belief, 1.0, lr);
    }
    return refine_posterior(belief, l0, l1);
}

RefineBelief embed(const ScanBelief& origin, double log_lr) {
    const double lambda = std::exp(std::clamp(log_lr, -kLogLrClamp, kLogLrClamp));
    const double half = 0.5 * origin.pmix;
    const double upper = origin.p11 + half;   // mass of {a ~ F1}
    const double lower = half + origin.p00();  // mass of {a ~ F0}
    const double d = upper * lambda + lower;
    return RefineBelief{origin.p11 * lambda / d, half * lambda / d, half / d};
}

double stop_cost(const RefineBelief& b) {
    const auto m = marginals(b);
    return 1.0 - std::max(m.pi_a, m.pi_b);
}

double refine_stop_cost(const ScanBelief& origin, double log_lr) {
    return stop_cost(embed(origin, log_lr));
}

double refine_pi_a(const ScanBelief& origin, double log_lr) {
    return marginals(embed(origin, log_lr)).pi_a;
}

}  // namespace qsearch
