#pragma once

#include "qsearch/model.hpp"
#include "qsearch/simplex.hpp"

namespace qsearch {

// Saturation bound applied to cumulative log likelihood ratios before
// exponentiation; beyond it the belief sits at a vertex to double precision.
inline constexpr double kLogLrClamp = 700.0;

struct Marginals {
    double pi_a = 0.0;
    double pi_b = 0.0;
};

// A refinement trajectory: the scanning belief at tau_1 plus the cumulative
// log likelihood ratio of the observations of sequence a since then.
struct RefineRay {
    ScanBelief origin;
    double log_lr = 0.0;
};

// Bayes step given the three class likelihoods of an observation.
ScanBelief scan_posterior(const ScanBelief& belief, double l00, double lm, double l11);

// One scanning step. With switched = true the update starts from `prior`
// (a fresh pair) instead of `belief`.
ScanBelief scan_update(const ScanBelief& belief, double z, bool switched, const ScanBelief& prior,
                       const MixedDensities& mixed);

// Predictive density of the next mixed observation under `belief`.
double scan_predictive(const ScanBelief& belief, double z, const MixedDensities& mixed);

// Bayes step given f0(x) and f1(x) for an observation of sequence a.
RefineBelief refine_posterior(const RefineBelief& belief, double l0, double l1);

RefineBelief refine_update(const RefineBelief& belief, double x, const DensityPair& pair);

// Closed form of the refinement recursion started at (p11, pmix/2, pmix/2)
// after observations with cumulative log likelihood ratio `log_lr`.
RefineBelief embed(const ScanBelief& origin, double log_lr);
inline RefineBelief embed(const RefineRay& ray) { return embed(ray.origin, ray.log_lr); }

inline Marginals marginals(const RefineBelief& b) { return {b.r11 + b.r10, b.r11 + b.r01}; }

// Minimal error probability when stopping at `b`: 1 - max(pi_a, pi_b).
double stop_cost(const RefineBelief& b);

// Same as stop_cost(embed(origin, log_lr)) without forming the belief.
double refine_stop_cost(const ScanBelief& origin, double log_lr);

// pi_a at embed(origin, log_lr).
double refine_pi_a(const ScanBelief& origin, double log_lr);

}  // namespace qsearch
