#include "qsearch/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qsearch/errors.hpp"
#include "qsearch/sim.hpp"

namespace qsearch {

std::size_t PolicyRegions::stop_count() const {
    return static_cast<std::size_t>(std::count(stop_mask.begin(), stop_mask.end(), 1));
}

std::size_t PolicyRegions::switch_count() const {
    return static_cast<std::size_t>(std::count(switch_mask.begin(), switch_mask.end(), 1));
}

PolicyRegions extract_regions(const ScanningSolution& scan, const RefinementSolution& refinement) {
    const auto& g = refinement.g();
    if (!(g.grid() == scan.vs.grid())) {
        throw ConfigError("regions: refinement and scanning grids differ");
    }
    PolicyRegions regions;
    regions.a_s = scan.a_s;
    const std::size_t n = g.grid().size();
    regions.stop_mask.assign(n, 0);
    regions.switch_mask.assign(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
        const bool stop = g[k] <= scan.vs[k] + regions.epsilon;
        regions.stop_mask[k] = stop ? 1 : 0;
        regions.switch_mask[k] = !stop && scan.ac[k] > scan.a_s + regions.epsilon ? 1 : 0;
    }
    if (regions.stop_count() == 0) {
        throw SolverInconsistency("empty stopping region: g = V_s must hold at (1, 0)");
    }
    return regions;
}

Declaration final_decision(const ScanBelief& origin, double log_lr) {
    const auto m = marginals(embed(origin, log_lr));
    return m.pi_a > m.pi_b ? Declaration::sequence_a : Declaration::sequence_b;
}

MixedPolicy::MixedPolicy(ModelParams params, std::shared_ptr<const RefinementSolution> refinement,
                         ScanningSolution scanning)
    : params_(std::move(params)),
      mixed_(mixed_densities(params_)),
      refinement_(std::move(refinement)),
      scanning_(std::move(scanning)),
      regions_(extract_regions(scanning_, *refinement_)) {
    if (std::abs(refinement_->cost() - params_.c) > 0.0) {
        throw ConfigError("policy: refinement solved for a different cost");
    }
}

ScanDecision MixedPolicy::scan_decide(const ScanBelief& belief) const {
    const double g = refinement_->g()(belief);
    const double vs = scanning_.vs(belief);
    if (g <= vs + regions_.epsilon) return ScanDecision::stop_scanning;
    if (scanning_.ac(belief) > scanning_.a_s + regions_.epsilon) return ScanDecision::switch_pair;
    return ScanDecision::continue_scanning;
}

RefineDecision MixedPolicy::refine_decide(const ScanBelief& origin, double log_lr) const {
    const double stop = refine_stop_cost(origin, log_lr);
    if (stop <= refinement_->continuation(origin, log_lr)) return RefineDecision::stop_refining;
    return RefineDecision::continue_refining;
}

double MixedPolicy::value_at_prior() const {
    return scanning_.value_at_prior(refinement_->g(), params_.c);
}

MixedPolicy build_mixed_policy(const ModelParams& params, const SolverSettings& settings) {
    auto refinement = std::make_shared<const RefinementSolution>(solve_refinement(params, settings));
    auto scanning = solve_scanning(params, mixed_densities(params), *refinement, settings);
    return MixedPolicy(params, std::move(refinement), std::move(scanning));
}

BaselinePolicy::Decision BaselinePolicy::decide(double log_odds) const {
    // Thresholds sit on the lattice logit(pi) + sum of log LRs; the slack
    // absorbs rounding in the accumulated sum so that a tie stops.
    constexpr double slack = 1e-9;
    if (log_odds >= logit(pi_upper) - slack) return Decision::stop;
    if (log_odds <= logit(params.pi) + slack) return Decision::switch_sequence;
    return Decision::keep;
}

BaselinePolicy baseline_from_solution(const ModelParams& params, BaselineSolution solution) {
    BaselinePolicy policy;
    policy.params = params;
    policy.pi_upper = solution.pi_upper;
    policy.table = std::move(solution);
    return policy;
}

BaselinePolicy calibrate_baseline(const ModelParams& params, double target_error,
                                  std::int64_t trials, std::uint64_t seed) {
    params.validate();
    if (!(target_error > 0.0 && target_error < 1.0)) {
        throw CalibrationError("target error must lie in (0, 1)");
    }
    if (trials < 1) throw CalibrationError("calibration needs at least one trial");

    BaselinePolicy policy;
    policy.params = params;
    auto error_at = [&](double log_odds_upper) {
        policy.pi_upper = logistic(log_odds_upper);
        return run_batch(policy, trials, seed).error_rate;
    };
    const double band =
        3.0 * std::sqrt(target_error * (1.0 - target_error) / static_cast<double>(trials)) +
        1.0 / static_cast<double>(trials);

    double lo = logit(params.pi);
    double hi = logit(1.0 - 1e-12);
    const double floor_error = error_at(hi);
    if (floor_error > target_error + band) {
        throw CalibrationError("target error " + std::to_string(target_error) +
                               " is below the achievable floor " + std::to_string(floor_error));
    }
    if (error_at(lo) <= target_error) {
        policy.pi_upper = params.pi;
        return policy;
    }
    // Invariant: error(lo) > target >= error(hi) (up to the floor band).
    for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (error_at(mid) > target_error) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double achieved = error_at(hi);
    if (std::abs(achieved - target_error) > band) {
        throw CalibrationError("calibrated error " + std::to_string(achieved) +
                               " is outside the band around " + std::to_string(target_error));
    }
    policy.pi_upper = logistic(hi);
    return policy;
}

}  // namespace qsearch
