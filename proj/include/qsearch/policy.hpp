#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "qsearch/dp.hpp"

namespace qsearch {

// Barycentric interpolation error of the solved surfaces at the default grid
// resolution (M = 201); used as the equality slack when comparing surfaces.
inline constexpr double kInterpolationTolerance = 1e-4;
inline constexpr double kRegionEpsilon = 1e-9 + kInterpolationTolerance;

// Stopping region R_tau (g = V_s) and switching region R_phi (A_c > A_s) on
// the grid nodes. Switching is strict: a tie between A_c and A_s keeps the
// current pair.
struct PolicyRegions {
    std::vector<std::uint8_t> stop_mask;
    std::vector<std::uint8_t> switch_mask;
    double a_s = 0.0;
    double epsilon = kRegionEpsilon;

    std::size_t stop_count() const;
    std::size_t switch_count() const;
};

PolicyRegions extract_regions(const ScanningSolution& scan, const RefinementSolution& refinement);

enum class ScanDecision { stop_scanning, continue_scanning, switch_pair };
enum class RefineDecision { stop_refining, continue_refining };
enum class Declaration { sequence_a, sequence_b };

// pi_a > pi_b at embed(origin, log_lr) declares a; ties declare b.
Declaration final_decision(const ScanBelief& origin, double log_lr);

// The optimal mixed-observation search rule assembled from solved surfaces.
class MixedPolicy {
public:
    MixedPolicy(ModelParams params, std::shared_ptr<const RefinementSolution> refinement,
                ScanningSolution scanning);

    const ModelParams& params() const noexcept { return params_; }
    const MixedDensities& mixed() const noexcept { return mixed_; }
    const RefinementSolution& refinement() const noexcept { return *refinement_; }
    const ScanningSolution& scanning() const noexcept { return scanning_; }
    const PolicyRegions& regions() const noexcept { return regions_; }

    // Off-node beliefs re-apply the region inequalities to interpolated
    // surfaces. Stopping takes precedence over switching.
    ScanDecision scan_decide(const ScanBelief& belief) const;
    RefineDecision refine_decide(const ScanBelief& origin, double log_lr) const;

    double value_at_prior() const;

private:
    ModelParams params_;
    MixedDensities mixed_;
    std::shared_ptr<const RefinementSolution> refinement_;
    ScanningSolution scanning_;
    PolicyRegions regions_;
};

// Solves refinement and scanning for `params` and assembles the policy.
MixedPolicy build_mixed_policy(const ModelParams& params, const SolverSettings& settings);

// Single-observation strategy: observe one sequence at a time, abandon it
// when its posterior drops to the prior, declare it once the posterior
// reaches pi_upper.
struct BaselinePolicy {
    ModelParams params;
    double pi_upper = 1.0;
    std::optional<BaselineSolution> table;

    enum class Decision { stop, keep, switch_sequence };

    // Decision at posterior log-odds `log_odds`.
    Decision decide(double log_odds) const;
};

BaselinePolicy baseline_from_solution(const ModelParams& params, BaselineSolution solution);

// Bisection on pi_upper so that the Monte-Carlo error rate of the baseline
// (trials seeded from `seed`) matches `target_error`.
BaselinePolicy calibrate_baseline(const ModelParams& params, double target_error,
                                  std::int64_t trials, std::uint64_t seed);

}  // namespace qsearch
