#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qsearch/policy.hpp"

namespace qsearch {

inline constexpr std::int64_t kRunawayCap = 10'000'000;

struct TrialRecord {
    std::int64_t tau1 = 0;  // scanning observations (all observations for the baseline)
    std::int64_t tau2 = 0;  // refinement observations
    std::int64_t n_switches = 0;
    Label declared_truth = Label::F0;
    bool correct = false;
    // Sequence ids are assigned in draw order; for the mixed policy the
    // declared id is always one of the pair active at tau_1.
    std::int64_t declared_sequence = 0;
    std::int64_t active_a = 0;
    std::int64_t active_b = 0;
};

struct SimSummary {
    std::int64_t n_trials = 0;
    double c = 0.0;
    double mean_tau1 = 0.0;
    double mean_tau2 = 0.0;
    double mean_delay = 0.0;
    double mean_switches = 0.0;
    double error_rate = 0.0;
    double mean_cost = 0.0;
    double se_tau1 = 0.0;
    double se_tau2 = 0.0;
    double se_delay = 0.0;
    double se_error = 0.0;
    double se_cost = 0.0;
    std::uint64_t seed = 0;
    std::string params_hash;
};

// Seed of trial i in a batch, a counter-based hash of (base_seed, i).
std::uint64_t trial_seed(std::uint64_t base_seed, std::int64_t trial);

TrialRecord run_trial(const MixedPolicy& policy, Rng& rng, std::int64_t trial = 0);
TrialRecord run_baseline_trial(const BaselinePolicy& policy, Rng& rng, std::int64_t trial = 0);

using TrialFn = std::function<TrialRecord(Rng&, std::int64_t)>;

// Runs trials 0..n_trials-1 on `workers` threads and aggregates them in trial
// order, so the result does not depend on the worker count. A failing trial
// rethrows the error of the lowest failing index.
std::vector<TrialRecord> run_trials(const TrialFn& trial, std::int64_t n_trials,
                                    std::uint64_t base_seed, unsigned workers);
SimSummary summarize(const std::vector<TrialRecord>& records, double c, std::uint64_t seed,
                     std::string params_hash);

SimSummary run_batch(const MixedPolicy& policy, std::int64_t n_trials, std::uint64_t base_seed,
                     unsigned workers = 1, std::vector<TrialRecord>* records = nullptr);
SimSummary run_batch(const BaselinePolicy& policy, std::int64_t n_trials,
                     std::uint64_t base_seed, unsigned workers = 1,
                     std::vector<TrialRecord>* records = nullptr);

struct ComparisonReport {
    SimSummary mixed;
    SimSummary baseline;
    double target_error = 0.0;
    double pi_upper = 0.0;
    // 1 - mixed delay / baseline delay; NaN when undefined.
    double savings = 0.0;
    double savings_se = 0.0;
    bool uninformative = false;
};

// Runs the mixed policy, calibrates the baseline to its error rate, then runs
// the baseline on an independent seed stream.
ComparisonReport compare_strategies(const MixedPolicy& policy, std::int64_t n_trials,
                                    std::uint64_t seed, unsigned workers = 1);

struct SweepPoint {
    double snr_db = 0.0;
    std::optional<SimSummary> summary;
    double dp_value = 0.0;  // optimal cost at the prior from the solved surfaces
    std::string error;      // non-empty when this point failed
};

// One solve + batch per SNR; a failing point is reported and the sweep goes on.
std::vector<SweepPoint> sweep_snr(const ModelParams& params, const SolverSettings& settings,
                                  const std::vector<double>& snr_list_db, std::int64_t n_trials,
                                  std::uint64_t seed, unsigned workers = 1);

// Least-squares slope of y on x.
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qsearch
