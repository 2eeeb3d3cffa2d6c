#include "qsearch/sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "qsearch/errors.hpp"
#include "qsearch/io.hpp"

namespace qsearch {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

const Density& density_of(const DensityPair& pair, Label label) {
    return label == Label::F1 ? pair.f1() : pair.f0();
}

double accumulate_llr(double log_lr, double increment) {
    return std::clamp(log_lr + increment, -kLogLrClamp, kLogLrClamp);
}

struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double x) {
        sum += x;
        sum_sq += x * x;
    }
    double mean(double n) const { return sum / n; }
    double se(double n) const {
        if (n < 2.0) return 0.0;
        const double m = sum / n;
        const double var = std::max(0.0, (sum_sq - n * m * m) / (n - 1.0));
        return std::sqrt(var / n);
    }
};

}  // namespace

std::uint64_t trial_seed(std::uint64_t base_seed, std::int64_t trial) {
    return splitmix64(splitmix64(base_seed) ^ static_cast<std::uint64_t>(trial));
}

TrialRecord run_trial(const MixedPolicy& policy, Rng& rng, std::int64_t trial) {
    const auto& params = policy.params();
    const auto& pair = params.densities;
    const ScanBelief prior = scan_prior(params);

    TrialRecord rec;
    PairTruth truth = sample_pair_truth(params.pi, rng);
    std::int64_t next_id = 2;
    rec.active_a = 0;
    rec.active_b = 1;
    ScanBelief belief = prior;

    for (;;) {
        const auto decision = policy.scan_decide(belief);
        if (decision == ScanDecision::stop_scanning) break;
        const bool switched = decision == ScanDecision::switch_pair;
        if (switched) {
            truth = sample_pair_truth(params.pi, rng);
            rec.active_a = next_id++;
            rec.active_b = next_id++;
            ++rec.n_switches;
        }
        const double z = density_of(pair, truth.a).sample(rng) + density_of(pair, truth.b).sample(rng);
        belief = scan_update(belief, z, switched, prior, policy.mixed());
        if (++rec.tau1 >= kRunawayCap) throw RunawayTrial(trial, kRunawayCap);
    }

    const ScanBelief origin = belief;
    double log_lr = 0.0;
    while (policy.refine_decide(origin, log_lr) == RefineDecision::continue_refining) {
        const double x = density_of(pair, truth.a).sample(rng);
        log_lr = accumulate_llr(log_lr, pair.log_likelihood_ratio(x));
        if (rec.tau1 + ++rec.tau2 >= kRunawayCap) throw RunawayTrial(trial, kRunawayCap);
    }

    if (final_decision(origin, log_lr) == Declaration::sequence_a) {
        rec.declared_truth = truth.a;
        rec.declared_sequence = rec.active_a;
    } else {
        rec.declared_truth = truth.b;
        rec.declared_sequence = rec.active_b;
    }
    rec.correct = rec.declared_truth == Label::F1;
    return rec;
}

TrialRecord run_baseline_trial(const BaselinePolicy& policy, Rng& rng, std::int64_t trial) {
    const auto& params = policy.params;
    const auto& pair = params.densities;
    const double prior_log_odds = logit(params.pi);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    TrialRecord rec;
    Label truth = unif(rng) < params.pi ? Label::F1 : Label::F0;
    std::int64_t id = 0;
    std::int64_t observed = 0;  // observations of the current sequence
    double log_odds = prior_log_odds;

    for (;;) {
        const auto decision = policy.decide(log_odds);
        if (decision == BaselinePolicy::Decision::stop) break;
        if (decision == BaselinePolicy::Decision::switch_sequence && observed > 0) {
            truth = unif(rng) < params.pi ? Label::F1 : Label::F0;
            ++id;
            ++rec.n_switches;
            observed = 0;
            log_odds = prior_log_odds;
        }
        const double x = density_of(pair, truth).sample(rng);
        log_odds = accumulate_llr(log_odds, pair.log_likelihood_ratio(x));
        ++observed;
        if (++rec.tau1 >= kRunawayCap) throw RunawayTrial(trial, kRunawayCap);
    }
    rec.declared_truth = truth;
    rec.declared_sequence = id;
    rec.active_a = id;
    rec.active_b = id;
    rec.correct = truth == Label::F1;
    return rec;
}

std::vector<TrialRecord> run_trials(const TrialFn& trial, std::int64_t n_trials,
                                    std::uint64_t base_seed, unsigned workers) {
    if (n_trials < 1) throw ConfigError("need at least one trial");
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n_trials)));
    std::vector<TrialRecord> records(static_cast<std::size_t>(n_trials));
    std::vector<std::exception_ptr> failures(workers);
    std::vector<std::int64_t> failed_at(workers, std::numeric_limits<std::int64_t>::max());

    auto work = [&](unsigned w) {
        for (std::int64_t i = w; i < n_trials; i += workers) {
            try {
                Rng rng(trial_seed(base_seed, i));
                records[static_cast<std::size_t>(i)] = trial(rng, i);
            } catch (...) {
                failures[w] = std::current_exception();
                failed_at[w] = i;
                return;
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    const auto first = std::min_element(failed_at.begin(), failed_at.end());
    if (failures[static_cast<std::size_t>(first - failed_at.begin())]) {
        std::rethrow_exception(failures[static_cast<std::size_t>(first - failed_at.begin())]);
    }
    return records;
}

SimSummary summarize(const std::vector<TrialRecord>& records, double c, std::uint64_t seed,
                     std::string params_hash) {
    Moments tau1;
    Moments tau2;
    Moments delay;
    Moments errors;
    Moments cost;
    double switches = 0.0;
    for (const auto& r : records) {
        const auto d = static_cast<double>(r.tau1 + r.tau2);
        const double e = r.correct ? 0.0 : 1.0;
        tau1.add(static_cast<double>(r.tau1));
        tau2.add(static_cast<double>(r.tau2));
        delay.add(d);
        errors.add(e);
        cost.add(c * d + e);
        switches += static_cast<double>(r.n_switches);
    }
    const auto n = static_cast<double>(records.size());
    SimSummary s;
    s.n_trials = static_cast<std::int64_t>(records.size());
    s.c = c;
    s.mean_tau1 = tau1.mean(n);
    s.mean_tau2 = tau2.mean(n);
    s.mean_delay = delay.mean(n);
    s.mean_switches = switches / n;
    s.error_rate = errors.mean(n);
    s.mean_cost = c * s.mean_delay + s.error_rate;
    s.se_tau1 = tau1.se(n);
    s.se_tau2 = tau2.se(n);
    s.se_delay = delay.se(n);
    s.se_error = errors.se(n);
    s.se_cost = cost.se(n);
    s.seed = seed;
    s.params_hash = std::move(params_hash);
    return s;
}

SimSummary run_batch(const MixedPolicy& policy, std::int64_t n_trials, std::uint64_t base_seed,
                     unsigned workers, std::vector<TrialRecord>* records) {
    auto recs = run_trials([&policy](Rng& rng, std::int64_t i) { return run_trial(policy, rng, i); },
                           n_trials, base_seed, workers);
    auto summary = summarize(recs, policy.params().c, base_seed, model_hash(policy.params()));
    if (records) *records = std::move(recs);
    return summary;
}

SimSummary run_batch(const BaselinePolicy& policy, std::int64_t n_trials,
                     std::uint64_t base_seed, unsigned workers,
                     std::vector<TrialRecord>* records) {
    auto recs = run_trials(
        [&policy](Rng& rng, std::int64_t i) { return run_baseline_trial(policy, rng, i); },
        n_trials, base_seed, workers);
    auto summary = summarize(recs, policy.params.c, base_seed, model_hash(policy.params));
    if (records) *records = std::move(recs);
    return summary;
}

ComparisonReport compare_strategies(const MixedPolicy& policy, std::int64_t n_trials,
                                    std::uint64_t seed, unsigned workers) {
    const auto& params = policy.params();
    ComparisonReport report;
    report.mixed = run_batch(policy, n_trials, seed, workers);
    report.target_error = report.mixed.error_rate;

    const std::uint64_t calibration_seed = splitmix64(seed ^ 0x63616c6962726174ULL);
    const std::uint64_t baseline_seed = splitmix64(seed ^ 0x626173656c696e65ULL);

    BaselinePolicy baseline;
    baseline.params = params;
    if (params.densities.uninformative()) {
        report.uninformative = true;
        baseline.pi_upper = params.pi;
    } else {
        baseline = calibrate_baseline(params, report.target_error, n_trials, calibration_seed);
    }
    report.pi_upper = baseline.pi_upper;
    report.baseline = run_batch(baseline, n_trials, baseline_seed, workers);

    const double m = report.mixed.mean_delay;
    const double b = report.baseline.mean_delay;
    if (report.uninformative || !(b > 0.0) || !(m > 0.0)) {
        report.savings = std::numeric_limits<double>::quiet_NaN();
        report.savings_se = std::numeric_limits<double>::quiet_NaN();
    } else {
        const double ratio = m / b;
        report.savings = 1.0 - ratio;
        report.savings_se = ratio * std::sqrt(std::pow(report.mixed.se_delay / m, 2) +
                                              std::pow(report.baseline.se_delay / b, 2));
    }
    return report;
}

std::vector<SweepPoint> sweep_snr(const ModelParams& params, const SolverSettings& settings,
                                  const std::vector<double>& snr_list_db, std::int64_t n_trials,
                                  std::uint64_t seed, unsigned workers) {
    if (params.densities.kind() != DensityKind::gaussian) {
        throw ConfigError("SNR sweep requires the Gaussian model");
    }
    std::vector<SweepPoint> out;
    for (double snr : snr_list_db) {
        SweepPoint point;
        point.snr_db = snr;
        try {
            ModelParams p = params;
            p.densities = DensityPair::gaussian_snr_db(params.densities.sigma2(), snr);
            const auto policy = build_mixed_policy(p, settings);
            point.dp_value = policy.value_at_prior();
            point.summary = run_batch(policy, n_trials, seed, workers);
        } catch (const std::exception& e) {
            point.error = e.what();
        }
        out.push_back(std::move(point));
    }
    return out;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw ConfigError("slope needs at least two paired points");
    }
    const auto n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw ConfigError("slope undefined for constant x");
    return sxy / sxx;
}

}  // namespace qsearch
