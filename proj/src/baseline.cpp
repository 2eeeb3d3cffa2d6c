#include <algorithm>
#include <cmath>

#include "qsearch/dp.hpp"
#include "qsearch/errors.hpp"

namespace qsearch {

double logit(double p) { return std::log(p) - std::log1p(-p); }

double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double BaselineSolution::posterior_at(int i) const { return logistic(prior_logit + grid.at(i)); }

double BaselineSolution::value_at(double posterior) const {
    const int n = grid.size();
    if (posterior >= 1.0) return values.back();
    if (posterior <= 0.0) return values.front();
    double u = (logit(posterior) - prior_logit) / grid.step() + grid.center();
    u = std::clamp(u, 0.0, static_cast<double>(n - 1));
    const int i = std::min(static_cast<int>(std::floor(u)), n - 2);
    const double t = u - i;
    return (1.0 - t) * values[static_cast<std::size_t>(i)] +
           t * values[static_cast<std::size_t>(i) + 1];
}

BaselineSolution solve_baseline(const ModelParams& params, const SolverSettings& settings) {
    params.validate();
    settings.validate();
    BaselineSolution sol;
    sol.grid = LogLrGrid(settings.loglr_bound, settings.loglr_points);
    sol.prior_logit = logit(params.pi);
    const auto kernel = build_loglr_kernel(params.densities, settings.quad, sol.grid);

    const auto n = static_cast<std::size_t>(sol.grid.size());
    const auto centre = static_cast<std::size_t>(sol.grid.center());
    std::vector<double> stop(n);
    std::vector<double> post(n);
    for (std::size_t i = 0; i < n; ++i) {
        post[i] = sol.posterior_at(static_cast<int>(i));
        stop[i] = 1.0 - post[i];
    }

    std::vector<double> v = stop;
    std::vector<double> e0(n);
    std::vector<double> e1(n);
    std::vector<double> cont(n);
    std::vector<double> next(n);
    double switch_value = 0.0;
    auto expectations = [&] {
        kernel.apply(v, e0, e1);
        for (std::size_t i = 0; i < n; ++i) cont[i] = post[i] * e1[i] + (1.0 - post[i]) * e0[i];
        switch_value = cont[centre];
    };

    const int limit = settings.horizon ? *settings.horizon : settings.max_iter;
    if (limit == 0) expectations();
    for (int it = 1; it <= limit; ++it) {
        expectations();
        double residual = 0.0;
        double increase = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = std::min(stop[i], params.c + std::min(cont[i], switch_value));
            residual = std::max(residual, std::abs(next[i] - v[i]));
            increase = std::max(increase, next[i] - v[i]);
        }
        v.swap(next);
        sol.stats.iterations = it;
        sol.stats.residual = residual;
        sol.stats.max_increase = std::max(sol.stats.max_increase, increase);
        if (!settings.horizon && residual < settings.tol) break;
        if (!settings.horizon && it == settings.max_iter) {
            throw ConvergenceError("baseline value iteration did not converge", residual, it);
        }
    }

    sol.values = std::move(v);
    sol.continuation = cont;
    sol.switch_value = switch_value;
    sol.stop_mask.assign(n, 0);
    sol.switch_mask.assign(n, 0);
    sol.pi_upper = 1.0;
    bool found = false;
    for (std::size_t i = 0; i < n; ++i) {
        const bool stop_here = stop[i] <= params.c + std::min(cont[i], switch_value);
        sol.stop_mask[i] = stop_here ? 1 : 0;
        sol.switch_mask[i] = !stop_here && cont[i] > switch_value ? 1 : 0;
        if (stop_here && !found) {
            sol.pi_upper = post[i];
            found = true;
        }
    }
    return sol;
}

}  // namespace qsearch
