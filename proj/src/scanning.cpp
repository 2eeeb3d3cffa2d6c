#include <algorithm>
#include <cmath>
#include <limits>

#include "qsearch/dp.hpp"
#include "qsearch/errors.hpp"

namespace qsearch {

namespace {

constexpr double kMaxMassDeficit = 1e-4;

const Density& widest_mixed(const MixedDensities& mixed) {
    const Density* best = &mixed.f00;
    if (best->kind() != DensityKind::gaussian) return mixed.f11;
    for (const Density* d : {&mixed.fm, &mixed.f11}) {
        if (d->variance() > best->variance()) best = d;
    }
    return *best;
}

struct ClassLikelihoods {
    std::vector<double> l00;
    std::vector<double> lm;
    std::vector<double> l11;
};

ClassLikelihoods tabulate(const QuadratureRule& rule, const MixedDensities& mixed) {
    ClassLikelihoods l;
    l.l00.resize(rule.size());
    l.lm.resize(rule.size());
    l.l11.resize(rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
        l.l00[q] = mixed.f00.pdf(rule.nodes[q]);
        l.lm[q] = mixed.fm.pdf(rule.nodes[q]);
        l.l11[q] = mixed.f11.pdf(rule.nodes[q]);
    }
    return l;
}

// One sparse row: E[V(posterior of `from`)] as weights on grid nodes.
void build_row(const TriangularGrid& grid, const ScanBelief& from, const QuadratureRule& rule,
               const ClassLikelihoods& l, std::vector<std::uint32_t>& cols,
               std::vector<double>& weights) {
    std::vector<std::pair<std::uint32_t, double>> entries;
    entries.reserve(rule.size() * 3);
    double mass = 0.0;
    const double p00 = from.p00();
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double fz = p00 * l.l00[q] + from.pmix * l.lm[q] + from.p11 * l.l11[q];
        const double a = rule.weights[q] * fz;
        if (!(a > 0.0)) continue;
        mass += a;
        const auto post = scan_posterior(from, l.l00[q], l.lm[q], l.l11[q]);
        const auto cell = grid.locate(post);
        for (std::size_t t = 0; t < 3; ++t) {
            if (cell.weights[t] != 0.0) {
                entries.emplace_back(static_cast<std::uint32_t>(cell.nodes[t]), a * cell.weights[t]);
            }
        }
    }
    if (1.0 - mass > kMaxMassDeficit) {
        throw QuadratureError("scanning quadrature misses more than 1e-4 of the mass; widen the range");
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    for (std::size_t e = 0; e < entries.size();) {
        const auto col = entries[e].first;
        double w = 0.0;
        for (; e < entries.size() && entries[e].first == col; ++e) w += entries[e].second;
        cols.push_back(col);
        weights.push_back(w / mass);
    }
}

}  // namespace

ScanTransition::ScanTransition(const TriangularGrid& grid, const ModelParams& params,
                               const MixedDensities& mixed, const QuadratureSpec& quad) {
    const auto rule = observation_rule(widest_mixed(mixed), quad);
    const auto l = tabulate(rule, mixed);
    row_start_.reserve(grid.size() + 1);
    row_start_.push_back(0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        build_row(grid, grid.node(k), rule, l, cols_, weights_);
        row_start_.push_back(cols_.size());
    }
    build_row(grid, scan_prior(params), rule, l, prior_cols_, prior_weights_);
}

void ScanTransition::apply(std::span<const double> v, std::span<double> out) const {
    for (std::size_t k = 0; k + 1 < row_start_.size(); ++k) {
        double s = 0.0;
        for (std::size_t e = row_start_[k]; e < row_start_[k + 1]; ++e) s += weights_[e] * v[cols_[e]];
        out[k] = s;
    }
}

double ScanTransition::apply_prior(std::span<const double> v) const {
    double s = 0.0;
    for (std::size_t e = 0; e < prior_cols_.size(); ++e) s += prior_weights_[e] * v[prior_cols_[e]];
    return s;
}

double ScanningSolution::value_at_prior(const ValueSurface& g, double c) const {
    return std::min(g(prior), c + a_s);
}

ScanningSolution solve_scanning(const ModelParams& params, const MixedDensities& mixed,
                                const RefinementSolution& refinement,
                                const SolverSettings& settings) {
    params.validate();
    settings.validate();
    const auto& grid = refinement.grid();
    if (grid.resolution() != settings.grid_m) {
        throw ConfigError("scanning grid does not match the refinement grid");
    }
    const ScanTransition transition(grid, params, mixed, settings.quad);
    const auto g = refinement.g().values();
    const std::size_t n = grid.size();

    std::vector<double> v(g.begin(), g.end());
    std::vector<double> ac(n);
    std::vector<double> next(n);
    double a_s = 0.0;
    IterationStats stats;

    const int limit = settings.horizon ? *settings.horizon : settings.max_iter;
    if (limit == 0) {
        transition.apply(v, ac);
        a_s = transition.apply_prior(v);
    }
    for (int it = 1; it <= limit; ++it) {
        transition.apply(v, ac);
        a_s = transition.apply_prior(v);
        double residual = 0.0;
        double increase = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            next[k] = scan_backup(g[k], params.c, ac[k], a_s);
            residual = std::max(residual, std::abs(next[k] - v[k]));
            increase = std::max(increase, next[k] - v[k]);
        }
        v.swap(next);
        stats.iterations = it;
        stats.residual = residual;
        stats.max_increase = std::max(stats.max_increase, increase);
        if (!settings.horizon && residual < settings.tol) break;
        if (!settings.horizon && it == settings.max_iter) {
            throw ConvergenceError("scanning value iteration did not converge", residual, it);
        }
    }

    SurfaceMeta meta;
    meta.quad_points = settings.quad.n_points;
    meta.tolerance = settings.tol;
    meta.iterations = stats.iterations;
    meta.residual = stats.residual;
    ScanningSolution out;
    out.vs = ValueSurface(grid, std::move(v), meta);
    out.ac = ValueSurface(grid, std::move(ac), meta);
    out.a_s = a_s;
    out.prior = scan_prior(params);
    out.stats = stats;
    return out;
}

double expected_next_value(const std::function<double(const ScanBelief&)>& value,
                           const ScanBelief& belief, ScanAction action, const ScanBelief& prior,
                           const MixedDensities& mixed, const QuadratureSpec& quad) {
    const ScanBelief& from = action == ScanAction::switch_pair ? prior : belief;
    const auto rule = observation_rule(widest_mixed(mixed), quad);
    double mass = 0.0;
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double l00 = mixed.f00.pdf(rule.nodes[q]);
        const double lm = mixed.fm.pdf(rule.nodes[q]);
        const double l11 = mixed.f11.pdf(rule.nodes[q]);
        const double a = rule.weights[q] * (from.p00() * l00 + from.pmix * lm + from.p11 * l11);
        if (!(a > 0.0)) continue;
        mass += a;
        acc += a * value(scan_posterior(from, l00, lm, l11));
    }
    if (1.0 - mass > kMaxMassDeficit) {
        throw QuadratureError("quadrature misses more than 1e-4 of the predictive mass; widen the range");
    }
    return acc / mass;
}

double expected_next_value(const ValueSurface& surface, const ScanBelief& belief,
                           ScanAction action, const ScanBelief& prior,
                           const MixedDensities& mixed, const QuadratureSpec& quad) {
    return expected_next_value([&surface](const ScanBelief& b) { return surface(b); }, belief,
                               action, prior, mixed, quad);
}

double truncated_scan_value(const ScanBelief& belief, int horizon, double c,
                            const ScanBelief& prior, const MixedDensities& mixed,
                            const QuadratureSpec& quad,
                            const std::function<double(const ScanBelief&)>& terminal) {
    const double stop = terminal(belief);
    if (horizon <= 0) return stop;
    const std::function<double(const ScanBelief&)> next = [&](const ScanBelief& b) {
        return truncated_scan_value(b, horizon - 1, c, prior, mixed, quad, terminal);
    };
    const double a_c = expected_next_value(next, belief, ScanAction::continue_scanning, prior,
                                           mixed, quad);
    const double a_s = expected_next_value(next, belief, ScanAction::switch_pair, prior, mixed,
                                           quad);
    return scan_backup(stop, c, a_c, a_s);
}

}  // namespace qsearch
