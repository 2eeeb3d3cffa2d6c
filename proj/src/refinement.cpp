#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "qsearch/dp.hpp"
#include "qsearch/errors.hpp"

namespace qsearch {

namespace {

// Mass that quadrature may miss before the range is considered too narrow.
constexpr double kMaxMassDeficit = 1e-4;

const Density& widest_component(const DensityPair& pair) {
    if (pair.kind() == DensityKind::gaussian) {
        return pair.f1().variance() >= pair.f0().variance() ? pair.f1() : pair.f0();
    }
    return pair.f0();
}

unsigned worker_count(std::size_t jobs) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(hw, std::max<std::size_t>(jobs, 1)));
}

}  // namespace

void SolverSettings::validate() const {
    if (grid_m < 1) throw ConfigError("grid resolution must be positive");
    if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
    if (max_iter < 1) throw ConfigError("max_iter must be positive");
    if (!(loglr_bound > 0.0)) throw ConfigError("log-LR bound must be positive");
    if (loglr_points < 3 || loglr_points % 2 == 0) {
        throw ConfigError("log-LR grid needs an odd number (>= 3) of points");
    }
    if (horizon && *horizon < 0) throw ConfigError("horizon must be nonnegative");
}

LogLrGrid::LogLrGrid(double bound, int points)
    : bound_(bound), points_(points), step_(bound / ((points - 1) / 2)) {
    if (points < 3 || points % 2 == 0 || !(bound > 0.0)) {
        throw ConfigError("log-LR grid needs a positive bound and an odd number of points");
    }
}

void LogLrKernel::apply(std::span<const double> v, std::span<double> out0,
                        std::span<double> out1) const {
    const int n = static_cast<int>(v.size());
    const int left = std::max(0, -min_offset);
    const int right = std::max(0, max_offset);
    thread_local std::vector<double> padded;
    padded.resize(static_cast<std::size_t>(n + left + right));
    std::fill_n(padded.begin(), left, v.front());
    std::copy(v.begin(), v.end(), padded.begin() + left);
    std::fill_n(padded.begin() + left + n, right, v.back());

    std::fill(out0.begin(), out0.end(), 0.0);
    std::fill(out1.begin(), out1.end(), 0.0);
    double* o0 = out0.data();
    double* o1 = out1.data();
    for (std::size_t e = 0; e < offsets.size(); ++e) {
        const double* src = padded.data() + left + offsets[e];
        const double a = w0[e];
        const double b = w1[e];
        for (int i = 0; i < n; ++i) {
            o0[i] += a * src[i];
            o1[i] += b * src[i];
        }
    }
}

std::pair<double, double> LogLrKernel::apply_at(std::span<const double> v, int i) const {
    const int n = static_cast<int>(v.size());
    double s0 = 0.0;
    double s1 = 0.0;
    for (std::size_t e = 0; e < offsets.size(); ++e) {
        const int j = std::clamp(i + offsets[e], 0, n - 1);
        s0 += w0[e] * v[static_cast<std::size_t>(j)];
        s1 += w1[e] * v[static_cast<std::size_t>(j)];
    }
    return {s0, s1};
}

LogLrKernel build_loglr_kernel(const DensityPair& pair, const QuadratureSpec& quad,
                               const LogLrGrid& grid) {
    const auto rule = observation_rule(widest_component(pair), quad);
    const int reach = grid.size() - 1;

    std::vector<double> a0(rule.size());
    std::vector<double> a1(rule.size());
    double m0 = 0.0;
    double m1 = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        a0[q] = rule.weights[q] * pair.f0().pdf(rule.nodes[q]);
        a1[q] = rule.weights[q] * pair.f1().pdf(rule.nodes[q]);
        m0 += a0[q];
        m1 += a1[q];
    }
    if (1.0 - m0 > kMaxMassDeficit || 1.0 - m1 > kMaxMassDeficit) {
        throw QuadratureError("refinement quadrature misses more than 1e-4 of the mass; widen the range");
    }

    std::map<int, std::pair<double, double>> merged;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double p0 = a0[q] / m0;
        const double p1 = a1[q] / m1;
        if (p0 == 0.0 && p1 == 0.0) continue;
        const double s = pair.log_likelihood_ratio(rule.nodes[q]) / grid.step();
        if (s >= reach) {
            auto& e = merged[reach];
            e.first += p0;
            e.second += p1;
        } else if (s <= -reach) {
            auto& e = merged[-reach];
            e.first += p0;
            e.second += p1;
        } else {
            const int k = static_cast<int>(std::floor(s));
            const double t = s - k;
            auto& lo = merged[k];
            lo.first += (1.0 - t) * p0;
            lo.second += (1.0 - t) * p1;
            if (t > 0.0) {
                auto& hi = merged[k + 1];
                hi.first += t * p0;
                hi.second += t * p1;
            }
        }
    }

    LogLrKernel kernel;
    for (const auto& [offset, w] : merged) {
        if (w.first == 0.0 && w.second == 0.0) continue;
        kernel.offsets.push_back(offset);
        kernel.w0.push_back(w.first);
        kernel.w1.push_back(w.second);
    }
    kernel.min_offset = kernel.offsets.empty() ? 0 : kernel.offsets.front();
    kernel.max_offset = kernel.offsets.empty() ? 0 : kernel.offsets.back();
    return kernel;
}

std::vector<double> solve_refinement_ray(const ScanBelief& origin, double c,
                                         const LogLrGrid& grid, const LogLrKernel& kernel,
                                         const SolverSettings& settings, IterationStats* stats) {
    const auto n = static_cast<std::size_t>(grid.size());
    std::vector<double> stop(n);
    std::vector<double> pi_a(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lambda = grid.at(static_cast<int>(i));
        stop[i] = refine_stop_cost(origin, lambda);
        pi_a[i] = refine_pi_a(origin, lambda);
    }
    IterationStats local;
    std::vector<double> v = stop;

    // Vertices (0,0) and (1,0): observations cannot change the stop cost.
    const bool certain = origin.p11 + origin.pmix == 0.0 || origin.p11 == 1.0;
    if (!certain) {
        std::vector<double> e0(n);
        std::vector<double> e1(n);
        std::vector<double> next(n);
        const int limit = settings.horizon ? *settings.horizon : settings.max_iter;
        for (int it = 1; it <= limit; ++it) {
            kernel.apply(v, e0, e1);
            double residual = 0.0;
            double increase = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double cont = c + pi_a[i] * e1[i] + (1.0 - pi_a[i]) * e0[i];
                next[i] = std::min(stop[i], cont);
                residual = std::max(residual, std::abs(next[i] - v[i]));
                increase = std::max(increase, next[i] - v[i]);
            }
            v.swap(next);
            local.iterations = it;
            local.residual = residual;
            local.max_increase = std::max(local.max_increase, increase);
            if (!settings.horizon && residual < settings.tol) break;
            if (!settings.horizon && it == settings.max_iter) {
                throw ConvergenceError("refinement value iteration did not converge", residual, it);
            }
        }
    }
    if (stats) *stats = local;
    return v;
}

RefinementSolution::RefinementSolution(TriangularGrid grid, LogLrGrid lr, LogLrKernel kernel,
                                       double c, std::vector<double> tables, ValueSurface g,
                                       IterationStats stats)
    : grid_(std::move(grid)),
      lr_(lr),
      kernel_(std::move(kernel)),
      c_(c),
      tables_(std::move(tables)),
      g_(std::move(g)),
      stats_(stats) {
    if (tables_.size() != grid_.size() * static_cast<std::size_t>(lr_.size())) {
        throw ConfigError("refinement tables do not match grid sizes");
    }
}

std::span<const double> RefinementSolution::table(std::size_t node) const noexcept {
    const auto n = static_cast<std::size_t>(lr_.size());
    return std::span<const double>(tables_).subspan(node * n, n);
}

double RefinementSolution::continuation(const ScanBelief& origin, double log_lr) const {
    const int n = lr_.size();
    double u = log_lr / lr_.step() + lr_.center();
    u = std::clamp(u, 0.0, static_cast<double>(n - 1));
    int i0 = static_cast<int>(std::floor(u));
    double t = u - i0;
    if (i0 >= n - 1) {
        i0 = n - 2;
        t = 1.0;
    }
    const auto cell = grid_.locate(origin);
    double e0 = 0.0;
    double e1 = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        const double w = cell.weights[k];
        if (w == 0.0) continue;
        const auto tab = table(cell.nodes[k]);
        const auto lo = kernel_.apply_at(tab, i0);
        const auto hi = t > 0.0 ? kernel_.apply_at(tab, i0 + 1) : lo;
        e0 += w * ((1.0 - t) * lo.first + t * hi.first);
        e1 += w * ((1.0 - t) * lo.second + t * hi.second);
    }
    const double pa = refine_pi_a(origin, log_lr);
    return c_ + pa * e1 + (1.0 - pa) * e0;
}

RefinementSolution solve_refinement(const ModelParams& params, const SolverSettings& settings) {
    params.validate();
    settings.validate();
    if (settings.grid_m < 20 && !settings.horizon &&
        params.densities.kind() == DensityKind::gaussian) {
        throw ConfigError("refinement grid resolution must be at least 20");
    }
    TriangularGrid grid(settings.grid_m);
    LogLrGrid lr(settings.loglr_bound, settings.loglr_points);
    auto kernel = build_loglr_kernel(params.densities, settings.quad, lr);

    const std::size_t nodes = grid.size();
    const auto width = static_cast<std::size_t>(lr.size());
    std::vector<double> tables(nodes * width);
    std::vector<double> g(nodes);
    std::vector<IterationStats> per_node(nodes);

    const unsigned workers = worker_count(nodes);
    std::vector<std::exception_ptr> failures(workers);
    auto work = [&](unsigned w) {
        try {
            for (std::size_t k = w; k < nodes; k += workers) {
                auto table = solve_refinement_ray(grid.node(k), params.c, lr, kernel, settings,
                                                  &per_node[k]);
                std::copy(table.begin(), table.end(), tables.begin() + k * width);
                g[k] = table[static_cast<std::size_t>(lr.center())];
            }
        } catch (...) {
            failures[w] = std::current_exception();
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }

    IterationStats stats;
    for (const auto& s : per_node) {
        stats.iterations = std::max(stats.iterations, s.iterations);
        stats.residual = std::max(stats.residual, s.residual);
        stats.max_increase = std::max(stats.max_increase, s.max_increase);
    }
    SurfaceMeta meta;
    meta.quad_points = settings.quad.n_points;
    meta.tolerance = settings.tol;
    meta.iterations = stats.iterations;
    meta.residual = stats.residual;
    ValueSurface surface(grid, std::move(g), meta);
    return RefinementSolution(grid, lr, std::move(kernel), params.c, std::move(tables),
                              std::move(surface), stats);
}

}  // namespace qsearch
