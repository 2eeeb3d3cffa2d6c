#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "qsearch/belief.hpp"
#include "qsearch/model.hpp"
#include "qsearch/quadrature.hpp"
#include "qsearch/surface.hpp"

namespace qsearch {

struct SolverSettings {
    int grid_m = 201;
    QuadratureSpec quad{};
    double tol = 1e-7;
    int max_iter = 20000;
    double loglr_bound = 40.0;
    int loglr_points = 401;
    // When set, run exactly this many sweeps from the stop-cost
    // initialization (finite-horizon truncation) instead of iterating to tol.
    std::optional<int> horizon;

    void validate() const;
};

// Convergence record of a value iteration. `max_increase` is the largest
// pointwise increase seen between successive iterates (0 for a monotone run).
struct IterationStats {
    int iterations = 0;
    double residual = 0.0;
    double max_increase = 0.0;
};

// Uniform grid on [-bound, bound] with an odd number of points, so that the
// centre node is exactly zero.
class LogLrGrid {
public:
    LogLrGrid() = default;
    LogLrGrid(double bound, int points);

    int size() const noexcept { return points_; }
    int center() const noexcept { return (points_ - 1) / 2; }
    double step() const noexcept { return step_; }
    double bound() const noexcept { return bound_; }
    double at(int i) const noexcept { return (i - center()) * step_; }

private:
    double bound_ = 0.0;
    int points_ = 0;
    double step_ = 0.0;
};

// Transition of a log likelihood ratio under one observation, projected onto
// a LogLrGrid by linear interpolation. Shift invariant: the expected value of
// V at (node i + increment) is  sum_e w[e] * V[clamp(i + offset[e])],  with
// separate weight vectors for observations drawn from f0 and from f1.
struct LogLrKernel {
    std::vector<int> offsets;
    std::vector<double> w0;
    std::vector<double> w1;
    int min_offset = 0;
    int max_offset = 0;

    // E_{f0}[V(i + L)] and E_{f1}[V(i + L)] for every node i at once.
    void apply(std::span<const double> v, std::span<double> out0, std::span<double> out1) const;
    // The same at a single node, clamping out-of-range indices.
    std::pair<double, double> apply_at(std::span<const double> v, int i) const;
};

LogLrKernel build_loglr_kernel(const DensityPair& pair, const QuadratureSpec& quad,
                               const LogLrGrid& grid);

// Value V(lambda) of the refinement stopping problem along one ray. The
// table holds V at every LogLrGrid node; g(origin) = table[center].
std::vector<double> solve_refinement_ray(const ScanBelief& origin, double c,
                                         const LogLrGrid& grid, const LogLrKernel& kernel,
                                         const SolverSettings& settings, IterationStats* stats);

class RefinementSolution {
public:
    RefinementSolution(TriangularGrid grid, LogLrGrid lr, LogLrKernel kernel, double c,
                       std::vector<double> tables, ValueSurface g, IterationStats stats);

    const ValueSurface& g() const noexcept { return g_; }
    const TriangularGrid& grid() const noexcept { return grid_; }
    const LogLrGrid& loglr_grid() const noexcept { return lr_; }
    const LogLrKernel& kernel() const noexcept { return kernel_; }
    double cost() const noexcept { return c_; }
    const IterationStats& stats() const noexcept { return stats_; }

    std::span<const double> table(std::size_t node) const noexcept;
    std::span<const double> tables() const noexcept { return tables_; }

    // c + E[V_r(next) | embed(origin, log_lr)]: node tables of the cell
    // enclosing `origin` are combined barycentrically, and the expectation is
    // interpolated linearly in log_lr between grid nodes.
    double continuation(const ScanBelief& origin, double log_lr) const;

private:
    TriangularGrid grid_;
    LogLrGrid lr_;
    LogLrKernel kernel_;
    double c_;
    std::vector<double> tables_;  // node-major, lr_.size() values per node
    ValueSurface g_;
    IterationStats stats_;
};

RefinementSolution solve_refinement(const ModelParams& params, const SolverSettings& settings);

// Stop-cost-initialized scanning sweeps precomputed for a grid: for every node
// the predictive-weighted barycentric weights of its posteriors.
class ScanTransition {
public:
    ScanTransition(const TriangularGrid& grid, const ModelParams& params,
                   const MixedDensities& mixed, const QuadratureSpec& quad);

    // E[V(scan_update(node, Z, 0))] for every node.
    void apply(std::span<const double> v, std::span<double> out) const;
    // E[V(scan_update(prior, Z))], the value after a switch.
    double apply_prior(std::span<const double> v) const;

private:
    std::vector<std::size_t> row_start_;
    std::vector<std::uint32_t> cols_;
    std::vector<double> weights_;
    std::vector<std::uint32_t> prior_cols_;
    std::vector<double> prior_weights_;
};

struct ScanningSolution {
    ValueSurface vs;
    ValueSurface ac;
    double a_s = 0.0;
    ScanBelief prior;
    IterationStats stats;

    // Optimal total expected cost from the start of a search:
    // min(g(prior), c + A_s).
    double value_at_prior(const ValueSurface& g, double c) const;
};

ScanningSolution solve_scanning(const ModelParams& params, const MixedDensities& mixed,
                                const RefinementSolution& refinement,
                                const SolverSettings& settings);

// The scanning Bellman backup min{g, c + min{A_c, A_s}}.
inline double scan_backup(double g, double c, double a_c, double a_s) {
    const double cont = a_c < a_s ? a_c : a_s;
    return g < c + cont ? g : c + cont;
}

enum class ScanAction { continue_scanning, switch_pair };

// E[V(next belief)] from `belief` (continue) or from the prior (switch),
// integrating the given value function against the predictive density.
double expected_next_value(const std::function<double(const ScanBelief&)>& value,
                           const ScanBelief& belief, ScanAction action, const ScanBelief& prior,
                           const MixedDensities& mixed, const QuadratureSpec& quad);
double expected_next_value(const ValueSurface& surface, const ScanBelief& belief,
                           ScanAction action, const ScanBelief& prior,
                           const MixedDensities& mixed, const QuadratureSpec& quad);

// Exact (grid-free) horizon-truncated scanning value: V^0 = terminal,
// V^h = min{terminal, c + min{A_c^{h-1}, A_s^{h-1}}}, evaluated by recursion.
double truncated_scan_value(const ScanBelief& belief, int horizon, double c,
                            const ScanBelief& prior, const MixedDensities& mixed,
                            const QuadratureSpec& quad,
                            const std::function<double(const ScanBelief&)>& terminal);

// Single-observation strategy value on a log-odds grid centred at the prior.
struct BaselineSolution {
    LogLrGrid grid;        // offsets from the prior log-odds
    double prior_logit = 0.0;
    std::vector<double> values;
    std::vector<double> continuation;  // E[V_b(next)] when keeping the sequence
    double switch_value = 0.0;         // E[V_b(next)] after a fresh sequence
    std::vector<std::uint8_t> stop_mask;
    std::vector<std::uint8_t> switch_mask;
    double pi_upper = 1.0;  // smallest posterior at which stopping is optimal
    IterationStats stats;

    double posterior_at(int i) const;
    // V_b at a posterior, linear in log-odds, clamped to the grid ends.
    double value_at(double posterior) const;
};

BaselineSolution solve_baseline(const ModelParams& params, const SolverSettings& settings);

double logit(double p);
double logistic(double x);

}  // namespace qsearch
