#include "qsearch/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "qsearch/errors.hpp"

namespace qsearch {

void QuadratureSpec::validate() const {
    if (n_points < 17) throw ConfigError("quadrature needs at least 17 points");
    if (!(std_multiple > 0.0)) throw ConfigError("quadrature range must be positive");
}

QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw ConfigError("Gauss-Legendre order must be positive");
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Newton iteration from the Chebyshev-like initial guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        rule.nodes[lo] = -x;
        rule.nodes[hi] = x;
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return rule;
}

QuadratureRule composite_gauss_legendre(double a, double b, int n_points) {
    int order = n_points;
    for (int d = 8; d >= 2; --d) {
        if (n_points % d == 0) {
            order = d;
            break;
        }
    }
    const int panels = n_points / order;
    const QuadratureRule base = gauss_legendre(order);
    const double width = (b - a) / panels;
    QuadratureRule rule;
    rule.nodes.reserve(static_cast<std::size_t>(n_points));
    rule.weights.reserve(static_cast<std::size_t>(n_points));
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * width;
        for (std::size_t q = 0; q < base.size(); ++q) {
            rule.nodes.push_back(mid + 0.5 * width * base.nodes[q]);
            rule.weights.push_back(0.5 * width * base.weights[q]);
        }
    }
    return rule;
}

QuadratureRule observation_rule(const Density& widest, const QuadratureSpec& spec) {
    switch (widest.kind()) {
        case DensityKind::gaussian: {
            spec.validate();
            const double half = spec.std_multiple * std::sqrt(widest.variance());
            return composite_gauss_legendre(-half, half, spec.n_points);
        }
        case DensityKind::tabulated: {
            QuadratureRule rule;
            const auto n = widest.size();
            rule.nodes.resize(n);
            rule.weights.assign(n, widest.dx());
            for (std::size_t i = 0; i < n; ++i) {
                rule.nodes[i] = widest.x0() + static_cast<double>(i) * widest.dx();
            }
            rule.weights.front() *= 0.5;
            rule.weights.back() *= 0.5;
            return rule;
        }
        case DensityKind::discrete: {
            QuadratureRule rule;
            const auto n = widest.size();
            rule.nodes.resize(n);
            rule.weights.assign(n, 1.0);
            for (std::size_t i = 0; i < n; ++i) rule.nodes[i] = static_cast<double>(i);
            return rule;
        }
    }
    throw ConfigError("observation_rule: unknown density kind");
}

}  // namespace qsearch
