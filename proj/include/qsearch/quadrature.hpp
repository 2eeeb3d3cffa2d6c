#pragma once

#include <vector>

#include "qsearch/density.hpp"

namespace qsearch {

struct QuadratureSpec {
    int n_points = 129;
    // Half-width of the integration range in standard deviations of the
    // widest Gaussian component.
    double std_multiple = 6.0;

    void validate() const;
};

// Nodes and weights such that  E_f[h(X)] ~= sum_q weights[q] * f(nodes[q]) * h(nodes[q]).
// For discrete densities the nodes are the alphabet and the weights are 1.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const noexcept { return nodes.size(); }
};

// n-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

// Composite Gauss-Legendre over [a, b] with n_points in total. The panel
// order is the largest divisor of n_points in [2, 8]; if none exists a
// single n_points-panel is used.
QuadratureRule composite_gauss_legendre(double a, double b, int n_points);

// Rule for integrating against any of a family of densities sharing the
// support of `widest` (the component with the largest spread).
//  - gaussian: composite Gauss-Legendre on +-std_multiple * sd(widest)
//  - tabulated: the native grid with trapezoid weights
//  - discrete: the alphabet with unit weights
QuadratureRule observation_rule(const Density& widest, const QuadratureSpec& spec);

}  // namespace qsearch
