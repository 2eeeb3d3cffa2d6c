#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <variant>
#include <vector>

namespace qsearch {

using Rng = std::mt19937_64;

enum class DensityKind { gaussian, tabulated, discrete };

// Univariate observation density.
//
//  - gaussian:  zero-mean normal with a given variance.
//  - tabulated: piecewise-linear density on a uniform grid x0 + i*dx, zero
//               outside the grid.
//  - discrete:  probability mass function on the alphabet {0, ..., K-1}.
//               pdf() returns the mass at integer points, so "integrating"
//               against it means summing over the alphabet.
class Density {
public:
    static Density normal(double variance);
    static Density tabulated(double x0, double dx, std::vector<double> values);
    static Density discrete(std::vector<double> pmf);

    DensityKind kind() const noexcept;

    double pdf(double x) const;
    double log_pdf(double x) const;
    double mean() const;
    double variance() const;

    // Integral (tabulated: trapezoid; discrete: sum; gaussian: 1).
    double total_mass() const;

    double sample(Rng& rng) const;

    // Grid accessors. x0/dx are meaningful for tabulated (grid) and
    // discrete (x0 = 0, dx = 1) kinds.
    double x0() const noexcept;
    double dx() const noexcept;
    std::span<const double> values() const noexcept;
    std::size_t size() const noexcept;

private:
    struct Normal {
        double variance;
        double sd;
        double log_norm;
    };
    struct Tabulated {
        double x0;
        double dx;
        std::vector<double> f;
        std::vector<double> cdf;  // trapezoid cumulative, cdf[0] = 0
    };
    struct Discrete {
        std::vector<double> pmf;
        std::vector<double> cdf;  // cdf[k] = P(X <= k)
    };

    explicit Density(std::variant<Normal, Tabulated, Discrete> rep) : rep_(std::move(rep)) {}

    std::variant<Normal, Tabulated, Discrete> rep_;
};

// Density of X + Y for independent X ~ a, Y ~ b. Gaussian inputs give the
// closed form; tabulated inputs must share the grid spacing and are convolved
// by direct summation, then renormalized to unit trapezoid mass; discrete
// inputs are convolved as pmfs.
Density convolve(const Density& a, const Density& b);

// Trapezoid integral of tabulated values with spacing dx.
double trapezoid(std::span<const double> values, double dx);

}  // namespace qsearch
