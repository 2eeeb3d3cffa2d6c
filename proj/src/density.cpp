#include "qsearch/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qsearch/errors.hpp"

namespace qsearch {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_nonnegative(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
            throw ConfigError(std::string(what) + ": values must be finite and nonnegative");
        }
    }
}

}  // namespace

double trapezoid(std::span<const double> values, double dx) {
    if (values.size() < 2) return 0.0;
    double s = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) s += values[i];
    return s * dx;
}

Density Density::normal(double variance) {
    if (!(variance > 0.0) || !std::isfinite(variance)) {
        throw ConfigError("normal density: variance must be positive");
    }
    const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * variance);
    return Density(Normal{variance, std::sqrt(variance), log_norm});
}

Density Density::tabulated(double x0, double dx, std::vector<double> values) {
    if (!(dx > 0.0) || !std::isfinite(x0)) {
        throw ConfigError("tabulated density: grid spacing must be positive");
    }
    if (values.size() < 2) throw ConfigError("tabulated density: need at least two grid points");
    require_nonnegative(values, "tabulated density");
    std::vector<double> cdf(values.size(), 0.0);
    for (std::size_t i = 1; i < values.size(); ++i) {
        cdf[i] = cdf[i - 1] + 0.5 * (values[i - 1] + values[i]) * dx;
    }
    if (!(cdf.back() > 0.0)) throw ConfigError("tabulated density: zero mass");
    return Density(Tabulated{x0, dx, std::move(values), std::move(cdf)});
}

Density Density::discrete(std::vector<double> pmf) {
    if (pmf.empty()) throw ConfigError("discrete density: empty alphabet");
    require_nonnegative(pmf, "discrete density");
    std::vector<double> cdf(pmf.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
        acc += pmf[k];
        cdf[k] = acc;
    }
    if (!(acc > 0.0)) throw ConfigError("discrete density: zero mass");
    return Density(Discrete{std::move(pmf), std::move(cdf)});
}

DensityKind Density::kind() const noexcept {
    return std::visit(overloaded{[](const Normal&) { return DensityKind::gaussian; },
                                 [](const Tabulated&) { return DensityKind::tabulated; },
                                 [](const Discrete&) { return DensityKind::discrete; }},
                      rep_);
}

double Density::pdf(double x) const {
    return std::visit(
        overloaded{
            [x](const Normal& n) { return std::exp(n.log_norm - 0.5 * x * x / n.variance); },
            [x](const Tabulated& t) {
                const double u = (x - t.x0) / t.dx;
                const auto last = static_cast<double>(t.f.size() - 1);
                if (!(u >= 0.0) || u > last) return 0.0;
                const auto i = std::min(static_cast<std::size_t>(u), t.f.size() - 2);
                const double w = u - static_cast<double>(i);
                return (1.0 - w) * t.f[i] + w * t.f[i + 1];
            },
            [x](const Discrete& d) {
                const double k = std::round(x);
                if (std::abs(x - k) > 1e-9 || k < 0.0 ||
                    k >= static_cast<double>(d.pmf.size())) {
                    return 0.0;
                }
                return d.pmf[static_cast<std::size_t>(k)];
            }},
        rep_);
}

double Density::log_pdf(double x) const {
    if (const auto* n = std::get_if<Normal>(&rep_)) {
        return n->log_norm - 0.5 * x * x / n->variance;
    }
    const double p = pdf(x);
    return p > 0.0 ? std::log(p) : kNegInf;
}

double Density::mean() const {
    return std::visit(overloaded{[](const Normal&) { return 0.0; },
                                 [](const Tabulated& t) {
                                     std::vector<double> xf(t.f.size());
                                     for (std::size_t i = 0; i < t.f.size(); ++i) {
                                         xf[i] = (t.x0 + static_cast<double>(i) * t.dx) * t.f[i];
                                     }
                                     return trapezoid(xf, t.dx) / t.cdf.back();
                                 },
                                 [](const Discrete& d) {
                                     double m = 0.0;
                                     for (std::size_t k = 0; k < d.pmf.size(); ++k) {
                                         m += static_cast<double>(k) * d.pmf[k];
                                     }
                                     return m / d.cdf.back();
                                 }},
                      rep_);
}

double Density::variance() const {
    if (const auto* n = std::get_if<Normal>(&rep_)) return n->variance;
    const double mu = mean();
    if (const auto* t = std::get_if<Tabulated>(&rep_)) {
        std::vector<double> v(t->f.size());
        for (std::size_t i = 0; i < t->f.size(); ++i) {
            const double d = t->x0 + static_cast<double>(i) * t->dx - mu;
            v[i] = d * d * t->f[i];
        }
        return trapezoid(v, t->dx) / t->cdf.back();
    }
    const auto& d = std::get<Discrete>(rep_);
    double s = 0.0;
    for (std::size_t k = 0; k < d.pmf.size(); ++k) {
        const double dev = static_cast<double>(k) - mu;
        s += dev * dev * d.pmf[k];
    }
    return s / d.cdf.back();
}

double Density::total_mass() const {
    return std::visit(overloaded{[](const Normal&) { return 1.0; },
                                 [](const Tabulated& t) { return t.cdf.back(); },
                                 [](const Discrete& d) { return d.cdf.back(); }},
                      rep_);
}

double Density::sample(Rng& rng) const {
    return std::visit(
        overloaded{[&rng](const Normal& n) {
                       std::normal_distribution<double> dist(0.0, n.sd);
                       return dist(rng);
                   },
                   [&rng](const Tabulated& t) {
                       // Inverse CDF of the piecewise-linear density.
                       std::uniform_real_distribution<double> unif(0.0, t.cdf.back());
                       const double u = unif(rng);
                       auto it = std::upper_bound(t.cdf.begin(), t.cdf.end(), u);
                       std::size_t k = it == t.cdf.begin()
                                           ? 0
                                           : static_cast<std::size_t>(it - t.cdf.begin()) - 1;
                       k = std::min(k, t.f.size() - 2);
                       const double r = (u - t.cdf[k]) / t.dx;
                       const double a = t.f[k];
                       const double b = t.f[k + 1];
                       double s;
                       if (std::abs(b - a) < 1e-12 * std::max(a, b)) {
                           s = a > 0.0 ? r / a : 0.5;
                       } else {
                           // a s + (b - a) s^2 / 2 = r
                           const double disc = std::max(0.0, a * a + 2.0 * (b - a) * r);
                           s = (std::sqrt(disc) - a) / (b - a);
                       }
                       s = std::clamp(s, 0.0, 1.0);
                       return t.x0 + (static_cast<double>(k) + s) * t.dx;
                   },
                   [&rng](const Discrete& d) {
                       std::uniform_real_distribution<double> unif(0.0, d.cdf.back());
                       const double u = unif(rng);
                       auto it = std::upper_bound(d.cdf.begin(), d.cdf.end(), u);
                       auto k = static_cast<std::size_t>(it - d.cdf.begin());
                       return static_cast<double>(std::min(k, d.pmf.size() - 1));
                   }},
        rep_);
}

double Density::x0() const noexcept {
    if (const auto* t = std::get_if<Tabulated>(&rep_)) return t->x0;
    return 0.0;
}

double Density::dx() const noexcept {
    if (const auto* t = std::get_if<Tabulated>(&rep_)) return t->dx;
    return 1.0;
}

std::span<const double> Density::values() const noexcept {
    if (const auto* t = std::get_if<Tabulated>(&rep_)) return t->f;
    if (const auto* d = std::get_if<Discrete>(&rep_)) return d->pmf;
    return {};
}

std::size_t Density::size() const noexcept { return values().size(); }

Density convolve(const Density& a, const Density& b) {
    if (a.kind() != b.kind()) throw ConfigError("convolve: density kinds differ");
    switch (a.kind()) {
        case DensityKind::gaussian:
            return Density::normal(a.variance() + b.variance());
        case DensityKind::discrete: {
            const auto fa = a.values();
            const auto fb = b.values();
            std::vector<double> out(fa.size() + fb.size() - 1, 0.0);
            for (std::size_t i = 0; i < fa.size(); ++i) {
                for (std::size_t j = 0; j < fb.size(); ++j) out[i + j] += fa[i] * fb[j];
            }
            return Density::discrete(std::move(out));
        }
        case DensityKind::tabulated: {
            if (std::abs(a.dx() - b.dx()) > 1e-12 * a.dx()) {
                throw ConfigError("convolve: tabulated grids must share spacing");
            }
            const auto fa = a.values();
            const auto fb = b.values();
            const double dx = a.dx();
            std::vector<double> out(fa.size() + fb.size() - 1, 0.0);
            for (std::size_t i = 0; i < fa.size(); ++i) {
                for (std::size_t j = 0; j < fb.size(); ++j) out[i + j] += fa[i] * fb[j] * dx;
            }
            const double mass = trapezoid(out, dx);
            if (!(mass > 0.0)) throw ConfigError("convolve: zero mass");
            for (double& v : out) v /= mass;
            return Density::tabulated(a.x0() + b.x0(), dx, std::move(out));
        }
    }
    throw ConfigError("convolve: unknown density kind");
}

}  // namespace qsearch
