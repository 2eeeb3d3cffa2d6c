#include "qsearch/surface.hpp"

#include <algorithm>
#include <cmath>

#include "qsearch/errors.hpp"

namespace qsearch {

namespace {

// Scaled coordinates within this distance of an integer snap to it, so that
// node evaluation is exact despite i/M * M round-off.
constexpr double kSnap = 1e-9;

double snap(double u) {
    const double r = std::round(u);
    return std::abs(u - r) < kSnap ? r : u;
}

}  // namespace

TriangularGrid::TriangularGrid(int m) : m_(m) {
    if (m < 1) throw ConfigError("grid resolution must be at least 1");
    row_start_.resize(static_cast<std::size_t>(m) + 2);
    row_start_[0] = 0;
    for (int i = 0; i <= m; ++i) {
        row_start_[static_cast<std::size_t>(i) + 1] =
            row_start_[static_cast<std::size_t>(i)] + static_cast<std::size_t>(m - i + 1);
    }
}

ScanBelief TriangularGrid::node(int i, int j) const noexcept {
    const double inv = 1.0 / m_;
    return ScanBelief{i == m_ ? 1.0 : i * inv, j == m_ ? 1.0 : j * inv};
}

ScanBelief TriangularGrid::node(std::size_t k) const noexcept {
    const auto [i, j] = coords(k);
    return node(i, j);
}

std::array<int, 2> TriangularGrid::coords(std::size_t k) const noexcept {
    const auto it = std::upper_bound(row_start_.begin(), row_start_.end(), k);
    const auto i = static_cast<std::size_t>(it - row_start_.begin()) - 1;
    return {static_cast<int>(i), static_cast<int>(k - row_start_[i])};
}

TriangularGrid::Cell TriangularGrid::locate(const ScanBelief& p) const noexcept {
    double x = std::max(0.0, p.p11);
    double y = std::max(0.0, p.pmix);
    if (x + y > 1.0) {
        const double s = x + y;
        x /= s;
        y /= s;
    }
    const double u = snap(x * m_);
    const double v = snap(y * m_);
    int i = std::min(static_cast<int>(std::floor(u)), m_);
    int j = std::min(static_cast<int>(std::floor(v)), m_ - i);
    double fu = u - i;
    double fv = v - j;

    Cell cell;
    if (fu == 0.0 && fv == 0.0) {
        cell.nodes = {index(i, j), index(i, j), index(i, j)};
        cell.weights = {1.0, 0.0, 0.0};
        return cell;
    }
    // Keep (i, j) a lower-left corner of a full cell.
    if (i == m_) {
        i = m_ - 1;
        fu += 1.0;
    }
    if (i + j == m_) {
        j -= 1;
        fv += 1.0;
    }
    if (j < 0) {
        j = 0;
        fv = 0.0;
    }
    if (fu + fv <= 1.0 || i + j + 2 > m_) {
        const double s = std::min(1.0, fu + fv);
        const double scale = fu + fv > 0.0 ? s / (fu + fv) : 0.0;
        fu *= scale;
        fv *= scale;
        cell.nodes = {index(i, j), index(i + 1, j), index(i, j + 1)};
        cell.weights = {1.0 - fu - fv, fu, fv};
    } else {
        const double a = 1.0 - fv;  // weight of (i+1, j)
        const double b = 1.0 - fu;  // weight of (i, j+1)
        cell.nodes = {index(i + 1, j + 1), index(i + 1, j), index(i, j + 1)};
        cell.weights = {1.0 - a - b, a, b};
    }
    return cell;
}

std::size_t TriangularGrid::nearest(const ScanBelief& p) const noexcept {
    const auto cell = locate(p);
    std::size_t best = cell.nodes[0];
    double best_d = 1e300;
    for (std::size_t k : cell.nodes) {
        const auto q = node(k);
        const double d = (q.p11 - p.p11) * (q.p11 - p.p11) + (q.pmix - p.pmix) * (q.pmix - p.pmix);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

ValueSurface::ValueSurface(TriangularGrid grid, std::vector<double> values, SurfaceMeta meta)
    : grid_(std::move(grid)), values_(std::move(values)), meta_(meta) {
    if (values_.size() != grid_.size()) {
        throw ConfigError("surface values do not match grid size");
    }
}

double ValueSurface::operator()(const ScanBelief& p) const noexcept {
    const auto cell = grid_.locate(p);
    double v = 0.0;
    for (int t = 0; t < 3; ++t) {
        if (cell.weights[static_cast<std::size_t>(t)] != 0.0) {
            v += cell.weights[static_cast<std::size_t>(t)] *
                 values_[cell.nodes[static_cast<std::size_t>(t)]];
        }
    }
    return v;
}

}  // namespace qsearch
