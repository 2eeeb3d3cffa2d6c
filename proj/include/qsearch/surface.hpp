#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qsearch/simplex.hpp"

namespace qsearch {

// Triangular grid on the belief simplex {p11, pmix >= 0, p11 + pmix <= 1}
// with nodes (i/M, j/M), i + j <= M, stored in lexicographic (i, j) order.
class TriangularGrid {
public:
    // Enclosing cell of a point: three node indices with barycentric weights.
    struct Cell {
        std::array<std::size_t, 3> nodes{};
        std::array<double, 3> weights{};
    };

    TriangularGrid() = default;
    explicit TriangularGrid(int m);

    int resolution() const noexcept { return m_; }
    std::size_t size() const noexcept { return row_start_.empty() ? 0 : row_start_.back(); }

    std::size_t index(int i, int j) const noexcept {
        return row_start_[static_cast<std::size_t>(i)] + static_cast<std::size_t>(j);
    }
    ScanBelief node(int i, int j) const noexcept;
    ScanBelief node(std::size_t k) const noexcept;
    // (i, j) of node k.
    std::array<int, 2> coords(std::size_t k) const noexcept;

    // Points outside the simplex are projected onto it first. A point that
    // coincides with a node yields that node with weight 1.
    Cell locate(const ScanBelief& p) const noexcept;

    // Node nearest to p in Euclidean distance.
    std::size_t nearest(const ScanBelief& p) const noexcept;

    friend bool operator==(const TriangularGrid& a, const TriangularGrid& b) { return a.m_ == b.m_; }

private:
    int m_ = 0;
    std::vector<std::size_t> row_start_;  // M + 2 entries
};

// Number of grid nodes for resolution M: (M + 1)(M + 2) / 2.
constexpr std::size_t triangular_node_count(int m) {
    return static_cast<std::size_t>(m + 1) * static_cast<std::size_t>(m + 2) / 2;
}

struct SurfaceMeta {
    std::uint64_t params_hash = 0;
    int quad_points = 0;
    double tolerance = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

// A function on the belief simplex given by its node values, evaluated off
// the nodes by barycentric-linear interpolation.
class ValueSurface {
public:
    ValueSurface() = default;
    ValueSurface(TriangularGrid grid, std::vector<double> values, SurfaceMeta meta = {});

    const TriangularGrid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    const SurfaceMeta& meta() const noexcept { return meta_; }

    double at(int i, int j) const noexcept { return values_[grid_.index(i, j)]; }
    double operator[](std::size_t k) const noexcept { return values_[k]; }
    double operator()(const ScanBelief& p) const noexcept;

private:
    TriangularGrid grid_;
    std::vector<double> values_;
    SurfaceMeta meta_;
};

}  // namespace qsearch
