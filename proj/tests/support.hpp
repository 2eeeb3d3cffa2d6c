#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "oracle/toy_oracle.hpp"
#include "qsearch/dp.hpp"
#include "qsearch/model.hpp"

namespace testing_support {

inline qsearch::ModelParams toy_params(const oracle::Toy& toy = {}) {
    qsearch::ModelParams p;
    p.pi = toy.pi;
    p.c = toy.c;
    p.densities = qsearch::DensityPair::discrete({toy.f0[0], toy.f0[1]}, {toy.f1[0], toy.f1[1]});
    return p;
}

// Every toy observation moves the log LR by exactly +-log 4, so a grid with
// that step represents horizon-limited problems without interpolation.
inline qsearch::SolverSettings toy_settings(int horizon, int grid_m = 10) {
    qsearch::SolverSettings s;
    s.grid_m = grid_m;
    s.loglr_bound = 10.0 * std::log(4.0);
    s.loglr_points = 21;
    s.horizon = horizon;
    return s;
}

// Coarse Gaussian settings that keep unit tests fast.
inline qsearch::SolverSettings coarse_settings(int grid_m = 24) {
    qsearch::SolverSettings s;
    s.grid_m = grid_m;
    s.loglr_bound = 30.0;
    s.loglr_points = 121;
    s.quad.n_points = 65;
    s.tol = 1e-9;
    return s;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() /
               ("qsearch-test-" + name + "-" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing_support
