#include <gtest/gtest.h>

#include "qsearch/dp.hpp"
#include "support.hpp"

using namespace qsearch;
using testing_support::toy_params;
using testing_support::toy_settings;

namespace {

constexpr double kExact = 1e-12;

double ray_value(const ModelParams& params, const SolverSettings& settings, const ScanBelief& origin) {
    const LogLrGrid lr(settings.loglr_bound, settings.loglr_points);
    const auto kernel = build_loglr_kernel(params.densities, settings.quad, lr);
    const auto table = solve_refinement_ray(origin, params.c, lr, kernel, settings, nullptr);
    return table[static_cast<std::size_t>(lr.center())];
}

}  // namespace

TEST(ToyOracle, RefinementSurfaceMatchesEnumerationAtEveryNode) {
    const oracle::Toy toy;
    const auto params = toy_params(toy);
    const auto sol = solve_refinement(params, toy_settings(oracle::kHorizon));
    const auto& grid = sol.grid();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto b = grid.node(k);
        EXPECT_NEAR(sol.g()[k], oracle::refine_value(toy, b.p11, b.pmix), kExact)
            << "node (" << b.p11 << ", " << b.pmix << ")";
    }
}

TEST(ToyOracle, RefinementValueAcrossCosts) {
    for (double c : {0.005, 0.05, 0.15}) {
        oracle::Toy toy;
        toy.c = c;
        const auto params = toy_params(toy);
        for (ScanBelief b : {ScanBelief{0.0, 0.9}, ScanBelief{0.2, 0.6}, ScanBelief{0.04, 0.32},
                             ScanBelief{0.37, 0.11}}) {
            EXPECT_NEAR(ray_value(params, toy_settings(oracle::kHorizon), b),
                        oracle::refine_value(toy, b.p11, b.pmix), kExact);
        }
    }
}

TEST(ToyOracle, RefineDecisionAtOriginMatchesEnumeration) {
    // The root decision of the 3-step problem weighs stopping against c plus
    // the expected 2-step value, so the tables come from a 2-sweep solve.
    const oracle::Toy toy;
    const auto params = toy_params(toy);
    const auto sol = solve_refinement(params, toy_settings(oracle::kHorizon - 1));
    for (ScanBelief origin : {ScanBelief{0.0, 0.9}, ScanBelief{0.1, 0.5}, ScanBelief{0.5, 0.3}}) {
        const bool lib_continue = refine_stop_cost(origin, 0.0) > sol.continuation(origin, 0.0);
        EXPECT_EQ(lib_continue, oracle::refine_root_continues(toy, origin.p11, origin.pmix));
    }
    // Origin (0, 0.9) is worth refining at this cost.
    EXPECT_TRUE(oracle::refine_root_continues(toy, 0.0, 0.9));
}

TEST(ToyOracle, ScanningValueMatchesEnumeration) {
    const oracle::Toy toy;
    const auto params = toy_params(toy);
    const auto settings = toy_settings(oracle::kHorizon);
    const auto mixed = mixed_densities(params);
    const auto prior = scan_prior(params);
    auto terminal = [&](const ScanBelief& b) { return ray_value(params, settings, b); };
    bool searched = false;  // some belief where scanning beats refining now
    for (ScanBelief b : {prior, ScanBelief{0.0, 0.9}, ScanBelief{0.1, 0.3}, ScanBelief{0.02, 0.5}}) {
        const double lib =
            truncated_scan_value(b, oracle::kHorizon, params.c, prior, mixed, settings.quad, terminal);
        const oracle::ScanOracle brute(toy, b.p11, b.pmix);
        EXPECT_NEAR(lib, brute.value(), kExact) << "belief (" << b.p11 << ", " << b.pmix << ")";
        searched = searched || lib < terminal(b) - 1e-6;
    }
    EXPECT_TRUE(searched);
}

TEST(ToyOracle, BaselineValueMatchesEnumeration) {
    for (double c : {0.01, 0.02, 0.08}) {
        oracle::Toy toy;
        toy.c = c;
        const auto params = toy_params(toy);
        const auto sol = solve_baseline(params, toy_settings(oracle::kHorizon));
        const int mid = sol.grid.center();
        // Cheap observations make searching strictly better than declaring.
        if (c < 0.05) {
            EXPECT_LT(sol.values[static_cast<std::size_t>(mid)], 1.0 - toy.pi - 1e-6);
        }
        for (int offset : {-2, 0, 1, 3}) {
            const double p = sol.posterior_at(mid + offset);
            EXPECT_NEAR(sol.values[static_cast<std::size_t>(mid + offset)],
                        oracle::baseline_value(toy, p), kExact)
                << "c=" << c << " offset " << offset;
        }
    }
}
