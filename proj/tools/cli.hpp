#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qsearch/io.hpp"

namespace qsearch::cli {

inline constexpr const char* kOutEnv = "QSEARCH_OUT";

struct RunConfig {
    std::string command;
    ModelParams params;
    SolverSettings settings;
    std::int64_t trials = 10000;
    unsigned workers = 1;
    std::filesystem::path out = "qsearch-out";
    std::filesystem::path bundle;  // explicit bundle to reuse
    bool force = false;
    bool json = false;
    std::vector<double> snr_list{0, 2, 4, 6, 8, 10};

    void validate() const;
    Json echo() const;
    std::filesystem::path bundle_path() const;
};

// A policy together with the bundle it was built from.
struct Solved {
    SurfaceBundle bundle;
    MixedPolicy policy;
    bool cache_hit = false;
};

// Loads the cached bundle for the config, or solves and writes it.
Solved load_or_solve(const RunConfig& cfg, std::ostream& log);

int cmd_solve(const RunConfig& cfg, std::ostream& out);
int cmd_regions(const RunConfig& cfg, std::ostream& out);
int cmd_simulate(const RunConfig& cfg, std::ostream& out);
int cmd_compare(const RunConfig& cfg, std::ostream& out);
int cmd_sweep(const RunConfig& cfg, std::ostream& out);

// Parses argv and dispatches. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qsearch::cli
