#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsearch/dp.hpp"
#include "qsearch/policy.hpp"
#include "qsearch/sim.hpp"

namespace qsearch {

inline constexpr int kBundleFormatVersion = 1;

// Canonical JSON: object keys sorted, doubles in shortest round-trip form.
using Json = nlohmann::json;

Json to_json(const ModelParams& params);
ModelParams params_from_json(const Json& j);
Json to_json(const SolverSettings& settings);
SolverSettings settings_from_json(const Json& j);
Json to_json(const SimSummary& summary);
Json to_json(const IterationStats& stats);
Json to_json(const ComparisonReport& report);

// Hex FNV-1a digests of canonical JSON. model_hash covers the model (pi, c,
// densities) but not the seed; solve_key adds the solver settings and names
// the bundle file.
std::string model_hash(const ModelParams& params);
std::string solve_key(const ModelParams& params, const SolverSettings& settings);

// Structural equality via the canonical JSON form.
bool operator==(const ModelParams& a, const ModelParams& b);
bool operator==(const SolverSettings& a, const SolverSettings& b);
bool operator==(const IterationStats& a, const IterationStats& b);

// Serialized solution of one (params, settings) pair.
struct SurfaceBundle {
    int format_version = kBundleFormatVersion;
    ModelParams params;
    SolverSettings settings;
    std::string hash;  // solve_key(params, settings)
    int grid_m = 0;
    std::vector<double> g;
    std::vector<double> vs;
    std::vector<double> ac;
    double a_s = 0.0;
    std::vector<std::uint8_t> stop_mask;
    std::vector<std::uint8_t> switch_mask;
    IterationStats refinement_stats;
    IterationStats scanning_stats;
    std::string solved_at;  // UTC, ISO 8601

    friend bool operator==(const SurfaceBundle&, const SurfaceBundle&) = default;
};

SurfaceBundle make_bundle(const MixedPolicy& policy, const SolverSettings& settings,
                          std::string solved_at);

std::string bundle_json(const SurfaceBundle& bundle);
SurfaceBundle parse_bundle(const std::string& text);
void save_bundle(const SurfaceBundle& bundle, const std::filesystem::path& path);
// Throws BundleError of kind io, parse, version, hash or shape.
SurfaceBundle load_bundle(const std::filesystem::path& path);

// Refinement value tables (one log-LR table per grid node) are large, so they
// go to a raw binary sidecar next to the bundle instead of the JSON.
std::filesystem::path tables_path(const std::filesystem::path& bundle_path);
void save_tables(const RefinementSolution& refinement, const std::string& hash,
                 const std::filesystem::path& path);
// Returns the tables, or an empty vector when the file is absent or was
// written for a different hash or shape.
std::vector<double> load_tables(const std::filesystem::path& path, const std::string& hash,
                                std::size_t expected);

// Rebuilds the policy from a bundle. Missing or stale tables are recomputed by
// re-solving the refinement problem.
MixedPolicy policy_from_bundle(const SurfaceBundle& bundle,
                               const std::filesystem::path& tables_file = {});

// CSV exports, rows in lexicographic node order.
void export_surface_csv(const ValueSurface& surface, const std::filesystem::path& path);
void export_regions_csv(const MixedPolicy& policy, const std::filesystem::path& path);
void export_trials_csv(const std::vector<TrialRecord>& records, const std::filesystem::path& path);

// Writes text to path, creating parent directories; BundleError(io) on failure.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// Shortest round-trip decimal form of x.
std::string format_double(double x);

}  // namespace qsearch
