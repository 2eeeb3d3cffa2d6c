#include "qsearch/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "qsearch/errors.hpp"

namespace qsearch {

namespace {

constexpr char kTablesMagic[8] = {'Q', 'S', 'V', 'R', 'T', 'B', 'L', '1'};

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

Json model_json_without_seed(const ModelParams& params) {
    Json j = to_json(params);
    j.erase("rng_seed");
    return j;
}

Json stats_json(const IterationStats& s) { return to_json(s); }

IterationStats stats_from_json(const Json& j) {
    IterationStats s;
    s.iterations = j.at("iterations").get<int>();
    s.residual = j.at("residual").get<double>();
    s.max_increase = j.at("max_increase").get<double>();
    return s;
}

Json mask_json(const std::vector<std::uint8_t>& mask) {
    Json arr = Json::array();
    for (auto m : mask) arr.push_back(static_cast<int>(m));
    return arr;
}

std::vector<std::uint8_t> mask_from_json(const Json& j) {
    std::vector<std::uint8_t> mask;
    mask.reserve(j.size());
    for (const auto& v : j) {
        const int m = v.get<int>();
        if (m != 0 && m != 1) throw BundleError(BundleError::Kind::shape, "mask entries must be 0 or 1");
        mask.push_back(static_cast<std::uint8_t>(m));
    }
    return mask;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = {}) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::out | std::ios::trunc | mode);
    if (!out) throw BundleError(BundleError::Kind::io, "cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw BundleError(BundleError::Kind::io, "write failed for " + path.string());
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

Json to_json(const ModelParams& params) {
    const auto& pair = params.densities;
    Json d;
    switch (pair.kind()) {
    case DensityKind::gaussian:
        d["kind"] = "gaussian";
        d["sigma2"] = pair.sigma2();
        d["p"] = pair.signal_power();
        break;
    case DensityKind::tabulated:
        d["kind"] = "tabulated";
        d["x0"] = pair.f0().x0();
        d["dx"] = pair.f0().dx();
        d["f0"] = std::vector<double>(pair.f0().values().begin(), pair.f0().values().end());
        d["f1"] = std::vector<double>(pair.f1().values().begin(), pair.f1().values().end());
        break;
    case DensityKind::discrete:
        d["kind"] = "discrete";
        d["f0"] = std::vector<double>(pair.f0().values().begin(), pair.f0().values().end());
        d["f1"] = std::vector<double>(pair.f1().values().begin(), pair.f1().values().end());
        break;
    }
    Json j;
    j["pi"] = params.pi;
    j["c"] = params.c;
    j["densities"] = std::move(d);
    j["rng_seed"] = params.rng_seed;
    return j;
}

ModelParams params_from_json(const Json& j) try {
    ModelParams p;
    p.pi = j.at("pi").get<double>();
    p.c = j.at("c").get<double>();
    p.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    const auto& d = j.at("densities");
    const auto kind = d.at("kind").get<std::string>();
    if (kind == "gaussian") {
        p.densities = DensityPair::gaussian(d.at("sigma2").get<double>(), d.at("p").get<double>());
    } else if (kind == "tabulated") {
        p.densities = DensityPair::tabulated(d.at("x0").get<double>(), d.at("dx").get<double>(),
                                             d.at("f0").get<std::vector<double>>(),
                                             d.at("f1").get<std::vector<double>>());
    } else if (kind == "discrete") {
        p.densities = DensityPair::discrete(d.at("f0").get<std::vector<double>>(),
                                            d.at("f1").get<std::vector<double>>());
    } else {
        throw ConfigError("unknown density kind '" + kind + "'");
    }
    p.validate();
    return p;
} catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed model parameters: ") + e.what());
}

Json to_json(const SolverSettings& s) {
    Json j;
    j["grid_m"] = s.grid_m;
    j["quad_points"] = s.quad.n_points;
    j["quad_std_multiple"] = s.quad.std_multiple;
    j["tol"] = s.tol;
    j["max_iter"] = s.max_iter;
    j["loglr_bound"] = s.loglr_bound;
    j["loglr_points"] = s.loglr_points;
    j["horizon"] = s.horizon ? Json(*s.horizon) : Json(nullptr);
    return j;
}

SolverSettings settings_from_json(const Json& j) try {
    SolverSettings s;
    s.grid_m = j.at("grid_m").get<int>();
    s.quad.n_points = j.at("quad_points").get<int>();
    s.quad.std_multiple = j.at("quad_std_multiple").get<double>();
    s.tol = j.at("tol").get<double>();
    s.max_iter = j.at("max_iter").get<int>();
    s.loglr_bound = j.at("loglr_bound").get<double>();
    s.loglr_points = j.at("loglr_points").get<int>();
    if (!j.at("horizon").is_null()) s.horizon = j.at("horizon").get<int>();
    s.validate();
    return s;
} catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed solver settings: ") + e.what());
}

Json to_json(const IterationStats& s) {
    return Json{{"iterations", s.iterations}, {"residual", s.residual}, {"max_increase", s.max_increase}};
}

Json to_json(const SimSummary& s) {
    Json j;
    j["n_trials"] = s.n_trials;
    j["c"] = s.c;
    j["mean_tau1"] = s.mean_tau1;
    j["mean_tau2"] = s.mean_tau2;
    j["mean_delay"] = s.mean_delay;
    j["mean_switches"] = s.mean_switches;
    j["error_rate"] = s.error_rate;
    j["mean_cost"] = s.mean_cost;
    j["se_tau1"] = s.se_tau1;
    j["se_tau2"] = s.se_tau2;
    j["se_delay"] = s.se_delay;
    j["se_error"] = s.se_error;
    j["se_cost"] = s.se_cost;
    j["seed"] = s.seed;
    j["params_hash"] = s.params_hash;
    return j;
}

Json to_json(const ComparisonReport& r) {
    Json j;
    j["mixed"] = to_json(r.mixed);
    j["baseline"] = to_json(r.baseline);
    j["target_error"] = r.target_error;
    j["pi_upper"] = r.pi_upper;
    // NaN is not representable in JSON; undefined savings become null.
    j["savings"] = std::isfinite(r.savings) ? Json(r.savings) : Json(nullptr);
    j["savings_se"] = std::isfinite(r.savings_se) ? Json(r.savings_se) : Json(nullptr);
    j["uninformative"] = r.uninformative;
    return j;
}

std::string model_hash(const ModelParams& params) {
    return hex(fnv1a(model_json_without_seed(params).dump()));
}

std::string solve_key(const ModelParams& params, const SolverSettings& settings) {
    const Json j{{"model", model_json_without_seed(params)}, {"solver", to_json(settings)}};
    return hex(fnv1a(j.dump()));
}

bool operator==(const ModelParams& a, const ModelParams& b) { return to_json(a) == to_json(b); }
bool operator==(const SolverSettings& a, const SolverSettings& b) {
    return to_json(a) == to_json(b);
}
bool operator==(const IterationStats& a, const IterationStats& b) {
    return a.iterations == b.iterations && a.residual == b.residual &&
           a.max_increase == b.max_increase;
}

SurfaceBundle make_bundle(const MixedPolicy& policy, const SolverSettings& settings,
                          std::string solved_at) {
    SurfaceBundle b;
    b.params = policy.params();
    b.settings = settings;
    b.hash = solve_key(b.params, settings);
    b.grid_m = policy.refinement().grid().resolution();
    const auto g = policy.refinement().g().values();
    const auto vs = policy.scanning().vs.values();
    const auto ac = policy.scanning().ac.values();
    b.g.assign(g.begin(), g.end());
    b.vs.assign(vs.begin(), vs.end());
    b.ac.assign(ac.begin(), ac.end());
    b.a_s = policy.scanning().a_s;
    b.stop_mask = policy.regions().stop_mask;
    b.switch_mask = policy.regions().switch_mask;
    b.refinement_stats = policy.refinement().stats();
    b.scanning_stats = policy.scanning().stats;
    b.solved_at = std::move(solved_at);
    return b;
}

std::string bundle_json(const SurfaceBundle& b) {
    Json j;
    j["format_version"] = b.format_version;
    j["params"] = to_json(b.params);
    j["settings"] = to_json(b.settings);
    j["hash"] = b.hash;
    j["grid_m"] = b.grid_m;
    j["g"] = b.g;
    j["vs"] = b.vs;
    j["ac"] = b.ac;
    j["a_s"] = b.a_s;
    j["stop_mask"] = mask_json(b.stop_mask);
    j["switch_mask"] = mask_json(b.switch_mask);
    j["refinement_stats"] = stats_json(b.refinement_stats);
    j["scanning_stats"] = stats_json(b.scanning_stats);
    j["solved_at"] = b.solved_at;
    return j.dump() + "\n";
}

SurfaceBundle parse_bundle(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception& e) {
        throw BundleError(BundleError::Kind::parse, std::string("bundle is not valid JSON: ") + e.what());
    }
    SurfaceBundle b;
    try {
        b.format_version = j.at("format_version").get<int>();
        if (b.format_version != kBundleFormatVersion) {
            throw BundleError(BundleError::Kind::version,
                              "bundle format version " + std::to_string(b.format_version) +
                                  ", expected " + std::to_string(kBundleFormatVersion));
        }
        b.params = params_from_json(j.at("params"));
        b.settings = settings_from_json(j.at("settings"));
        b.hash = j.at("hash").get<std::string>();
        b.grid_m = j.at("grid_m").get<int>();
        b.g = j.at("g").get<std::vector<double>>();
        b.vs = j.at("vs").get<std::vector<double>>();
        b.ac = j.at("ac").get<std::vector<double>>();
        b.a_s = j.at("a_s").get<double>();
        b.stop_mask = mask_from_json(j.at("stop_mask"));
        b.switch_mask = mask_from_json(j.at("switch_mask"));
        b.refinement_stats = stats_from_json(j.at("refinement_stats"));
        b.scanning_stats = stats_from_json(j.at("scanning_stats"));
        b.solved_at = j.at("solved_at").get<std::string>();
    } catch (const Json::exception& e) {
        throw BundleError(BundleError::Kind::parse, std::string("malformed bundle: ") + e.what());
    } catch (const ConfigError& e) {
        throw BundleError(BundleError::Kind::parse, std::string("invalid bundle contents: ") + e.what());
    }

    const auto expected = solve_key(b.params, b.settings);
    if (b.hash != expected) {
        throw BundleError(BundleError::Kind::hash,
                          "bundle hash " + b.hash + " does not match its contents (" + expected + ")");
    }
    if (b.grid_m != b.settings.grid_m || b.grid_m < 1) {
        throw BundleError(BundleError::Kind::shape, "bundle grid resolution disagrees with its settings");
    }
    const auto n = triangular_node_count(b.grid_m);
    if (b.g.size() != n || b.vs.size() != n || b.ac.size() != n || b.stop_mask.size() != n ||
        b.switch_mask.size() != n) {
        throw BundleError(BundleError::Kind::shape,
                          "bundle arrays must have " + std::to_string(n) + " entries");
    }
    return b;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto out = open_out(path, std::ios::binary);
    out << text;
    finish(out, path);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BundleError(BundleError::Kind::io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void save_bundle(const SurfaceBundle& bundle, const std::filesystem::path& path) {
    write_text(path, bundle_json(bundle));
}

SurfaceBundle load_bundle(const std::filesystem::path& path) { return parse_bundle(read_text(path)); }

std::filesystem::path tables_path(const std::filesystem::path& bundle_path) {
    auto p = bundle_path;
    p.replace_extension(".vr.bin");
    return p;
}

void save_tables(const RefinementSolution& refinement, const std::string& hash,
                 const std::filesystem::path& path) {
    auto out = open_out(path, std::ios::binary);
    const auto tables = refinement.tables();
    const std::uint64_t hash_len = hash.size();
    const std::uint64_t count = tables.size();
    out.write(kTablesMagic, sizeof kTablesMagic);
    out.write(reinterpret_cast<const char*>(&hash_len), sizeof hash_len);
    out.write(hash.data(), static_cast<std::streamsize>(hash.size()));
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    out.write(reinterpret_cast<const char*>(tables.data()),
              static_cast<std::streamsize>(count * sizeof(double)));
    finish(out, path);
}

std::vector<double> load_tables(const std::filesystem::path& path, const std::string& hash,
                                std::size_t expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    char magic[sizeof kTablesMagic];
    std::uint64_t hash_len = 0;
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kTablesMagic, sizeof magic) != 0) return {};
    if (!in.read(reinterpret_cast<char*>(&hash_len), sizeof hash_len) || hash_len != hash.size()) {
        return {};
    }
    std::string stored(hash_len, '\0');
    std::uint64_t count = 0;
    if (!in.read(stored.data(), static_cast<std::streamsize>(hash_len)) || stored != hash) return {};
    if (!in.read(reinterpret_cast<char*>(&count), sizeof count) || count != expected) return {};
    std::vector<double> tables(expected);
    if (!in.read(reinterpret_cast<char*>(tables.data()),
                 static_cast<std::streamsize>(expected * sizeof(double)))) {
        return {};
    }
    return tables;
}

MixedPolicy policy_from_bundle(const SurfaceBundle& bundle, const std::filesystem::path& tables_file) {
    const TriangularGrid grid(bundle.grid_m);
    const LogLrGrid lr(bundle.settings.loglr_bound, bundle.settings.loglr_points);
    const std::size_t expected = grid.size() * static_cast<std::size_t>(lr.size());

    std::vector<double> tables;
    if (!tables_file.empty()) tables = load_tables(tables_file, bundle.hash, expected);

    std::shared_ptr<const RefinementSolution> refinement;
    if (tables.empty()) {
        refinement = std::make_shared<const RefinementSolution>(
            solve_refinement(bundle.params, bundle.settings));
    } else {
        SurfaceMeta meta;
        meta.quad_points = bundle.settings.quad.n_points;
        meta.tolerance = bundle.settings.tol;
        meta.iterations = bundle.refinement_stats.iterations;
        meta.residual = bundle.refinement_stats.residual;
        refinement = std::make_shared<const RefinementSolution>(
            grid, lr, build_loglr_kernel(bundle.params.densities, bundle.settings.quad, lr),
            bundle.params.c, std::move(tables), ValueSurface(grid, bundle.g, meta),
            bundle.refinement_stats);
    }

    SurfaceMeta meta;
    meta.quad_points = bundle.settings.quad.n_points;
    meta.tolerance = bundle.settings.tol;
    meta.iterations = bundle.scanning_stats.iterations;
    meta.residual = bundle.scanning_stats.residual;
    ScanningSolution scanning{ValueSurface(grid, bundle.vs, meta), ValueSurface(grid, bundle.ac, meta),
                              bundle.a_s, scan_prior(bundle.params), bundle.scanning_stats};
    return MixedPolicy(bundle.params, std::move(refinement), std::move(scanning));
}

void export_surface_csv(const ValueSurface& surface, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "p11,pmix,value\n";
    const auto& grid = surface.grid();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto b = grid.node(k);
        out << format_double(b.p11) << ',' << format_double(b.pmix) << ','
            << format_double(surface[k]) << '\n';
    }
    finish(out, path);
}

void export_regions_csv(const MixedPolicy& policy, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "p11,pmix,g,V_s,A_c,in_R_tau,in_R_phi\n";
    const auto& g = policy.refinement().g();
    const auto& vs = policy.scanning().vs;
    const auto& ac = policy.scanning().ac;
    const auto& regions = policy.regions();
    const auto& grid = g.grid();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto b = grid.node(k);
        out << format_double(b.p11) << ',' << format_double(b.pmix) << ',' << format_double(g[k])
            << ',' << format_double(vs[k]) << ',' << format_double(ac[k]) << ','
            << static_cast<int>(regions.stop_mask[k]) << ','
            << static_cast<int>(regions.switch_mask[k]) << '\n';
    }
    finish(out, path);
}

void export_trials_csv(const std::vector<TrialRecord>& records, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "trial,tau1,tau2,n_switches,correct\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        out << i << ',' << r.tau1 << ',' << r.tau2 << ',' << r.n_switches << ','
            << (r.correct ? 1 : 0) << '\n';
    }
    finish(out, path);
}

}  // namespace qsearch
