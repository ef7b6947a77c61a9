// Command-line driver: trajectory / ensemble / exact-benchmark / meanfield /
// fss subcommands producing CSV + JSON artifacts.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "swqt/config.hpp"
#include "swqt/ensemble.hpp"
#include "swqt/exact.hpp"
#include "swqt/fss.hpp"
#include "swqt/meanfield.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace swqt;

namespace {

constexpr const char* kCodeVersion = "0.1.0";

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct CsvWriter {
    std::ofstream out;
    CsvWriter(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& meta,
              const std::string& header)
        : out(path) {
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << "# schema_version=" << kSchemaVersion << "\n";
        for (const auto& [k, v] : meta) out << "# " << k << "=" << v << "\n";
        out << header << "\n";
    }
    void row(const std::vector<double>& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i)
            out << (i ? "," : "") << fmt(vals[i]);
        out << "\n";
    }
};

struct CommonArgs {
    std::string config_path;
    std::string output_dir;  // flag override
    int workers = 0;         // flag override
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config_path, "JSON run configuration")->required();
    cmd->add_option("-o,--output", args.output_dir, "output directory (overrides config/env)");
    cmd->add_option("-w,--workers", args.workers, "worker threads (overrides config/env)");
}

// Resolution order for overridable settings: flag > environment > config
// file > built-in default (workers default to the available cores).
RunConfig load_config(const CommonArgs& args) {
    const std::string text = read_file(args.config_path);
    RunConfig cfg = parse_config(text);

    const json raw = json::parse(text);
    const bool workers_in_config =
        raw.contains("ensemble") && raw["ensemble"].contains("workers");
    if (!workers_in_config) {
        const unsigned hc = std::thread::hardware_concurrency();
        cfg.ensemble.workers = hc > 0 ? int(hc) : 1;
    }
    if (const char* env = std::getenv("SWQT_WORKERS")) cfg.ensemble.workers = std::atoi(env);
    if (args.workers > 0) cfg.ensemble.workers = args.workers;
    if (cfg.ensemble.workers < 1)
        throw std::runtime_error("workers must be >= 1");

    if (const char* env = std::getenv("SWQT_OUTPUT_DIR")) cfg.output_dir = env;
    if (!args.output_dir.empty()) cfg.output_dir = args.output_dir;
    fs::create_directories(cfg.output_dir);
    return cfg;
}

void write_run_meta(const RunConfig& cfg, json extra, double wall_s) {
    json meta;
    meta["schema_version"] = kSchemaVersion;
    meta["config"] = json::parse(cfg.canonical());
    meta["config_hash"] = cfg.hash();
    meta["seed"] = cfg.ensemble.seed;
    meta["code_version"] = kCodeVersion;
    meta["rng_id"] = NoiseStream::rng_id();
    meta["wall_time_s"] = wall_s;
    meta.update(extra);
    std::ofstream out(fs::path(cfg.output_dir) / "run_meta.json");
    out << meta.dump(2) << "\n";
}

std::vector<std::array<double, 3>> init_dirs(const RunConfig& cfg) {
    if (!cfg.ensemble.init_directions.empty()) return cfg.ensemble.init_directions;
    return std::vector<std::array<double, 3>>(std::size_t(cfg.ensemble.spec.lattice.N),
                                              {0.0, 0.0, 1.0});
}

double site_mean(const Eigen::MatrixXd& m, int row) { return m.row(row).mean(); }

void write_series_csv(const fs::path& path, const RunConfig& cfg, const ObservableSeries& a,
                      const ObservableSeries* b, const char* label_a, const char* label_b) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# schema_version=" << kSchemaVersion << "\n# config_hash=" << cfg.hash() << "\n";
    out << "time,source,mx,my,mz,x2,eps\n";
    auto dump = [&](const ObservableSeries& s, const char* label) {
        for (int r = 0; r < s.rows(); ++r)
            out << fmt(s.time[r]) << "," << label << "," << fmt(site_mean(s.mx, r)) << ","
                << fmt(site_mean(s.my, r)) << "," << fmt(site_mean(s.mz, r)) << ","
                << fmt(s.x2(r)) << "," << fmt(s.eps(r)) << "\n";
    };
    dump(a, label_a);
    if (b) dump(*b, label_b);
}

double t_final_of(const RunConfig& cfg) {
    return cfg.ensemble.scheme == Unraveling::heterodyne ? cfg.ensemble.het.t_final
                                                         : cfg.ensemble.qj.t_final;
}

ObservableSeries run_single(const RunConfig& cfg, int traj_index) {
    NoiseStream noise(cfg.ensemble.seed, std::uint64_t(traj_index));
    GaussianTrajectoryState state = init_product_state(init_dirs(cfg));
    if (cfg.ensemble.scheme == Unraveling::heterodyne) {
        HeterodyneIntegrator integ(cfg.ensemble.spec);
        return integ.run(std::move(state), cfg.ensemble.het, noise);
    }
    QJumpIntegrator integ(cfg.ensemble.spec);
    return integ.run(std::move(state), cfg.ensemble.qj, noise);
}

int cmd_trajectory(const CommonArgs& args, int traj_index) {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig cfg = load_config(args);
    const ObservableSeries series = run_single(cfg, traj_index);
    write_series_csv(fs::path(cfg.output_dir) / "timeseries.csv", cfg, series, nullptr,
                     "trajectory", "");
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json extra;
    extra["trajectory_index"] = traj_index;
    extra["jump_count"] = series.jump_count;
    write_run_meta(cfg, extra, wall);
    return 0;
}

int cmd_exact_benchmark(const CommonArgs& args, int traj_index) {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig cfg = load_config(args);
    const int n = cfg.ensemble.spec.lattice.N;
    if (n > 12)
        throw std::runtime_error("exact-benchmark: reference solver limited to 12 sites, got " +
                                 std::to_string(n));
    const ObservableSeries approx = run_single(cfg, traj_index);
    NoiseStream noise(cfg.ensemble.seed, std::uint64_t(traj_index));
    ObservableSeries reference =
        cfg.ensemble.scheme == Unraveling::heterodyne
            ? exact::sse_trajectory(cfg.ensemble.spec, init_dirs(cfg), cfg.ensemble.het, noise)
            : exact::mcwf_trajectory(cfg.ensemble.spec, init_dirs(cfg), cfg.ensemble.qj, noise);
    write_series_csv(fs::path(cfg.output_dir) / "benchmark.csv", cfg, approx, &reference,
                     "spinwave", "exact");
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json extra;
    extra["trajectory_index"] = traj_index;
    write_run_meta(cfg, extra, wall);
    return 0;
}

int cmd_ensemble(const CommonArgs& args, int bins) {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg = load_config(args);
    const EnsembleRecord rec = run_ensemble(cfg.ensemble);

    static const char* kObsNames[OBS_COUNT] = {"mx", "my", "mz", "x2", "eps"};
    const std::vector<std::pair<std::string, std::string>> meta = {
        {"config_hash", cfg.hash()}};
    {
        CsvWriter ts(fs::path(cfg.output_dir) / "timeseries.csv", meta,
                     "time,observable,mean,sem");
        for (int obs = 0; obs < OBS_COUNT; ++obs)
            for (std::size_t r = 0; r < rec.time.size(); ++r) {
                ts.out << fmt(rec.time[r]) << "," << kObsNames[obs] << ","
                       << fmt(rec.mean(long(r), obs)) << "," << fmt(rec.sem(long(r), obs))
                       << "\n";
            }
    }
    {
        CsvWriter sc(fs::path(cfg.output_dir) / "samples.csv", meta, "mx");
        for (double v : rec.mx_samples) sc.row({v});
    }
    const MxHistogram hist = histogram_mx(rec, bins);
    {
        CsvWriter hc(fs::path(cfg.output_dir) / "histogram.csv", meta,
                     "bin_low,bin_high,density");
        for (std::size_t b = 0; b + 1 < hist.hist.edges.size(); ++b)
            hc.row({hist.hist.edges[b], hist.hist.edges[b + 1], hist.hist.density[b]});
    }

    const double tf = t_final_of(cfg);
    const double t_a = cfg.ensemble.sample_start > 0.0 ? cfg.ensemble.sample_start : 0.5 * tf;
    json steady;
    bool any_warning = false;
    for (int obs = 0; obs < OBS_COUNT; ++obs) {
        const SteadyEstimate est = steady_state_estimate(rec, obs, t_a, tf);
        steady[kObsNames[obs]] = {{"mean", est.mean},
                                  {"error", est.error},
                                  {"tau", est.tau},
                                  {"window_warning", est.window_warning}};
        any_warning = any_warning || est.window_warning;
    }
    if (any_warning)
        std::cerr << "warning: averaging window shorter than 10 autocorrelation times\n";

    // One scaling point per run; the family hash identifies runs that differ
    // only in (L, gamma, ensemble section) and may be pooled by `fss`.
    json family = json::parse(cfg.canonical());
    family["model"].erase("L");
    family["model"].erase("gamma");
    family.erase("ensemble");
    family.erase("output");
    std::uint64_t fh = 14695981039346656037ULL;
    for (unsigned char c : family.dump()) {
        fh ^= c;
        fh *= 1099511628211ULL;
    }
    std::ostringstream fhs;
    fhs << std::hex << fh;
    const SteadyEstimate x2 = steady_state_estimate(rec, OBS_X2, t_a, tf);
    {
        CsvWriter sp(fs::path(cfg.output_dir) / "scaling.csv",
                     {{"config_hash", cfg.hash()},
                      {"family_hash", fhs.str()},
                      {"J", fmt(cfg.ensemble.spec.J)}},
                     "L,gamma,x2,err");
        sp.row({double(cfg.ensemble.spec.lattice.L), cfg.ensemble.spec.gamma, x2.mean,
                std::max(x2.error, 1e-12)});
    }

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json extra;
    extra["n_traj_done"] = rec.n_traj_done;
    extra["n_aborted"] = rec.n_aborted;
    extra["total_jumps"] = rec.total_jumps;
    extra["steady_state"] = steady;
    extra["bimodality"] = hist.bimodality;
    extra["family_hash"] = fhs.str();
    write_run_meta(cfg, extra, wall);
    return 0;
}

int cmd_meanfield(const CommonArgs& args, double h_min, double h_max, int h_steps,
                  double g_min, double g_max, int g_steps) {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig cfg = load_config(args);
    ModelSpec spec = cfg.ensemble.spec;
    if (h_steps < 1 || g_steps < 1) throw std::runtime_error("meanfield: steps must be >= 1");
    CsvWriter out(fs::path(cfg.output_dir) / "meanfield.csv", {{"config_hash", cfg.hash()}},
                  "h,gamma,branch_id,m_x,m_y,m_z,stable");
    for (int gi = 0; gi < g_steps; ++gi) {
        spec.gamma = g_steps == 1 ? g_min
                                  : g_min + (g_max - g_min) * double(gi) / double(g_steps - 1);
        for (int hi = 0; hi < h_steps; ++hi) {
            spec.h = h_steps == 1 ? h_min
                                  : h_min + (h_max - h_min) * double(hi) / double(h_steps - 1);
            const auto fps = meanfield::steady_states(spec);
            for (std::size_t b = 0; b < fps.size(); ++b)
                out.row({spec.h, spec.gamma, double(b), fps[b].m(0), fps[b].m(1), fps[b].m(2),
                         fps[b].stable ? 1.0 : 0.0});
        }
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_run_meta(cfg, json::object(), wall);
    return 0;
}

struct ScalingFile {
    std::string family_hash;
    double J = 1.0;
    std::vector<fss::ScalingPoint> points;
};

ScalingFile read_scaling_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    ScalingFile out;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream is(line.substr(1));
            std::string kv;
            is >> kv;
            const auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
            if (key == "family_hash") out.family_hash = val;
            if (key == "J") out.J = std::stod(val);
            continue;
        }
        if (!header_seen) {
            if (line != "L,gamma,x2,err")
                throw std::runtime_error(path + ": expected header L,gamma,x2,err, got " + line);
            header_seen = true;
            continue;
        }
        std::istringstream is(line);
        fss::ScalingPoint p;
        char c1, c2, c3;
        if (!(is >> p.L >> c1 >> p.gamma >> c2 >> p.x2 >> c3 >> p.err))
            throw std::runtime_error(path + ": malformed row: " + line);
        out.points.push_back(p);
    }
    if (out.family_hash.empty())
        throw std::runtime_error(path + ": missing family_hash metadata");
    if (out.points.empty()) throw std::runtime_error(path + ": no data rows");
    return out;
}

int cmd_fss(const std::vector<std::string>& inputs, const std::string& out_dir,
            double gamma_c0, double beta0, double nu0, int bootstrap_n, double x_max,
            std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    fss::ScalingDataset data;
    std::string family;
    for (const auto& path : inputs) {
        const ScalingFile f = read_scaling_csv(path);
        if (family.empty()) {
            family = f.family_hash;
            data.J = f.J;
        } else if (f.family_hash != family) {
            throw std::runtime_error("fss: " + path +
                                     " comes from a different configuration family (hash " +
                                     f.family_hash + " vs " + family + ")");
        }
        data.points.insert(data.points.end(), f.points.begin(), f.points.end());
    }
    data.validate();

    const fss::CollapseParams init{gamma_c0 > 0.0 ? gamma_c0 : data.J, beta0, nu0};
    const fss::FitResult fit = fss::fit_collapse(data, init, bootstrap_n, seed, x_max);

    fs::create_directories(out_dir);
    json result;
    result["schema_version"] = kSchemaVersion;
    result["family_hash"] = family;
    result["gamma_c"] = {{"value", fit.value.gamma_c}, {"error", fit.error.gamma_c}};
    result["beta"] = {{"value", fit.value.beta}, {"error", fit.error.beta}};
    result["nu"] = {{"value", fit.value.nu}, {"error", fit.error.nu}};
    result["objective"] = fit.objective;
    result["converged"] = fit.converged;
    result["n_points"] = data.points.size();
    result["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    {
        std::ofstream out(fs::path(out_dir) / "fss_result.json");
        out << result.dump(2) << "\n";
    }
    CsvWriter cc(fs::path(out_dir) / "collapse.csv", {{"family_hash", family}},
                 "L,x,y,y_err");
    for (const auto& p : data.points) {
        const double lx = std::pow(double(p.L), 1.0 / fit.value.nu);
        const double ly = std::pow(double(p.L), 2.0 * fit.value.beta / fit.value.nu);
        cc.row({double(p.L), (p.gamma - fit.value.gamma_c) * lx / data.J, p.x2 * ly,
                p.err * ly});
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic spin-wave trajectory simulator"};
    app.require_subcommand(1);

    CommonArgs traj_args, bench_args, ens_args, mf_args;
    int traj_index = 0, bench_index = 0, bins = 51;

    auto* traj = app.add_subcommand("trajectory", "single stochastic trajectory");
    add_common(traj, traj_args);
    traj->add_option("--traj", traj_index, "trajectory index (noise stream)");

    auto* bench = app.add_subcommand("exact-benchmark",
                                     "paired spin-wave / exact trajectory, shared noise");
    add_common(bench, bench_args);
    bench->add_option("--traj", bench_index, "trajectory index (noise stream)");

    auto* ens = app.add_subcommand("ensemble", "trajectory ensemble with summary statistics");
    add_common(ens, ens_args);
    ens->add_option("--bins", bins, "histogram bins");

    auto* mf = app.add_subcommand("meanfield", "mean-field fixed-point sweep");
    add_common(mf, mf_args);
    double h_min = -1, h_max = -1, g_min = -1, g_max = -1;
    int h_steps = 1, g_steps = 1;
    mf->add_option("--h-min", h_min, "sweep start in h (default: config h)");
    mf->add_option("--h-max", h_max, "sweep end in h");
    mf->add_option("--h-steps", h_steps, "points in h");
    mf->add_option("--gamma-min", g_min, "sweep start in gamma (default: config gamma)");
    mf->add_option("--gamma-max", g_max, "sweep end in gamma");
    mf->add_option("--gamma-steps", g_steps, "points in gamma");

    auto* fss_cmd = app.add_subcommand("fss", "finite-size-scaling collapse fit");
    std::vector<std::string> fss_inputs;
    std::string fss_out = ".";
    double gamma_c0 = -1, beta0 = 0.5, nu0 = 1.0, x_max = 3.0;
    int bootstrap_n = 200;
    std::uint64_t fss_seed = 1;
    fss_cmd->add_option("inputs", fss_inputs, "scaling.csv files to pool")->required();
    fss_cmd->add_option("-o,--output", fss_out, "output directory");
    fss_cmd->add_option("--gamma-c", gamma_c0, "initial critical-dissipation guess");
    fss_cmd->add_option("--beta", beta0, "initial beta guess");
    fss_cmd->add_option("--nu", nu0, "initial nu guess");
    fss_cmd->add_option("--bootstrap", bootstrap_n, "bootstrap replicas");
    fss_cmd->add_option("--x-max", x_max, "fit window in the rescaled coordinate");
    fss_cmd->add_option("--seed", fss_seed, "bootstrap seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (traj->parsed()) return cmd_trajectory(traj_args, traj_index);
        if (bench->parsed()) return cmd_exact_benchmark(bench_args, bench_index);
        if (ens->parsed()) return cmd_ensemble(ens_args, bins);
        if (mf->parsed()) {
            RunConfig cfg = load_config(mf_args);
            if (h_min < 0) h_min = cfg.ensemble.spec.h;
            if (h_max < 0) h_max = h_min;
            if (g_min < 0) g_min = cfg.ensemble.spec.gamma;
            if (g_max < 0) g_max = g_min;
            return cmd_meanfield(mf_args, h_min, h_max, h_steps, g_min, g_max, g_steps);
        }
        if (fss_cmd->parsed())
            return cmd_fss(fss_inputs, fss_out, gamma_c0, beta0, nu0, bootstrap_n, x_max,
                           fss_seed);
    } catch (const std::exception& e) {
        json err;
        err["error"] = e.what();
        err["schema_version"] = kSchemaVersion;
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 2;
}
