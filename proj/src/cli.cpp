#include "tsslab/cli.hpp"

#include "tsslab/assessment.hpp"
#include "tsslab/boa.hpp"
#include "tsslab/config.hpp"
#include "tsslab/errors.hpp"
#include "tsslab/export.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#ifndef TSSLAB_VERSION
#define TSSLAB_VERSION "0.0.0"
#endif

namespace tsslab {

namespace {

struct Globals {
    std::string preset;
    std::string out_dir = "out";
    std::optional<double> dt;
    int jobs = 0;
    std::uint64_t seed = 1;
};

struct Loaded {
    RunConfig config;
    std::string hash;
};

Loaded load(const std::string& path, const Globals& g)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    Loaded l{parse_config(buf.str(), path, g.preset), fnv1a_hex(buf.str())};
    if (g.dt) {
        l.config.scenario.dt = *g.dt;
        l.config.scenario.sample_interval = std::max(l.config.scenario.sample_interval, *g.dt);
    }
    l.config.scenario.validate();
    return l;
}

SystemParams preset_params(const Globals& g)
{
    return load_preset(g.preset.empty() ? std::string(kPaperAppendixPreset) : g.preset);
}

RunManifest start_manifest(const std::string& command, const std::string& preset, const std::string& hash)
{
    RunManifest m;
    m.command = command;
    m.config_hash = hash;
    m.version = TSSLAB_VERSION;
    m.preset = preset;
    m.started = utc_now_iso8601();
    return m;
}

void finish_manifest(RunManifest& m, const Globals& g, const std::string& stem,
                     const std::vector<std::filesystem::path>& written)
{
    m.finished = utc_now_iso8601();
    for (const auto& p : written)
        m.outputs.push_back(p.filename().string());
    write_files(g.out_dir, {{stem + ".manifest.json", m.to_json()}});
}

std::string report_csv(const CctReport& r)
{
    std::ostringstream o;
    write_report_csv_header(o);
    write_report_csv_row(o, r);
    return o.str();
}

int report_exit(const CctReport& r)
{
    return r.status == "ok" ? kExitOk : kExitMethodFailure;
}

int cmd_run(const std::string& path, const Globals& g, std::ostream& out)
{
    const Loaded l = load(path, g);
    const Scenario& sc = l.config.scenario;
    if (l.config.methods.empty())
        throw ValidationError("run: no methods requested (run.methods is empty)");
    RunManifest m = start_manifest("run", l.config.preset, l.hash);

    const Trajectory tr = simulate(sc);
    const Outcome outcome = classify_outcome(tr, sc);
    const CctReport r = assess(sc, l.config.methods);

    std::ostringstream traj;
    write_trajectory_csv(traj, tr);
    const auto written = write_files(g.out_dir, {{sc.name + "_trajectory.csv", traj.str()},
                                                 {sc.name + "_transitions.json", transitions_json(tr)},
                                                 {sc.name + "_report.csv", report_csv(r)},
                                                 {sc.name + "_report.json", report_json(r)}});
    m.rows.emplace_back(sc.name, r.status);
    finish_manifest(m, g, sc.name, written);

    nlohmann::ordered_json j;
    j["scenario"] = sc.name;
    j["outcome"] = outcome_name(outcome);
    j["blew_up"] = tr.blew_up;
    j["report"] = nlohmann::ordered_json::parse(report_json(r));
    out << j.dump(2) << '\n';
    return report_exit(r);
}

int cmd_assess_eac(const std::string& path, bool json, const Globals& g, std::ostream& out)
{
    const Loaded l = load(path, g);
    const Scenario& sc = l.config.scenario;
    RunManifest m = start_manifest("assess eac", l.config.preset, l.hash);
    const CctReport r = assess(sc, {false, true, false});
    const auto written = write_files(g.out_dir, {{sc.name + "_eac.csv", report_csv(r)},
                                                 {sc.name + "_eac.json", report_json(r)}});
    m.rows.emplace_back(sc.name, r.status);
    finish_manifest(m, g, sc.name + "_eac", written);
    out << (json ? report_json(r) + "\n" : report_csv(r));
    return report_exit(r);
}

int cmd_assess_boa(const std::string& path, bool json, bool grid, std::size_t samples,
                   const Globals& g, std::ostream& out)
{
    const Loaded l = load(path, g);
    const Scenario& sc = l.config.scenario;
    RunManifest m = start_manifest("assess boa", l.config.preset, l.hash);
    const CctReport r = assess(sc, {false, false, true});

    std::vector<ExportFile> files = {{sc.name + "_boa.csv", report_csv(r)},
                                     {sc.name + "_boa.json", report_json(r)}};
    const GseParams g3 = stage3_frozen(sc);
    if (g3.equilibria().exists) {
        std::ostringstream b;
        write_boundary_csv(b, boundary_manifold(g3));
        files.push_back({sc.name + "_boundary.csv", b.str()});
        if (grid) {
            std::ostringstream o;
            write_grid_csv(o, membership_grid(g3, GridSpec{}));
            files.push_back({sc.name + "_grid.csv", o.str()});
        }
        if (samples > 0) {
            const auto pts = sample_points(StateWindow{}, samples, g.seed);
            const auto verdicts = membership_batch(pts, g3);
            std::vector<GridCell> cells(pts.size());
            for (std::size_t i = 0; i < pts.size(); ++i)
                cells[i] = {pts[i], verdicts[i]};
            std::ostringstream o;
            write_grid_csv(o, cells);
            files.push_back({sc.name + "_samples.csv", o.str()});
        }
    }
    const auto written = write_files(g.out_dir, files);
    m.rows.emplace_back(sc.name, r.status);
    finish_manifest(m, g, sc.name + "_boa", written);
    out << (json ? report_json(r) + "\n" : report_csv(r));
    return report_exit(r);
}

int cmd_cct(const std::string& path, bool json, const Globals& g, std::ostream& out)
{
    const Loaded l = load(path, g);
    if (l.config.methods.empty())
        throw ValidationError("cct: no methods requested (run.methods is empty)");
    const Scenario& sc = l.config.scenario;
    RunManifest m = start_manifest("cct", l.config.preset, l.hash);
    const CctReport r = assess(sc, l.config.methods);
    const auto written = write_files(g.out_dir, {{sc.name + "_cct.csv", report_csv(r)}});
    m.rows.emplace_back(sc.name, r.status);
    finish_manifest(m, g, sc.name + "_cct", written);
    out << (json ? report_json(r) + "\n" : report_csv(r));
    return report_exit(r);
}

int cmd_sweep(const std::string& path, const Globals& g, std::ostream& out)
{
    const Loaded l = load(path, g);
    SweepSpec spec{l.config.scenario, l.config.sweep, l.config.methods};
    spec.validate();
    RunManifest m = start_manifest("sweep", l.config.preset, l.hash);
    const std::vector<SweepRow> rows = run_sweep(spec, g.jobs);

    std::ostringstream o;
    write_report_csv_header(o);
    for (const SweepRow& r : rows) {
        write_report_csv_row(o, r.report);
        m.rows.emplace_back(std::to_string(r.index), r.report.status);
    }
    const std::string stem = l.config.scenario.name + "_sweep";
    const auto written = write_files(g.out_dir, {{stem + ".csv", o.str()}});
    finish_manifest(m, g, stem, written);
    out << written.front().string() << '\n';
    return kExitOk;
}

int cmd_table(int table, const Globals& g, std::ostream& out)
{
    const std::string preset = g.preset.empty() ? std::string(kPaperAppendixPreset) : g.preset;
    RunManifest m = start_manifest("reproduce-table " + std::to_string(table), preset, "");
    const std::vector<TableRow> rows = reproduce_table(table, preset_params(g), g.jobs);
    std::ostringstream o;
    write_table_csv(o, rows);
    for (const TableRow& r : rows)
        m.rows.emplace_back(r.scenario.name, r.report.status);
    const std::string stem = "table" + std::to_string(table);
    const auto written = write_files(g.out_dir, {{stem + ".csv", o.str()}});
    finish_manifest(m, g, stem, written);
    out << o.str();
    return kExitOk;
}

int cmd_export(const std::string& id, const std::string& config, const Globals& g, std::ostream& out)
{
    Scenario sc = default_figure_scenario(id, preset_params(g));
    std::string hash;
    std::string preset = g.preset.empty() ? std::string(kPaperAppendixPreset) : g.preset;
    if (!config.empty()) {
        const Loaded l = load(config, g);
        sc = l.config.scenario;
        hash = l.hash;
        preset = l.config.preset;
    } else if (g.dt) {
        sc.dt = *g.dt;
        sc.sample_interval = std::max(sc.sample_interval, *g.dt);
    }
    RunManifest m = start_manifest("export-figure " + id, preset, hash);
    const auto written = write_files(g.out_dir, export_figure_data(id, sc));
    finish_manifest(m, g, id, written);
    for (const auto& p : written)
        out << p.string() << '\n';
    return kExitOk;
}

int cmd_init(const std::string& path, const Globals& g, std::ostream& out)
{
    RunConfig c;
    if (!g.preset.empty())
        c.preset = g.preset;
    c.scenario = reference_case(1, load_preset(c.preset));
    c.scenario.name = "case1";
    if (g.dt)
        c.scenario.dt = *g.dt;
    const std::string text = write_config(c);
    if (path.empty()) {
        out << text;
        return kExitOk;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error("cannot write '" + path + "'");
    os << text;
    out << path << '\n';
    return kExitOk;
}

void print_error(std::ostream& err, const char* kind, const std::string& msg, int code)
{
    nlohmann::ordered_json j;
    j["error"] = kind;
    j["message"] = msg;
    j["exit_code"] = code;
    err << j.dump() << '\n';
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"tsslab: staged LVRT simulation and transient synchronization stability assessment"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    double dt = 0.0;
    app.add_option("--preset", g.preset, "parameter preset (built-in: paper-appendix)");
    app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
    auto* dt_opt = app.add_option("--dt", dt, "integration step override, s")->check(CLI::PositiveNumber);
    app.add_option("--jobs", g.jobs, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--seed", g.seed, "seed for Monte-Carlo membership sampling")->capture_default_str();

    std::string config;
    bool json = false;

    auto* run = app.add_subcommand("run", "simulate a scenario and run its methods");
    run->add_option("config", config, "config file")->required();

    auto* assess_cmd = app.add_subcommand("assess", "single-method assessment");
    assess_cmd->require_subcommand(1);
    auto* eac = assess_cmd->add_subcommand("eac", "equal-area CCT and clearing angle");
    eac->add_option("config", config, "config file")->required();
    eac->add_flag("--json", json, "print JSON instead of CSV");
    auto* boa = assess_cmd->add_subcommand("boa", "basin-of-attraction CCT, boundary and membership");
    boa->add_option("config", config, "config file")->required();
    boa->add_flag("--json", json, "print JSON instead of CSV");
    bool grid = false;
    std::size_t samples = 0;
    boa->add_flag("--grid", grid, "also export the membership grid");
    boa->add_option("--samples", samples, "random membership samples (uses --seed)");

    auto* cct = app.add_subcommand("cct", "CCT by every configured method");
    cct->add_option("config", config, "config file")->required();
    cct->add_flag("--json", json, "print JSON instead of CSV");

    auto* sweep = app.add_subcommand("sweep", "run the [sweep] axes of a config");
    sweep->add_option("config", config, "config file")->required();

    int table = 0;
    auto* tab = app.add_subcommand("reproduce-table", "reference CCT tables");
    tab->add_option("table", table, "1 or 2")->required()->check(CLI::IsMember({1, 2}));

    std::string fig;
    std::string fig_config;
    auto* exp = app.add_subcommand("export-figure", "plot-ready CSV bundles");
    exp->add_option("id", fig, "fig4, fig5, fig6, fig8 or fig9")->required();
    exp->add_option("--config", fig_config, "scenario override (fig4, fig5, fig9)");

    std::string init_path;
    auto* init = app.add_subcommand("init", "write a default config");
    init->add_option("path", init_path, "destination (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kExitOk;
        }
        print_error(err, "usage", e.what(), kExitValidation);
        return kExitValidation;
    }
    if (dt_opt->count() > 0)
        g.dt = dt;
    omp_set_num_threads(resolve_jobs(g.jobs));

    try {
        if (run->parsed())
            return cmd_run(config, g, out);
        if (eac->parsed())
            return cmd_assess_eac(config, json, g, out);
        if (boa->parsed())
            return cmd_assess_boa(config, json, grid, samples, g, out);
        if (cct->parsed())
            return cmd_cct(config, json, g, out);
        if (sweep->parsed())
            return cmd_sweep(config, g, out);
        if (tab->parsed())
            return cmd_table(table, g, out);
        if (exp->parsed())
            return cmd_export(fig, fig_config, g, out);
        if (init->parsed())
            return cmd_init(init_path, g, out);
    } catch (const ConfigError& e) {
        print_error(err, "config", e.what(), kExitConfigParse);
        return kExitConfigParse;
    } catch (const ValidationError& e) {
        print_error(err, "validation", e.what(), kExitValidation);
        return kExitValidation;
    } catch (const ParameterError& e) {
        print_error(err, "parameter", e.what(), kExitParameter);
        return kExitParameter;
    } catch (const Error& e) {
        print_error(err, "method", e.what(), kExitMethodFailure);
        return kExitMethodFailure;
    } catch (const std::exception& e) {
        print_error(err, "internal", e.what(), kExitInternal);
        return kExitInternal;
    }
    return kExitInternal;
}

} // namespace tsslab
