#include "tsslab/export.hpp"

#include "tsslab/csv.hpp"
#include "tsslab/eac.hpp"
#include "tsslab/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <ctime>
#include <fstream>
#include <numbers>
#include <sstream>

namespace tsslab {

void write_trajectory_csv(std::ostream& os, const Trajectory& tr)
{
    csv::Writer w(os);
    w.header({"t", "omega_r", "i_rd", "i_rq", "x_pll", "phi_pll", "u_td", "u_tq", "U_t", "P_t", "stage"});
    for (const TrajectorySample& s : tr.samples) {
        w.field(s.t).field(s.state.omega_r).field(s.out.i_rd).field(s.out.i_rq);
        w.field(s.state.x_pll).field(s.state.phi_pll).field(s.out.u_td).field(s.out.u_tq);
        w.field(s.out.U_t).field(s.out.P_t).field(stage_number(s.stage));
        w.end_row();
    }
}

std::string transitions_json(const Trajectory& tr)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const Transition& t : tr.transitions) {
        nlohmann::ordered_json j;
        j["from"] = stage_number(t.from);
        j["to"] = stage_number(t.to);
        j["t"] = t.t;
        arr.push_back(j);
    }
    return arr.dump(2);
}

void write_boundary_csv(std::ostream& os, const BoaBoundary& b)
{
    csv::Writer w(os);
    w.header({"phi_pll", "x_pll"});
    for (const PllState& p : b.polyline) {
        w.field(p.phi_pll).field(p.x_pll);
        w.end_row();
    }
}

void write_grid_csv(std::ostream& os, const std::vector<GridCell>& cells)
{
    csv::Writer w(os);
    w.header({"phi", "x", "inside"});
    for (const GridCell& c : cells) {
        const int v = c.verdict == Membership::Inside ? 1 : c.verdict == Membership::Outside ? 0 : -1;
        w.field(c.point.phi_pll).field(c.point.x_pll).field(v);
        w.end_row();
    }
}

Scenario reference_case(int k, const SystemParams& p)
{
    if (k < 1 || k > 3)
        throw ValidationError("reference case must be 1, 2 or 3");
    Scenario sc;
    sc.params = p;
    sc.Ug2 = 0.2;
    sc.t_f = 0.5;
    sc.i_rq2 = -0.93;
    const double i_rd2[] = {0.3, 0.4, 0.4};
    const double t_c[] = {1.1, 0.782, 0.783};
    sc.i_rd2 = i_rd2[k - 1];
    sc.t_c = t_c[k - 1];
    sc.name = "case-" + std::string(k == 1 ? "I" : k == 2 ? "II" : "III");
    return sc;
}

namespace {

constexpr double kPi = std::numbers::pi;

std::string markers_csv(const std::vector<std::pair<std::string, double>>& m)
{
    std::ostringstream o;
    csv::Writer w(o);
    w.header({"name", "value"});
    for (const auto& [k, v] : m) {
        w.field(k).field(v);
        w.end_row();
    }
    return o.str();
}

std::string boundary_text(const BoaBoundary& b)
{
    std::ostringstream o;
    write_boundary_csv(o, b);
    return o.str();
}

double phi_s1_of(const SystemParams& p)
{
    return std::asin(p.Pin * p.Xg / (p.Ug_nominal * p.Ut_ref));
}

} // namespace

std::vector<ExportFile> export_fig4(const Scenario& sc)
{
    const Trajectory tr = simulate(sc);
    std::ostringstream o;
    csv::Writer w(o);
    w.header({"t", "Ug", "U_t", "i_rd", "i_rq", "phi_pll", "omega_r", "stage"});
    for (const TrajectorySample& s : tr.samples) {
        const bool faulted = s.t >= sc.t_f && s.t < sc.t_c;
        w.field(s.t).field(faulted ? sc.Ug2 : sc.params.Ug_nominal).field(s.out.U_t);
        w.field(s.out.i_rd).field(s.out.i_rq).field(s.state.phi_pll).field(s.state.omega_r);
        w.field(stage_number(s.stage));
        w.end_row();
    }
    return {{"fig4_timeseries.csv", o.str()}, {"fig4_transitions.json", transitions_json(tr)}};
}

std::vector<ExportFile> export_fig5(const Scenario& sc)
{
    const SystemParams& p = sc.params;
    const LvrtCurrents lv = onset_lvrt_currents(sc);
    const GseParams g2 = gse_from_stage(p, sc.Ug2, lv.i_rd2, initial_state(p).omega_r);
    const double phi_s1 = phi_s1_of(p);
    const EacAreas a = areas_permanent_fault(g2, phi_s1);

    std::ostringstream curves;
    {
        csv::Writer w(curves);
        w.header({"phi", "Pe2", "Pm2"});
        constexpr int n = 721;
        for (int i = 0; i < n; ++i) {
            const double phi = -kPi / 2.0 + 2.0 * kPi * i / (n - 1);
            w.field(phi).field(g2.Pe_amp * std::sin(phi)).field(g2.Pm);
            w.end_row();
        }
    }

    Scenario run = sc;
    run.t_c = kPermanentFault;
    const Trajectory tr = simulate(run);
    std::ostringstream series;
    {
        csv::Writer w(series);
        w.header({"t", "Ug", "i_rd", "phi_pll"});
        for (const TrajectorySample& s : tr.samples) {
            w.field(s.t).field(s.t >= sc.t_f ? sc.Ug2 : p.Ug_nominal).field(s.out.i_rd).field(s.state.phi_pll);
            w.end_row();
        }
    }

    std::vector<std::pair<std::string, double>> m = {
        {"phi_s1", phi_s1},
        {"has_equilibrium", a.has_equilibrium ? 1.0 : 0.0},
        {"phi_s2", a.phi_s2},
        {"phi_u2", a.phi_end},
        {"S_plus", a.S_plus},
        {"S_minus", a.S_minus},
        {"stable", permanent_fault_stable(g2, phi_s1) ? 1.0 : 0.0},
    };
    return {{"fig5_curves.csv", curves.str()},
            {"fig5_markers.csv", markers_csv(m)},
            {"fig5_timeseries.csv", series.str()}};
}

std::vector<ExportFile> export_fig6(const SystemParams& p)
{
    const double omega = initial_state(p).omega_r;
    std::vector<ExportFile> out;
    std::ostringstream mk;
    csv::Writer w(mk);
    w.header({"name", "phi_pll", "x_pll"});
    for (double i_rd3 : {0.34, 0.70}) {
        const BoaBoundary b = boundary_manifold(p, p.Ug_nominal, i_rd3, omega);
        const std::string tag = "ird" + csv::number(i_rd3);
        out.push_back({"fig6_boundary_" + tag + ".csv", boundary_text(b)});
        w.field("uep_" + tag).field(b.phi_u).field(1.0);
        w.end_row();
        w.field("sep_" + tag).field(b.phi_s).field(1.0);
        w.end_row();
    }
    out.push_back({"fig6_markers.csv", mk.str()});
    return out;
}

std::vector<ExportFile> export_fig8(const SystemParams& p)
{
    std::vector<ExportFile> out;
    std::ostringstream mk;
    csv::Writer mw(mk);
    mw.header({"case", "name", "phi_pll", "x_pll"});
    for (int k = 1; k <= 3; ++k) {
        const Scenario sc = reference_case(k, p);
        const std::string tag = "case" + std::to_string(k);
        const GseParams g3 = stage3_frozen(sc);
        if (g3.equilibria().exists) {
            const BoaBoundary b = boundary_manifold(g3);
            out.push_back({"fig8_" + tag + "_boundary.csv", boundary_text(b)});
            mw.field(k).field("uep").field(b.phi_u).field(1.0);
            mw.end_row();
        }
        const Trajectory tr = simulate(sc);
        std::ostringstream o;
        csv::Writer w(o);
        w.header({"t", "phi_pll", "x_pll", "stage"});
        for (const TrajectorySample& s : tr.samples) {
            w.field(s.t).field(s.state.phi_pll).field(s.state.x_pll).field(stage_number(s.stage));
            w.end_row();
        }
        out.push_back({"fig8_" + tag + "_trajectory.csv", o.str()});
        if (tr.stage3_entry) {
            mw.field(k).field("stage3_entry").field(tr.stage3_entry->phi_pll).field(tr.stage3_entry->x_pll);
            mw.end_row();
        }
    }
    out.push_back({"fig8_markers.csv", mk.str()});
    return out;
}

std::vector<ExportFile> export_fig9(const Scenario& sc)
{
    const SystemParams& p = sc.params;
    const LvrtCurrents lv = onset_lvrt_currents(sc);
    const double omega = initial_state(p).omega_r;
    const GseParams g2 = gse_from_stage(p, sc.Ug2, lv.i_rd2, omega);
    const GseParams g3 = gse_from_stage(p, p.Ug_nominal, lv.i_rd2, omega);
    const ClearingAngle ca = critical_clearing_angle(p, sc.Ug2, p.Ug_nominal, lv.i_rd2, omega);

    std::ostringstream curves;
    csv::Writer w(curves);
    w.header({"phi", "Pe2", "Pe3", "Pm"});
    constexpr int n = 721;
    for (int i = 0; i < n; ++i) {
        const double phi = -kPi / 2.0 + 2.0 * kPi * i / (n - 1);
        w.field(phi).field(g2.Pe_amp * std::sin(phi)).field(g3.Pe_amp * std::sin(phi)).field(g2.Pm);
        w.end_row();
    }
    const std::vector<std::pair<std::string, double>> m = {
        {"phi_s1", ca.phi_s1},
        {"phi_cr", ca.kind == ClearingAngleKind::Angle ? ca.phi_cr : std::nan("")},
        {"phi_u3", ca.phi_u3},
    };
    return {{"fig9_curves.csv", curves.str()}, {"fig9_markers.csv", markers_csv(m)}};
}

Scenario default_figure_scenario(const std::string& id, const SystemParams& p)
{
    Scenario sc;
    sc.params = p;
    sc.Ug2 = 0.2;
    sc.t_f = 0.5;
    if (id == "fig4") {
        sc.name = "fig4";
        sc.i_rd2 = 0.34;
        sc.t_c = 0.7;
        sc.horizon = 10.0;
    } else if (id == "fig5") {
        sc.name = "fig5";
        sc.i_rd2 = 0.28;
        sc.i_rq2 = -0.93;
        sc.horizon = 3.0;
    } else if (id == "fig9") {
        sc.name = "fig9";
        sc.i_rd2 = 0.34;
        sc.i_rq2 = -0.93;
    } else if (id == "fig6" || id == "fig8") {
        sc.name = id;
    } else {
        throw ValidationError("unknown figure id '" + id + "' (expected fig4, fig5, fig6, fig8, fig9)");
    }
    return sc;
}

std::vector<ExportFile> export_figure_data(const std::string& id, const Scenario& sc)
{
    if (id == "fig4")
        return export_fig4(sc);
    if (id == "fig5")
        return export_fig5(sc);
    if (id == "fig6")
        return export_fig6(sc.params);
    if (id == "fig8")
        return export_fig8(sc.params);
    if (id == "fig9")
        return export_fig9(sc);
    throw ValidationError("unknown figure id '" + id + "' (expected fig4, fig5, fig6, fig8, fig9)");
}

std::string RunManifest::to_json() const
{
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["version"] = version;
    j["preset"] = preset;
    j["started"] = started;
    j["finished"] = finished;
    j["outputs"] = outputs;
    nlohmann::ordered_json rs = nlohmann::ordered_json::array();
    for (const auto& [id, status] : rows)
        rs.push_back({{"row", id}, {"status", status}});
    j["rows"] = rs;
    return j.dump(2) + "\n";
}

std::string utc_now_iso8601()
{
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<std::filesystem::path> write_files(const std::filesystem::path& dir,
                                               const std::vector<ExportFile>& files)
{
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> out;
    for (const ExportFile& f : files) {
        const auto path = dir / f.name;
        std::ofstream os(path, std::ios::binary);
        if (!os)
            throw Error("cannot write '" + path.string() + "'");
        os << f.content;
        out.push_back(path);
    }
    return out;
}

} // namespace tsslab
