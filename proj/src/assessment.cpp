#include "tsslab/assessment.hpp"

#include "tsslab/csv.hpp"
#include "tsslab/errors.hpp"

#include <json.hpp>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace tsslab {

MethodSet parse_methods(const std::vector<std::string>& names)
{
    MethodSet m;
    for (const auto& n : names) {
        if (n == "simulate")
            m.simulate = true;
        else if (n == "eac")
            m.eac = true;
        else if (n == "boa")
            m.boa = true;
        else
            throw ValidationError("unknown method '" + n + "' (expected simulate, eac, boa)");
    }
    return m;
}

std::vector<std::string> method_names(const MethodSet& m)
{
    std::vector<std::string> out;
    if (m.simulate)
        out.emplace_back("simulate");
    if (m.eac)
        out.emplace_back("eac");
    if (m.boa)
        out.emplace_back("boa");
    return out;
}

SimCct cct_sim(const Scenario& sc, const CctSearch& search)
{
    sc.validate();
    auto stable = [&](double delay) {
        Scenario s = sc;
        s.t_c = s.t_f + delay;
        return classify_outcome(simulate(s), s) == Outcome::Stable;
    };

    SimCct r;
    double lo = sc.dt;
    double hi = search.bracket;
    if (!stable(lo)) {
        r.cct = 0.0;
        r.unstable_at = lo;
        return r;
    }
    if (stable(hi)) {
        r.stable_at = hi;
        return r;
    }
    while (hi - lo > search.tol) {
        const double mid = 0.5 * (lo + hi);
        if (stable(mid))
            lo = mid;
        else
            hi = mid;
    }
    r.cct = lo;
    r.stable_at = lo;
    r.unstable_at = hi;
    return r;
}

namespace {

double pct_error(double x, double ref)
{
    if (!std::isfinite(x) || !std::isfinite(ref) || ref <= 0.0)
        return kNotRun;
    return (x - ref) / ref * 100.0;
}

void note_failure(CctReport& r, const std::string& method, const std::exception& e)
{
    const std::string msg = method + ": " + e.what();
    r.status = r.status == "ok" ? "error: " + msg : r.status + "; " + msg;
}

} // namespace

double CctReport::err_boa_pct() const { return pct_error(cct_boa, cct_sim); }
double CctReport::err_eac_pct() const { return pct_error(cct_eac, cct_sim); }

CctReport assess(const Scenario& sc, const MethodSet& methods)
{
    sc.validate();
    CctReport r;
    r.scenario = sc.name;
    r.Ug2 = sc.Ug2;
    r.Kramp = sc.params.Kramp;
    r.t_c = sc.t_c;
    r.i_rd2 = sc.i_rd2;
    r.i_rq2 = sc.i_rq2.value_or(kNotRun);

    try {
        const LvrtCurrents lv = onset_lvrt_currents(sc);
        r.i_rd2 = lv.i_rd2;
        r.i_rq2 = lv.i_rq2;
    } catch (const Error& e) {
        note_failure(r, "lvrt", e);
        return r;
    }

    if (methods.eac) {
        try {
            if (sc.permanent()) {
                const GseParams g2 = gse_from_stage(sc.params, sc.Ug2, r.i_rd2, initial_state(sc.params).omega_r);
                r.stage2_loss_of_equilibrium = !g2.equilibria().exists;
                r.permanent_fault_stable =
                    permanent_fault_stable(g2, std::asin(sc.params.Pin * sc.params.Xg /
                                                         (sc.params.Ug_nominal * sc.params.Ut_ref)));
            }
            const EacCct e = cct_eac(sc);
            r.phi_cr_kind = clearing_angle_kind_name(e.angle.kind);
            if (e.angle.kind == ClearingAngleKind::Angle)
                r.phi_cr = e.angle.phi_cr;
            r.stage3_loss_of_equilibrium = e.angle.kind == ClearingAngleKind::NoStage3Equilibrium;
            r.cct_eac = e.cct;
        } catch (const Error& e) {
            note_failure(r, "eac", e);
        }
    }

    if (methods.boa) {
        try {
            const BoaCct b = cct_boa(sc);
            r.stage3_loss_of_equilibrium = r.stage3_loss_of_equilibrium || b.no_stage3_equilibrium;
            r.cct_boa = b.cct;
        } catch (const Error& e) {
            note_failure(r, "boa", e);
        }
    }

    if (methods.simulate) {
        try {
            const SimCct s = cct_sim(sc);
            r.cct_sim = s.cct;
            r.sim_bracket_lo = s.stable_at;
            r.sim_bracket_hi = s.unstable_at;
            r.outcome = classify_outcome(simulate(sc), sc);
        } catch (const Error& e) {
            note_failure(r, "simulate", e);
        }
    }
    return r;
}

void write_report_csv_header(std::ostream& os)
{
    csv::Writer(os).header({"scenario", "Ug2", "i_rq2", "i_rd2", "Kramp", "t_c", "phi_cr",
                            "phi_cr_kind", "cct_sim", "cct_boa", "cct_eac", "err_boa_pct",
                            "err_eac_pct", "outcome", "permanent_fault_stable",
                            "stage2_loss_of_equilibrium", "stage3_loss_of_equilibrium", "status"});
}

namespace {

// Keeps free-text fields from breaking the column layout.
std::string csv_text(std::string s)
{
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

} // namespace

void write_report_csv_row(std::ostream& os, const CctReport& r)
{
    csv::Writer w(os);
    w.field(csv_text(r.scenario)).field(r.Ug2).field(r.i_rq2).field(r.i_rd2).field(r.Kramp);
    w.field(r.t_c).field(r.phi_cr).field(r.phi_cr_kind);
    w.field(r.cct_sim).field(r.cct_boa).field(r.cct_eac).field(r.err_boa_pct()).field(r.err_eac_pct());
    w.field(r.outcome ? outcome_name(*r.outcome) : "");
    w.field(r.permanent_fault_stable ? (*r.permanent_fault_stable ? "true" : "false") : "");
    w.field(r.stage2_loss_of_equilibrium ? "true" : "false");
    w.field(r.stage3_loss_of_equilibrium ? "true" : "false");
    w.field(csv_text(r.status));
    w.end_row();
}

namespace {

nlohmann::ordered_json json_number(double v)
{
    if (std::isnan(v))
        return nullptr;
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    return v;
}

} // namespace

std::string report_json(const CctReport& r)
{
    nlohmann::ordered_json j;
    j["scenario"] = r.scenario;
    j["Ug2"] = json_number(r.Ug2);
    j["i_rq2"] = json_number(r.i_rq2);
    j["i_rd2"] = json_number(r.i_rd2);
    j["Kramp"] = json_number(r.Kramp);
    j["t_c"] = json_number(r.t_c);
    j["phi_cr"] = json_number(r.phi_cr);
    j["phi_cr_kind"] = r.phi_cr_kind;
    j["cct_sim"] = json_number(r.cct_sim);
    j["cct_boa"] = json_number(r.cct_boa);
    j["cct_eac"] = json_number(r.cct_eac);
    j["err_boa_pct"] = json_number(r.err_boa_pct());
    j["err_eac_pct"] = json_number(r.err_eac_pct());
    j["sim_bracket"] = r.sim_bracket_lo
                           ? nlohmann::ordered_json::array({json_number(*r.sim_bracket_lo),
                                                            json_number(*r.sim_bracket_hi)})
                           : nlohmann::ordered_json(nullptr);
    j["outcome"] = r.outcome ? nlohmann::ordered_json(outcome_name(*r.outcome)) : nullptr;
    j["permanent_fault_stable"] =
        r.permanent_fault_stable ? nlohmann::ordered_json(*r.permanent_fault_stable) : nullptr;
    j["stage2_loss_of_equilibrium"] = r.stage2_loss_of_equilibrium;
    j["stage3_loss_of_equilibrium"] = r.stage3_loss_of_equilibrium;
    j["status"] = r.status;
    return j.dump(2);
}

// Reference tables ------------------------------------------------------

std::vector<Scenario> table_scenarios(int table, const SystemParams& p)
{
    struct Row {
        double Ug2, i_rq2, i_rd2;
    };
    std::vector<Scenario> out;
    if (table == 1) {
        const Row rows[] = {{0.1, -1.0, 0.3},  {0.1, -1.0, 0.4},  {0.2, -0.93, 0.34},
                            {0.2, -0.93, 0.5}, {0.3, -0.86, 0.5}, {0.3, -0.86, 0.6}};
        int k = 1;
        for (const Row& r : rows) {
            Scenario sc;
            sc.name = "table1-row" + std::to_string(k++);
            sc.params = p;
            sc.Ug2 = r.Ug2;
            sc.i_rq2 = r.i_rq2;
            sc.i_rd2 = r.i_rd2;
            out.push_back(sc);
        }
        return out;
    }
    if (table == 2) {
        // Both ends of every Kramp band of the reference table.
        const double kramps[] = {0.2, 1.2, 1.3, 2.9, 3.0, 4.5, 4.6, 6.1, 6.2, 7.8, 7.9, 9.6};
        for (double k : kramps) {
            Scenario sc;
            sc.name = "table2-Kramp" + csv::number(k);
            sc.params = p;
            sc.params.Kramp = k;
            sc.Ug2 = 0.2;
            sc.i_rq2 = -0.93;
            sc.i_rd2 = 0.34;
            out.push_back(sc);
        }
        return out;
    }
    throw ValidationError("unknown table " + std::to_string(table) + " (expected 1 or 2)");
}

int resolve_jobs(int jobs)
{
    return jobs > 0 ? jobs : std::max(1, omp_get_max_threads());
}

std::vector<TableRow> reproduce_table(int table, const SystemParams& p, int jobs,
                                      const MethodSet& methods)
{
    const std::vector<Scenario> scs = table_scenarios(table, p);
    std::vector<TableRow> rows(scs.size());
    const auto n = static_cast<long>(scs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_jobs(jobs))
    for (long i = 0; i < n; ++i) {
        TableRow& row = rows[static_cast<std::size_t>(i)];
        row.scenario = scs[static_cast<std::size_t>(i)];
        try {
            row.report = assess(row.scenario, methods);
        } catch (const std::exception& e) {
            row.report.scenario = row.scenario.name;
            row.report.status = std::string("error: ") + e.what();
        }
    }
    return rows;
}

void write_table_csv(std::ostream& os, const std::vector<TableRow>& rows)
{
    csv::Writer w(os);
    w.header({"Ug2", "i_rq2", "i_rd2", "Kramp", "cct_sim", "cct_boa", "cct_eac", "err_boa_pct",
              "err_eac_pct"});
    for (const TableRow& row : rows) {
        const CctReport& r = row.report;
        w.field(row.scenario.Ug2).field(r.i_rq2).field(r.i_rd2).field(row.scenario.params.Kramp);
        w.field(r.cct_sim).field(r.cct_boa).field(r.cct_eac);
        w.field(r.err_boa_pct()).field(r.err_eac_pct());
        w.end_row();
    }
}

// Sweeps ----------------------------------------------------------------

bool is_sweep_axis(const std::string& name)
{
    return name == "Ug2" || name == "i_rd2" || name == "i_rq2" || name == "Ke" ||
           name == "Kramp" || name == "t_c";
}

void apply_axis(Scenario& sc, const std::string& name, double value)
{
    if (name == "Ug2")
        sc.Ug2 = value;
    else if (name == "i_rd2")
        sc.i_rd2 = value;
    else if (name == "i_rq2")
        sc.i_rq2 = value;
    else if (name == "Ke")
        sc.params.Ke = value;
    else if (name == "Kramp")
        sc.params.Kramp = value;
    else if (name == "t_c")
        sc.t_c = value;
    else
        throw ValidationError("unknown sweep axis '" + name + "'");
}

void SweepSpec::validate() const
{
    if (methods.empty())
        throw ValidationError("sweep: no methods requested");
    for (const SweepAxis& a : axes) {
        if (!is_sweep_axis(a.name))
            throw ValidationError("sweep: unknown axis '" + a.name + "'");
        if (a.values.empty())
            throw ValidationError("sweep: axis '" + a.name + "' has no values");
    }
}

std::vector<Scenario> SweepSpec::expand() const
{
    validate();
    std::vector<Scenario> out{base};
    for (const SweepAxis& a : axes) {
        std::vector<Scenario> next;
        next.reserve(out.size() * a.values.size());
        for (const Scenario& s : out) {
            for (double v : a.values) {
                Scenario t = s;
                apply_axis(t, a.name, v);
                next.push_back(std::move(t));
            }
        }
        out = std::move(next);
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i].name = base.name + "#" + std::to_string(i);
    return out;
}

namespace {

SweepRow sweep_row(std::size_t i, const Scenario& sc, const MethodSet& m)
{
    SweepRow row;
    row.index = i;
    try {
        row.report = assess(sc, m);
    } catch (const std::exception& e) {
        row.report.scenario = sc.name;
        row.report.status = std::string("error: ") + e.what();
    }
    return row;
}

} // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec, int jobs)
{
    const std::vector<Scenario> scs = spec.expand();
    std::vector<SweepRow> rows(scs.size());
    const auto n = static_cast<long>(scs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_jobs(jobs))
    for (long i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        rows[k] = sweep_row(k, scs[k], spec.methods);
    }
    return rows;
}

std::vector<SweepRow> run_sweep_serial(const SweepSpec& spec)
{
    const std::vector<Scenario> scs = spec.expand();
    std::vector<SweepRow> rows;
    rows.reserve(scs.size());
    for (std::size_t i = 0; i < scs.size(); ++i)
        rows.push_back(sweep_row(i, scs[i], spec.methods));
    return rows;
}

} // namespace tsslab
