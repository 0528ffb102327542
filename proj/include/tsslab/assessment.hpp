#pragma once

// CCT by full simulation, per-scenario reports combining the three
// methods, the two reference tables, and parameter sweeps.

#include "tsslab/boa.hpp"
#include "tsslab/eac.hpp"
#include "tsslab/staged_sim.hpp"

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace tsslab {

inline constexpr double kNotRun = std::numeric_limits<double>::quiet_NaN();

struct MethodSet {
    bool simulate = false;
    bool eac = false;
    bool boa = false;

    bool empty() const { return !simulate && !eac && !boa; }
    static MethodSet all() { return {true, true, true}; }
    bool operator==(const MethodSet&) const = default;
};

/// Parses "simulate", "eac", "boa". Throws ValidationError otherwise.
MethodSet parse_methods(const std::vector<std::string>& names);
std::vector<std::string> method_names(const MethodSet& m);

struct SimCct {
    double cct = std::numeric_limits<double>::infinity();
    double stable_at = 0.0;    // largest delay verified Stable
    double unstable_at = std::numeric_limits<double>::infinity(); // smallest verified non-Stable
};

struct CctSearch {
    double bracket = 1.5;  // s
    double tol = 1e-4;     // s
};

/// Bisection on the clearing delay t_c - t_f with simulate + classify.
/// 0 when even the shortest delay (one step) is not Stable, inf when the
/// end of the bracket is still Stable.
SimCct cct_sim(const Scenario& sc, const CctSearch& search = {});

struct CctReport {
    std::string scenario;
    double Ug2 = 0.0;
    double i_rq2 = 0.0;   // latched LVRT reactive current
    double i_rd2 = 0.0;   // latched LVRT active current
    double Kramp = 0.0;
    double t_c = kPermanentFault;

    double phi_cr = kNotRun;
    std::string phi_cr_kind;  // clearing_angle_kind_name, empty if not run
    double cct_sim = kNotRun;
    double cct_boa = kNotRun;
    double cct_eac = kNotRun;
    std::optional<double> sim_bracket_lo, sim_bracket_hi;

    // Trajectory verdict at the configured t_c (simulate only).
    std::optional<Outcome> outcome;
    // Permanent faults: first-swing EAC verdict of stage 2.
    std::optional<bool> permanent_fault_stable;
    bool stage2_loss_of_equilibrium = false;
    bool stage3_loss_of_equilibrium = false;

    std::string status = "ok";  // "ok" or "error: ..."

    double err_boa_pct() const;
    double err_eac_pct() const;
};

/// Runs the requested methods. Method failures are caught and recorded in
/// status; parameter errors of the scenario itself propagate.
CctReport assess(const Scenario& sc, const MethodSet& methods);

void write_report_csv_header(std::ostream& os);
void write_report_csv_row(std::ostream& os, const CctReport& r);
std::string report_json(const CctReport& r);

// Reference tables ------------------------------------------------------

struct TableRow {
    Scenario scenario;
    CctReport report;
};

/// Scenario list for table 1 (six Ug2/i_rq2/i_rd2 rows) or table 2
/// (Kramp sweep at Ug2 = 0.2, i_rq2 = -0.93, i_rd2 = 0.34).
std::vector<Scenario> table_scenarios(int table, const SystemParams& p);

/// Rows run on `jobs` threads (<= 0: all available); output order follows
/// table_scenarios. Row failures land in the row status.
std::vector<TableRow> reproduce_table(int table, const SystemParams& p, int jobs,
                                      const MethodSet& methods = MethodSet::all());

/// Columns: Ug2,i_rq2,i_rd2,Kramp,cct_sim,cct_boa,cct_eac,err_boa_pct,err_eac_pct
void write_table_csv(std::ostream& os, const std::vector<TableRow>& rows);

// Sweeps ----------------------------------------------------------------

struct SweepAxis {
    std::string name;   // Ug2, i_rd2, i_rq2, Ke, Kramp, t_c
    std::vector<double> values;
    bool operator==(const SweepAxis&) const = default;
};

bool is_sweep_axis(const std::string& name);

struct SweepSpec {
    Scenario base;
    std::vector<SweepAxis> axes;
    MethodSet methods = MethodSet::all();

    /// Throws ValidationError for unknown axes, empty value lists or no methods.
    void validate() const;
    /// Cartesian product, first axis varying slowest.
    std::vector<Scenario> expand() const;
};

void apply_axis(Scenario& sc, const std::string& name, double value);

struct SweepRow {
    std::size_t index = 0;
    CctReport report;
};

std::vector<SweepRow> run_sweep(const SweepSpec& spec, int jobs);
std::vector<SweepRow> run_sweep_serial(const SweepSpec& spec);

/// Thread count for `jobs` (<= 0: all available).
int resolve_jobs(int jobs);

} // namespace tsslab
