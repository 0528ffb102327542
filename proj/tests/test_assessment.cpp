#include "catch_amalgamated.hpp"

#include "tsslab/assessment.hpp"
#include "tsslab/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace tsslab;
using Catch::Approx;

namespace {

Scenario row(double ug2, double irq2, double ird2)
{
    Scenario sc;
    sc.Ug2 = ug2;
    sc.i_rq2 = irq2;
    sc.i_rd2 = ird2;
    sc.t_f = 0.5;
    return sc;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

} // namespace

TEST_CASE("method names", "[assess]")
{
    const MethodSet m = parse_methods({"boa", "eac"});
    CHECK(m.boa);
    CHECK(m.eac);
    CHECK_FALSE(m.simulate);
    CHECK(method_names(MethodSet::all()) == std::vector<std::string>{"simulate", "eac", "boa"});
    CHECK_THROWS_AS(parse_methods({"lyapunov"}), ValidationError);
    CHECK(parse_methods({}).empty());
}

TEST_CASE("simulation CCT of the reference row", "[assess][sim]")
{
    const Scenario sc = row(0.2, -0.93, 0.34);
    const SimCct c = cct_sim(sc);
    CHECK(c.unstable_at - c.stable_at <= 1e-4);
    CHECK(c.cct == c.stable_at);
    CHECK(std::abs(c.cct - 0.282) <= 0.15 * 0.282);

    // Consistency with the basin: stable 5 ms before, unstable 15 ms after.
    const double boa = cct_boa(sc).cct;
    Scenario before = sc, after = sc;
    before.t_c = sc.t_f + boa - 0.005;
    after.t_c = sc.t_f + boa + 0.015;
    CHECK(classify_outcome(simulate(before), before) == Outcome::Stable);
    CHECK(classify_outcome(simulate(after), after) == Outcome::Unstable);
}

TEST_CASE("report combines the methods", "[assess]")
{
    Scenario sc = row(0.2, -0.93, 0.34);
    const CctReport r = assess(sc, parse_methods({"eac", "boa"}));
    CHECK(r.status == "ok");
    CHECK(std::isnan(r.cct_sim));
    CHECK(r.cct_eac == Approx(0.2695700019736279).margin(1e-8));
    CHECK(r.cct_eac <= r.cct_boa);
    CHECK(r.phi_cr_kind == "angle");
    CHECK(std::isnan(r.err_boa_pct()));
    CHECK(r.i_rq2 == -0.93);
    CHECK(r.i_rd2 == 0.34);

    // Permanent fault with loss of equilibrium is a result, not an error.
    Scenario lost = row(0.1, -1.0, 0.5);
    const CctReport l = assess(lost, parse_methods({"eac"}));
    CHECK(l.status == "ok");
    CHECK(l.stage2_loss_of_equilibrium);
    REQUIRE(l.permanent_fault_stable);
    CHECK_FALSE(*l.permanent_fault_stable);

    std::ostringstream os;
    write_report_csv_header(os);
    write_report_csv_row(os, r);
    CHECK(first_line(os.str()).rfind("scenario,", 0) == 0);
    const auto js = nlohmann::json::parse(report_json(r));
    CHECK(js.at("cct_sim").is_null());
    CHECK(js.at("cct_eac").get<double>() == r.cct_eac);
}

TEST_CASE("EAC stays below BOA on every reference row", "[assess]")
{
    const std::vector<Scenario> rows = table_scenarios(1, SystemParams{});
    REQUIRE(rows.size() == 6);
    for (const Scenario& sc : rows)
        CHECK(cct_eac(sc).cct <= cct_boa(sc).cct);
}

TEST_CASE("table scenarios", "[assess]")
{
    const auto t2 = table_scenarios(2, SystemParams{});
    REQUIRE(t2.size() == 12);
    CHECK(t2.front().params.Kramp == 0.2);
    CHECK(t2.back().params.Kramp == 9.6);
    for (const Scenario& sc : t2) {
        CHECK(sc.Ug2 == 0.2);
        CHECK(sc.i_rd2 == 0.34);
        REQUIRE(sc.i_rq2);
        CHECK(*sc.i_rq2 == -0.93);
    }
    CHECK_THROWS_AS(table_scenarios(3, SystemParams{}), ValidationError);
}

TEST_CASE("table CSV layout", "[assess]")
{
    const auto rows = reproduce_table(1, SystemParams{}, 0, parse_methods({"eac"}));
    std::ostringstream os;
    write_table_csv(os, rows);
    const std::string csv = os.str();
    CHECK(first_line(csv) == "Ug2,i_rq2,i_rd2,Kramp,cct_sim,cct_boa,cct_eac,err_boa_pct,err_eac_pct");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    CHECK(csv.find("\r") == std::string::npos);
    const std::string second = csv.substr(csv.find('\n') + 1);
    CHECK(first_line(second).rfind("0.1,-1,0.3,0.8,", 0) == 0);
}

TEST_CASE("sweep specification", "[assess][sweep]")
{
    SweepSpec spec;
    spec.axes = {{"Ug2", {0.1, 0.2}}, {"i_rd2", {0.3, 0.4, 0.5}}};
    CHECK_NOTHROW(spec.validate());
    const auto sc = spec.expand();
    REQUIRE(sc.size() == 6);
    CHECK(sc[0].Ug2 == 0.1);
    CHECK(sc[0].i_rd2 == 0.3);
    CHECK(sc[1].i_rd2 == 0.4);
    CHECK(sc[3].Ug2 == 0.2);

    SweepSpec bad = spec;
    bad.axes.push_back({"Xg", {0.5}});
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = spec;
    bad.axes[0].values.clear();
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = spec;
    bad.methods = {};
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("parallel sweep equals the serial reference", "[assess][sweep][parallel]")
{
    SweepSpec spec;
    spec.base = row(0.2, -0.93, 0.34);
    spec.axes = {{"i_rd2", {0.3, 0.34, 0.4, 0.5}}};
    spec.methods = parse_methods({"eac", "boa"});
    const auto par = run_sweep(spec, 0);
    const auto ser = run_sweep_serial(spec);
    REQUIRE(par.size() == ser.size());
    for (std::size_t i = 0; i < par.size(); ++i) {
        CHECK(par[i].index == i);
        CHECK(par[i].report.cct_eac == ser[i].report.cct_eac);
        CHECK(par[i].report.cct_boa == ser[i].report.cct_boa);
        CHECK(par[i].report.status == ser[i].report.status);
    }

    SweepSpec sim;
    sim.base = row(0.2, -0.93, 0.34);
    sim.base.horizon = 20.0;
    sim.axes = {{"t_c", {0.7, 0.9}}};
    sim.methods = parse_methods({"simulate"});
    sim.base.t_c = 0.7;
    const auto a = run_sweep(sim, 2);
    const auto b = run_sweep_serial(sim);
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].report.outcome);
        CHECK(a[i].report.outcome == b[i].report.outcome);
        CHECK(a[i].report.cct_sim == b[i].report.cct_sim);
    }
}

TEST_CASE("job count resolution", "[assess]")
{
    CHECK(resolve_jobs(3) == 3);
    CHECK(resolve_jobs(0) >= 1);
    CHECK(resolve_jobs(-1) >= 1);
}
