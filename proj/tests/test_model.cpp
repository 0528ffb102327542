#include "catch_amalgamated.hpp"

#include "tsslab/errors.hpp"
#include "tsslab/model.hpp"
#include "tsslab/params.hpp"

#include <cmath>
#include <numbers>

using namespace tsslab;
using Catch::Approx;

// Reference numbers below come from tests/oracles/derive_values.py.

TEST_CASE("correction coefficients at the rated rotor speed", "[model]")
{
    const SystemParams p;
    const CoeffSet k = correction_coefficients(p, 1.2);
    CHECK(k.a == Approx(0.8906147451323562).margin(1e-15));
    CHECK(k.b == Approx(0.853204987967622).margin(1e-15));
    CHECK(k.c == Approx(0.8715478484264612).margin(1e-15));
    CHECK(k.d == Approx(1.001926782273603).margin(1e-15));

    // At synchronous speed c, d collapse onto a, b.
    const CoeffSet k1 = correction_coefficients(p, 1.0);
    CHECK(k1.c == Approx(k1.a).margin(1e-15));
    CHECK(k1.d == Approx(k1.b).margin(1e-15));
}

TEST_CASE("coefficients follow their closed forms over the rotor-speed range", "[model]")
{
    const SystemParams p;
    for (double w = 0.7; w <= 1.3 + 1e-12; w += 0.01) {
        const CoeffSet k = correction_coefficients(p, w);
        CHECK(k.a == p.Xs / (p.Xs + p.Xg));
        CHECK(k.b == p.Xm / (p.Xs + p.Xg));
        CHECK(k.c == Approx(p.Xs / (p.Xs + w * p.Xg)).epsilon(1e-15));
        CHECK(k.d == Approx(w * p.Xm / (p.Xs + w * p.Xg)).epsilon(1e-15));
    }
}

TEST_CASE("terminal voltage of simple inputs", "[model]")
{
    const SystemParams p;
    const CoeffSet k = correction_coefficients(p, 1.2);
    const TerminalVoltage zero = terminal_voltage_dq(k, 0.0, 0.7, 0.0, 0.0, p.Xg);
    CHECK(zero.u_td == 0.0);
    CHECK(zero.u_tq == 0.0);
    const TerminalVoltage aug = terminal_voltage_dq(k, 1.0, 0.0, 0.0, 0.0, p.Xg);
    CHECK(aug.u_td == Approx(0.8906147451323562).margin(1e-15));
    CHECK(aug.u_tq == Approx(0.0).margin(1e-15));
}

TEST_CASE("stage-1 equilibria", "[model]")
{
    const SystemParams p;
    const EquilibriumPoint s = sep_stage1(p);
    CHECK(s.omega_r == 1.2);
    CHECK(s.i_rd == Approx(0.695897435897436).margin(1e-13));
    CHECK(s.i_rq == Approx(-0.43070095854715656).margin(1e-13));
    CHECK(s.x_pll == 1.0);
    CHECK(s.phi_pll == Approx(0.41151684606748806).margin(1e-13));
    CHECK(s.kind == EquilibriumKind::Stable);

    const EquilibriumPoint u = uep_stage1(p);
    CHECK(u.i_rd == Approx(0.695897435897436).margin(1e-13));
    CHECK(u.i_rq == Approx(-4.257504169657971).margin(1e-12));
    CHECK(u.phi_pll == Approx(2.7300758075223053).margin(1e-13));
    CHECK(u.kind == EquilibriumKind::Unstable);
    CHECK(s.phi_pll + u.phi_pll == Approx(std::numbers::pi).margin(1e-15));
}

TEST_CASE("stage-1 SEP is consistent with the algebraic layer", "[model]")
{
    const SystemParams p;
    const EquilibriumPoint s = sep_stage1(p);
    const CoeffSet k = correction_coefficients(p, s.omega_r);
    const double z = s.i_rq - p.kpV * p.Ut_ref;
    const AlgebraicOutputs o =
        solve_algebraic(p, k, p.Ug_nominal, s.phi_pll, s.omega_r, s.i_rd, ReactiveCommand::tvc(z));
    CHECK(o.U_t == Approx(1.0).margin(1e-8));
    CHECK(o.u_td == Approx(1.0).margin(1e-8));
    CHECK(o.u_tq == Approx(0.0).margin(1e-8));
    CHECK(o.P_t == Approx(0.8).margin(1e-6));
    CHECK(o.residual < 1e-10);

    // The SEP angle two ways: from Pin and from the GSE balance.
    const double via_gse = std::asin(k.d * p.Xg * s.i_rd / (k.c * p.Ug_nominal));
    CHECK(via_gse == Approx(s.phi_pll).margin(1e-6));
}

TEST_CASE("algebraic solve with everything at zero", "[model]")
{
    const SystemParams p;
    const CoeffSet k = correction_coefficients(p, 1.2);
    const AlgebraicOutputs o = solve_algebraic(p, k, 0.0, 0.4, 1.2, 0.0, ReactiveCommand::fixed(0.0));
    CHECK(o.U_t == Approx(0.0).margin(1e-12));
}

TEST_CASE("algebraic solve off equilibrium is self-consistent", "[model]")
{
    const SystemParams p;
    const CoeffSet k = correction_coefficients(p, 1.1);
    for (double phi : {-1.0, 0.2, 0.9, 2.0, 3.0}) {
        for (double z : {-2.0, -1.4, -0.5}) {
            const AlgebraicOutputs o = solve_algebraic(p, k, 0.6, phi, 1.1, 0.5, ReactiveCommand::tvc(z));
            CHECK(o.i_rq == Approx(z + p.kpV * o.U_t).margin(1e-12));
            const TerminalVoltage v = terminal_voltage_dq(k, 0.6, phi, 0.5, o.i_rq, p.Xg);
            CHECK(std::hypot(v.u_td, v.u_tq) == Approx(o.U_t).margin(1e-10));
        }
    }
}

TEST_CASE("frozen-stage equilibria", "[model]")
{
    const SystemParams p;
    const CoeffSet k = correction_coefficients(p, 1.2);

    const FrozenEquilibria a = sep_uep_frozen(k, 0.2, 0.28, p.Xg);
    REQUIRE(a.exists);
    CHECK(a.phi_s == Approx(0.9351974062873908).margin(1e-13));
    CHECK(a.phi_u == Approx(2.206395247302402).margin(1e-13));
    CHECK(a.phi_s + a.phi_u == Approx(std::numbers::pi).margin(1e-15));
    for (double phi : {a.phi_s, a.phi_u})
        CHECK(terminal_voltage_dq(k, 0.2, phi, 0.28, -0.9, p.Xg).u_tq == Approx(0.0).margin(1e-10));

    const FrozenEquilibria b = sep_uep_frozen(k, 1.0, 0.34, p.Xg);
    REQUIRE(b.exists);
    CHECK(b.phi_u == Approx(2.9448956485353532).margin(1e-13));

    const FrozenEquilibria c = sep_uep_frozen(k, 0.1, 0.5, p.Xg);
    CHECK_FALSE(c.exists);
    CHECK(c.ratio == Approx(2.873986735445836).margin(1e-12));
}

TEST_CASE("equilibrium edge cases", "[model]")
{
    SystemParams p;
    p.Pin = 0.0;
    const EquilibriumPoint s = sep_stage1(p);
    CHECK(s.phi_pll == 0.0);
    CHECK(s.i_rd == 0.0);

    p.Pin = 2.0 / p.Xg * 1.01;  // Pin*Xg/(Ug*Ut_ref) > 1
    CHECK_THROWS_AS(sep_stage1(p), NoEquilibriumError);

    p.Pin = 2.0;  // exactly 1
    const EquilibriumPoint g = sep_stage1(p);
    CHECK(g.degenerate);
    CHECK(g.phi_pll == Approx(std::numbers::pi / 2).margin(1e-12));
}

TEST_CASE("parameter validation", "[model]")
{
    SystemParams p;
    CHECK_NOTHROW(p.validate());
    p.Xg = -0.1;
    CHECK_THROWS_AS(p.validate(), ParameterError);
    p = SystemParams{};
    p.kipll = 0.0;
    CHECK_THROWS_AS(p.validate(), ParameterError);
}
