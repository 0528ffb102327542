#include "tsslab/eac.hpp"

#include "tsslab/errors.hpp"
#include "tsslab/numerics.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace tsslab {

EacAreas areas_permanent_fault(const GseParams& g2, double phi_s1)
{
    EacAreas a;
    a.phi_start = phi_s1;
    const FrozenEquilibria eq = g2.equilibria();
    if (!eq.exists)
        return a;
    a.has_equilibrium = true;
    a.phi_s2 = eq.phi_s;
    a.phi_end = eq.phi_u;
    auto accel = [&](double phi) { return g2.Pm - g2.Pe_amp * std::sin(phi); };
    a.S_plus = num::adaptive_simpson(accel, phi_s1, eq.phi_s, kQuadratureTol);
    a.S_minus = -num::adaptive_simpson(accel, eq.phi_s, eq.phi_u, kQuadratureTol);
    return a;
}

bool permanent_fault_stable(const GseParams& g2, double phi_s1)
{
    const EacAreas a = areas_permanent_fault(g2, phi_s1);
    return a.has_equilibrium && phi_s1 < a.phi_end && a.S_plus <= a.S_minus;
}

const char* clearing_angle_kind_name(ClearingAngleKind k)
{
    switch (k) {
    case ClearingAngleKind::Angle:
        return "angle";
    case ClearingAngleKind::AlwaysStable:
        return "always-stable";
    case ClearingAngleKind::AlwaysUnstable:
        return "always-unstable";
    case ClearingAngleKind::NoStage3Equilibrium:
        break;
    }
    return "no-stage3-equilibrium";
}

ClearingAngle critical_clearing_angle(const SystemParams& p, double Ug2, double Ug3, double i_rd2,
                                      double omega_r_frozen)
{
    if (!(Ug3 > Ug2))
        throw DegenerateError("critical_clearing_angle: recovered voltage must exceed the fault voltage");

    ClearingAngle r;
    r.phi_s1 = std::asin(p.Pin * p.Xg / (p.Ug_nominal * p.Ut_ref));
    const CoeffSet k = correction_coefficients(p, omega_r_frozen);
    const FrozenEquilibria eq3 = sep_uep_frozen(k, Ug3, i_rd2, p.Xg);
    if (!eq3.exists) {
        r.kind = ClearingAngleKind::NoStage3Equilibrium;
        return r;
    }
    r.phi_u3 = eq3.phi_u;

    // Balance of the stage-2 accelerating area from phi_s1 and the stage-3
    // decelerating area up to phi_u3, solved for cos(phi_cr).
    const double Pm = k.d * p.Xg * i_rd2;
    r.argument = Pm * (r.phi_u3 - r.phi_s1) / (k.c * (Ug3 - Ug2)) +
                 (Ug3 * std::cos(r.phi_u3) - Ug2 * std::cos(r.phi_s1)) / (Ug3 - Ug2);
    if (r.argument < -1.0) {
        r.kind = ClearingAngleKind::AlwaysStable;
        r.phi_cr = std::numbers::pi;
        return r;
    }
    if (r.argument > 1.0) {
        r.kind = ClearingAngleKind::AlwaysUnstable;
        return r;
    }
    r.phi_cr = std::acos(r.argument);
    // Net stage-2 area up to phi_u3 is decelerating: no clearing angle below
    // the saddle is critical.
    if (r.phi_cr >= r.phi_u3) {
        r.kind = ClearingAngleKind::AlwaysStable;
        r.phi_cr = std::numbers::pi;
        return r;
    }
    if (r.phi_cr < r.phi_s1) {
        r.kind = ClearingAngleKind::AlwaysUnstable;
        return r;
    }
    r.kind = ClearingAngleKind::Angle;
    return r;
}

LvrtCurrents onset_lvrt_currents(const Scenario& sc)
{
    StageContext ctx;
    ctx.fault_active = true;
    const FullState s = initial_state(sc.params);
    const double U_t = stage_algebraic(s, sc.t_f, ctx, sc).U_t;
    if (!(U_t < sc.params.lvrt_threshold))
        throw ParameterError("fault leaves U_t = " + std::to_string(U_t) +
                             " above the LVRT threshold; no stage 2 to assess");
    return lvrt_currents(sc, U_t);
}

EacCct cct_eac(const Scenario& sc)
{
    sc.validate();
    const SystemParams& p = sc.params;
    const LvrtCurrents lv = onset_lvrt_currents(sc);

    EacCct res;
    res.angle = critical_clearing_angle(p, sc.Ug2, p.Ug_nominal, lv.i_rd2, p.omega_r_ref);
    switch (res.angle.kind) {
    case ClearingAngleKind::AlwaysStable:
        return res;
    case ClearingAngleKind::AlwaysUnstable:
    case ClearingAngleKind::NoStage3Equilibrium:
        res.cct = 0.0;
        return res;
    case ClearingAngleKind::Angle:
        break;
    }

    const GseParams g2 = gse_from_stage(p, sc.Ug2, lv.i_rd2, p.omega_r_ref);
    const FullState s0 = initial_state(p);
    PllState s{s0.x_pll, s0.phi_pll};
    const double phi_cr = res.angle.phi_cr;
    auto rhs = [&](const PllState& x) { return pll_derivatives(x, g2); };

    const auto n = static_cast<long>(std::ceil(kCctBracket / sc.dt - 1e-9));
    for (long i = 0; i < n; ++i) {
        const PllState next = num::rk4_step(s, sc.dt, rhs);
        if (next.phi_pll >= phi_cr) {
            const double frac = num::bisect_root(
                [&](double h) { return num::rk4_step(s, h, rhs).phi_pll - phi_cr; }, 0.0, sc.dt,
                1e-12);
            res.cct = static_cast<double>(i) * sc.dt + frac;
            return res;
        }
        s = next;
    }
    return res;
}

} // namespace tsslab
