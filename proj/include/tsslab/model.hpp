#pragma once

// Reduced-order mechanism model: correction coefficients, the algebraic
// network/machine layer, and closed-form equilibria.

#include "tsslab/params.hpp"

#include <optional>

namespace tsslab {

/// Reactance ratios that map rotor currents onto the terminal voltage.
struct CoeffSet {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
};

/// a = Xs/(Xs+Xg), b = Xm/(Xs+Xg), c = Xs/(Xs+wr*Xg), d = wr*Xm/(Xs+wr*Xg).
CoeffSet correction_coefficients(const SystemParams& p, double omega_r);

struct TerminalVoltage {
    double u_td = 0.0;
    double u_tq = 0.0;
};

TerminalVoltage terminal_voltage_dq(const CoeffSet& k, double Ug, double phi_pll,
                                    double i_rd, double i_rq, double Xg);

/// Source of the q-axis rotor current.
///
/// Held: a fixed LVRT command. Otherwise the TVC output
/// i_rq = z_tvc + kpV * U_t, which couples i_rq to the unknown U_t.
struct ReactiveCommand {
    bool held = false;
    double value = 0.0;  // i_rq when held, z_tvc otherwise

    static ReactiveCommand fixed(double i_rq) { return {true, i_rq}; }
    static ReactiveCommand tvc(double z_tvc) { return {false, z_tvc}; }
};

struct AlgebraicOutputs {
    double u_td = 0.0, u_tq = 0.0, U_t = 0.0;
    double i_td = 0.0, i_tq = 0.0, P_t = 0.0;
    double i_rd = 0.0, i_rq = 0.0;  // rotor-current readouts used
    double residual = 0.0;          // |U_t - g(U_t)| of the scalar fixed point
    int iterations = 0;
};

/// Solves the terminal-voltage fixed point and the stator/output currents.
///
/// For a TVC-driven reactive current the scalar map
///   U = |(a Ug cos(phi) - b Xg (z + kpV U), u_tq)|
/// is iterated with damping 0.5 (max 100 iterations, tol 1e-10) and a
/// Newton fallback. Throws AlgebraicSolveError when neither converges.
AlgebraicOutputs solve_algebraic(const SystemParams& p, const CoeffSet& k, double Ug,
                                 double phi_pll, double omega_r, double i_rd,
                                 ReactiveCommand i_rq);

enum class EquilibriumKind { Stable, Unstable };

struct EquilibriumPoint {
    double omega_r = 0.0;
    double i_rd = 0.0;
    double i_rq = 0.0;
    double x_pll = 1.0;
    double phi_pll = 0.0;
    EquilibriumKind kind = EquilibriumKind::Stable;
    bool degenerate = false;  // grazing case, SEP and UEP coincide at pi/2
};

// Pre-fault operating point and its saddle. i_rq comes from u_td = Ut_ref,
// u_tq = 0 at the operating angle. Throw NoEquilibriumError when
// Pin*Xg/(Ug*Ut_ref) > 1.
EquilibriumPoint sep_stage1(const SystemParams& p);
EquilibriumPoint uep_stage1(const SystemParams& p);

/// Angles of the frozen PLL subsystem (fixed Ug and i_rd).
struct FrozenEquilibria {
    bool exists = false;     // false: loss of equilibrium
    bool degenerate = false; // ratio exactly 1
    double ratio = 0.0;      // d*Xg*i_rd / (c*Ug)
    double phi_s = 0.0;
    double phi_u = 0.0;
};

FrozenEquilibria sep_uep_frozen(const CoeffSet& k, double Ug, double i_rd, double Xg);

} // namespace tsslab
