#include "tsslab/model.hpp"

#include "tsslab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace tsslab {

namespace {

constexpr double kFixedPointTol = 1e-10;
constexpr int kFixedPointMaxIter = 100;
constexpr double kDamping = 0.5;

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

} // namespace

CoeffSet correction_coefficients(const SystemParams& p, double omega_r)
{
    if (!finite_positive(omega_r))
        throw ParameterError("correction_coefficients: omega_r must be finite and > 0, got " +
                             std::to_string(omega_r));
    const double den_ab = p.Xs + p.Xg;
    const double den_cd = p.Xs + omega_r * p.Xg;
    if (!finite_positive(den_ab) || !finite_positive(den_cd))
        throw ParameterError("correction_coefficients: non-positive denominator");
    return {p.Xs / den_ab, p.Xm / den_ab, p.Xs / den_cd, omega_r * p.Xm / den_cd};
}

TerminalVoltage terminal_voltage_dq(const CoeffSet& k, double Ug, double phi_pll,
                                    double i_rd, double i_rq, double Xg)
{
    return {k.a * Ug * std::cos(phi_pll) - k.b * Xg * i_rq,
            -k.c * Ug * std::sin(phi_pll) + k.d * Xg * i_rd};
}

AlgebraicOutputs solve_algebraic(const SystemParams& p, const CoeffSet& k, double Ug,
                                 double phi_pll, double omega_r, double i_rd,
                                 ReactiveCommand i_rq)
{
    AlgebraicOutputs out;
    out.i_rd = i_rd;
    out.u_tq = -k.c * Ug * std::sin(phi_pll) + k.d * p.Xg * i_rd;

    if (i_rq.held) {
        out.i_rq = i_rq.value;
        out.u_td = k.a * Ug * std::cos(phi_pll) - k.b * p.Xg * out.i_rq;
        out.U_t = std::hypot(out.u_td, out.u_tq);
    } else {
        // u_td = A - kv*U with A independent of U.
        const double A = k.a * Ug * std::cos(phi_pll) - k.b * p.Xg * i_rq.value;
        const double kv = k.b * p.Xg * p.kpV;
        const double q = out.u_tq;
        auto g = [&](double U) { return std::hypot(A - kv * U, q); };

        // Positive root of (1-kv^2) U^2 + 2 A kv U - (A^2 + q^2) = 0 as the
        // starting point; the iteration below certifies it.
        double U = 1.0;
        const double lead = 1.0 - kv * kv;
        if (lead > 1e-12)
            U = std::max(0.0, (-A * kv + std::sqrt(A * A + lead * q * q)) / lead);

        double residual = std::abs(g(U) - U);
        int it = 0;
        for (; it < kFixedPointMaxIter && residual > kFixedPointTol; ++it) {
            U = (1.0 - kDamping) * U + kDamping * g(U);
            residual = std::abs(g(U) - U);
        }
        if (!(residual <= kFixedPointTol)) {
            // Newton on F(U) = U - g(U).
            for (int n = 0; n < 50 && !(residual <= kFixedPointTol); ++n, ++it) {
                const double gu = g(U);
                const double dg = gu > 0.0 ? -kv * (A - kv * U) / gu : 0.0;
                const double step = (U - gu) / (1.0 - dg);
                if (!std::isfinite(step))
                    break;
                U -= step;
                residual = std::abs(g(U) - U);
            }
        }
        if (!(residual <= kFixedPointTol))
            throw AlgebraicSolveError("solve_algebraic: terminal-voltage fixed point did not converge",
                                      residual);
        out.U_t = U;
        out.i_rq = i_rq.value + p.kpV * U;
        out.u_td = A - kv * U;
        out.residual = residual;
        out.iterations = it;
    }

    out.i_td = omega_r * (p.Xm * i_rd - out.u_tq) / p.Xs;
    out.i_tq = (p.Xm * out.i_rq + out.u_td) / p.Xs;
    out.P_t = out.u_td * out.i_td + out.u_tq * out.i_tq;
    return out;
}

namespace {

EquilibriumPoint stage1_equilibrium(const SystemParams& p, EquilibriumKind kind)
{
    const double ratio = p.Pin * p.Xg / (p.Ug_nominal * p.Ut_ref);
    if (!std::isfinite(ratio) || std::abs(ratio) > 1.0)
        throw NoEquilibriumError("stage-1 equilibrium: Pin*Xg/(Ug*Ut_ref) = " +
                                 std::to_string(ratio) + " outside [-1, 1]");
    const double phi_s = std::asin(ratio);
    const CoeffSet k = correction_coefficients(p, p.omega_r_ref);

    EquilibriumPoint e;
    e.kind = kind;
    e.degenerate = (std::abs(ratio) == 1.0);
    e.omega_r = p.omega_r_ref;
    e.x_pll = 1.0;
    e.phi_pll = kind == EquilibriumKind::Stable ? phi_s : std::numbers::pi - phi_s;
    // Power balance with u_tq = 0 and u_td = Ut_ref.
    e.i_rd = p.Xs * p.Pin / (p.Xm * p.omega_r_ref * p.Ut_ref);
    e.i_rq = (k.a * p.Ug_nominal * std::cos(e.phi_pll) - p.Ut_ref) / (k.b * p.Xg);
    return e;
}

} // namespace

EquilibriumPoint sep_stage1(const SystemParams& p)
{
    return stage1_equilibrium(p, EquilibriumKind::Stable);
}

EquilibriumPoint uep_stage1(const SystemParams& p)
{
    return stage1_equilibrium(p, EquilibriumKind::Unstable);
}

FrozenEquilibria sep_uep_frozen(const CoeffSet& k, double Ug, double i_rd, double Xg)
{
    FrozenEquilibria eq;
    const double num = k.d * Xg * i_rd;
    const double den = k.c * Ug;
    eq.ratio = num / den;
    if (den == 0.0 || !std::isfinite(eq.ratio) || std::abs(eq.ratio) > 1.0)
        return eq;
    eq.exists = true;
    eq.degenerate = std::abs(eq.ratio) == 1.0;
    eq.phi_s = std::asin(eq.ratio);
    eq.phi_u = std::numbers::pi - eq.phi_s;
    return eq;
}

} // namespace tsslab
