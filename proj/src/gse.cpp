#include "tsslab/gse.hpp"

#include "tsslab/csv.hpp"
#include "tsslab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace tsslab {

GseState operator+(const GseState& a, const GseState& b)
{
    return {a.phi + b.phi, a.phi_dot + b.phi_dot};
}

GseState operator*(double s, const GseState& a) { return {s * a.phi, s * a.phi_dot}; }

PllState operator+(const PllState& a, const PllState& b)
{
    return {a.x_pll + b.x_pll, a.phi_pll + b.phi_pll};
}

PllState operator*(double s, const PllState& a) { return {s * a.x_pll, s * a.phi_pll}; }

double GseParams::u_tq(double phi) const { return Pm - Pe_amp * std::sin(phi); }

FrozenEquilibria GseParams::equilibria() const
{
    // Pm/Pe_amp is exactly d*Xg*i_rd/(c*Ug).
    const CoeffSet unit{1.0, 1.0, 1.0, 1.0};
    return sep_uep_frozen(unit, Pe_amp, Pm, 1.0);
}

GseParams gse_from_stage(const SystemParams& p, double Ug, double i_rd, double omega_r_frozen)
{
    const CoeffSet k = correction_coefficients(p, omega_r_frozen);
    GseParams g;
    g.Pm = k.d * p.Xg * i_rd;
    g.Pe_amp = k.c * Ug;
    g.Meq = 1.0 / p.kipll;
    g.Deq_coeff = k.c * (p.kppll / p.kipll) * Ug;
    g.kppll = p.kppll;
    g.omega0 = p.omega0();
    return g;
}

GseState to_gse(const PllState& s, const GseParams& g)
{
    return {s.phi_pll, g.kppll * g.u_tq(s.phi_pll) + g.omega0 * (s.x_pll - 1.0)};
}

PllState to_pll(const GseState& s, const GseParams& g)
{
    return {1.0 + (s.phi_dot - g.kppll * g.u_tq(s.phi)) / g.omega0, s.phi};
}

GseState gse_derivatives(const GseState& s, const GseParams& g)
{
    const double acc = (g.Pm - g.Pe_amp * std::sin(s.phi) -
                        g.Deq_coeff * std::cos(s.phi) * s.phi_dot) / g.Meq;
    return {s.phi_dot, acc};
}

PllState pll_derivatives(const PllState& s, const GseParams& g)
{
    const double u = g.u_tq(s.phi_pll);
    return {g.kipll() * u / g.omega0, g.kppll * u + g.omega0 * (s.x_pll - 1.0)};
}

std::array<std::array<double, 2>, 2> gse_jacobian(const GseState& s, const GseParams& g)
{
    const double sphi = std::sin(s.phi);
    const double cphi = std::cos(s.phi);
    return {{{0.0, 1.0},
             {(-g.Pe_amp * cphi + g.Deq_coeff * sphi * s.phi_dot) / g.Meq,
              -g.Deq_coeff * cphi / g.Meq}}};
}

double gse_energy(const GseState& s, const GseParams& g)
{
    return 0.5 * g.Meq * s.phi_dot * s.phi_dot - g.Pm * s.phi - g.Pe_amp * std::cos(s.phi);
}

double gse_vs_dae_residual(const Scenario& sc, double duration)
{
    const FullState s0 = initial_state(sc.params);
    return gse_vs_dae_residual(sc, duration, {s0.x_pll, s0.phi_pll});
}

double gse_vs_dae_residual(const Scenario& base, double duration, const PllState& start)
{
    Scenario sc = base;
    sc.coefficients_follow_rotor = false;
    const SystemParams& p = sc.params;

    // Stage-2 context as the simulator latches it at fault onset.
    FullState s = initial_state(p);
    StageContext ctx;
    ctx.fault_active = true;
    const double U_onset = stage_algebraic(s, sc.t_f, ctx, sc).U_t;
    const LvrtCurrents lv = lvrt_currents(sc, U_onset);
    ctx.stage = StageId::DuringFault;
    ctx.i_rd2 = lv.i_rd2;
    ctx.i_rq2 = lv.i_rq2;
    ctx.omega_r_onset = s.omega_r;
    s.x_pll = start.x_pll;
    s.phi_pll = start.phi_pll;

    const GseParams g = gse_from_stage(p, sc.Ug2, lv.i_rd2, ctx.omega_r_onset);
    GseState q = to_gse(start, g);

    const auto n = static_cast<long>(std::ceil(duration / sc.dt - 1e-9));
    double t = 0.0;
    double worst = 0.0;
    for (long i = 0; i < n; ++i) {
        s = num::rk4_step_t(s, t, sc.dt,
                            [&](double tt, const FullState& x) { return derivatives(x, tt, ctx, sc); });
        q = num::rk4_step(q, sc.dt, [&](const GseState& x) { return gse_derivatives(x, g); });
        t += sc.dt;
        worst = std::max(worst, std::abs(s.phi_pll - q.phi));
    }
    return worst;
}

void write_phase_portrait(std::ostream& os, const GseParams& g, double phi_min, double phi_max,
                          int n_phi, double phid_min, double phid_max, int n_phid)
{
    csv::Writer w(os);
    w.header({"phi", "phi_dot", "phi_ddot"});
    for (int i = 0; i < n_phi; ++i) {
        const double phi = n_phi > 1 ? phi_min + (phi_max - phi_min) * i / (n_phi - 1) : phi_min;
        for (int j = 0; j < n_phid; ++j) {
            const double pd =
                n_phid > 1 ? phid_min + (phid_max - phid_min) * j / (n_phid - 1) : phid_min;
            const GseState d = gse_derivatives({phi, pd}, g);
            w.field(phi).field(pd).field(d.phi_dot);
            w.end_row();
        }
    }
}

} // namespace tsslab
