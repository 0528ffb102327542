#include "tsslab/staged_sim.hpp"

#include "tsslab/errors.hpp"
#include "tsslab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace tsslab {

bool FullState::finite() const
{
    return std::isfinite(omega_r) && std::isfinite(w_rsc) && std::isfinite(z_tvc) &&
           std::isfinite(x_pll) && std::isfinite(phi_pll);
}

FullState operator+(const FullState& a, const FullState& b)
{
    return {a.omega_r + b.omega_r, a.w_rsc + b.w_rsc, a.z_tvc + b.z_tvc, a.x_pll + b.x_pll,
            a.phi_pll + b.phi_pll};
}

FullState operator*(double s, const FullState& a)
{
    return {s * a.omega_r, s * a.w_rsc, s * a.z_tvc, s * a.x_pll, s * a.phi_pll};
}

void Scenario::validate() const
{
    params.validate();
    auto fail = [this](const std::string& what) {
        throw ParameterError("scenario '" + name + "': " + what);
    };
    if (!std::isfinite(Ug2) || Ug2 < 0.0)
        fail("Ug2 must be finite and >= 0");
    if (!std::isfinite(t_f) || t_f < 0.0)
        fail("t_f must be finite and >= 0");
    if (!(t_c > t_f))
        fail("t_c must be later than t_f");
    if (!std::isfinite(i_rd2))
        fail("i_rd2 must be finite");
    if (i_rq2 && !std::isfinite(*i_rq2))
        fail("i_rq2 must be finite");
    if (!std::isfinite(horizon) || horizon <= 0.0)
        fail("horizon must be > 0");
    if (!std::isfinite(dt) || dt <= 0.0)
        fail("dt must be > 0");
    if (!std::isfinite(sample_interval) || sample_interval < dt)
        fail("sample_interval must be >= dt");
}

LvrtCurrents lvrt_currents(const Scenario& sc, double U_t_at_onset)
{
    const SystemParams& p = sc.params;
    if (!(U_t_at_onset >= 0.0 && U_t_at_onset <= 1.2))
        throw ParameterError("lvrt_currents: onset terminal voltage " + std::to_string(U_t_at_onset) +
                             " outside [0, 1.2]");
    LvrtCurrents lv;
    lv.i_rq2 = sc.i_rq2 ? *sc.i_rq2 : sep_stage1(p).i_rq - p.Ke * (p.lvrt_knee - U_t_at_onset);

    const double headroom = p.Imax * p.Imax - lv.i_rq2 * lv.i_rq2;
    if (headroom < 0.0) {
        if (!sc.allow_zero_active_current)
            throw CapacityExhausted("lvrt_currents: |i_rq2| = " + std::to_string(std::abs(lv.i_rq2)) +
                                    " exceeds Imax = " + std::to_string(p.Imax));
        lv.i_rd2 = 0.0;
        lv.active_current_limited = true;
        return lv;
    }
    const double cap = std::sqrt(headroom);
    lv.i_rd2 = std::clamp(sc.i_rd2, 0.0, cap);
    lv.active_current_limited = lv.i_rd2 != sc.i_rd2;
    return lv;
}

double grid_voltage(const StageContext& ctx, const Scenario& sc)
{
    return ctx.fault_active ? sc.Ug2 : sc.params.Ug_nominal;
}

double active_current(const FullState& s, double t, const StageContext& ctx, const Scenario& sc)
{
    switch (ctx.stage) {
    case StageId::DuringFault:
        return ctx.i_rd2;
    case StageId::EarlyPostFault: {
        const double dir = ctx.i_rd_target >= ctx.i_rd2 ? 1.0 : -1.0;
        return ctx.i_rd2 + dir * sc.params.Kramp * (t - ctx.t_clear);
    }
    case StageId::PreFault:
    case StageId::LatePostFault:
        break;
    }
    return s.w_rsc + sc.params.kpw * s.omega_r;
}

CoeffSet stage_coefficients(const FullState& s, const StageContext& ctx, const Scenario& sc)
{
    const bool lvrt = ctx.stage == StageId::DuringFault || ctx.stage == StageId::EarlyPostFault;
    if (lvrt && !sc.coefficients_follow_rotor)
        return correction_coefficients(sc.params, ctx.omega_r_onset);
    return correction_coefficients(sc.params, s.omega_r);
}

AlgebraicOutputs stage_algebraic(const FullState& s, double t, const StageContext& ctx,
                                 const Scenario& sc)
{
    const ReactiveCommand irq = ctx.stage == StageId::DuringFault ? ReactiveCommand::fixed(ctx.i_rq2)
                                                                  : ReactiveCommand::tvc(s.z_tvc);
    return solve_algebraic(sc.params, stage_coefficients(s, ctx, sc), grid_voltage(ctx, sc),
                           s.phi_pll, s.omega_r, active_current(s, t, ctx, sc), irq);
}

FullState derivatives(const FullState& s, double t, const StageContext& ctx, const Scenario& sc)
{
    const SystemParams& p = sc.params;
    const AlgebraicOutputs out = stage_algebraic(s, t, ctx, sc);
    const bool lvrt = ctx.stage == StageId::DuringFault || ctx.stage == StageId::EarlyPostFault;

    FullState d;
    d.omega_r = (p.Pin - out.P_t) / (2.0 * p.H * s.omega_r);
    if (lvrt && sc.freeze_rotor_during_fault)
        d.omega_r = 0.0;

    if (lvrt) {
        // RSC output held at its pre-fault value while LVRT owns i_rd.
        d.w_rsc = -p.kpw * d.omega_r;
    } else {
        d.w_rsc = p.kiw * (s.omega_r - p.omega_r_ref);
    }
    // TVC integrator frozen during the fault only.
    d.z_tvc = ctx.stage == StageId::DuringFault ? 0.0 : p.kiV * (out.U_t - p.Ut_ref);

    const double w0 = p.omega0();
    d.x_pll = p.kipll * out.u_tq / w0;
    d.phi_pll = p.kppll * out.u_tq + w0 * (s.x_pll - 1.0);
    return d;
}

namespace {

// True once the switching condition of the current stage holds.
bool switching_condition(const FullState& s, double t, const StageContext& ctx, const Scenario& sc)
{
    if (ctx.stage == StageId::PreFault && ctx.fault_active)
        return stage_algebraic(s, t, ctx, sc).U_t < sc.params.lvrt_threshold;
    if (ctx.stage == StageId::EarlyPostFault) {
        const double dir = ctx.i_rd_target >= ctx.i_rd2 ? 1.0 : -1.0;
        return dir * (active_current(s, t, ctx, sc) - ctx.i_rd_target) >= 0.0;
    }
    return false;
}

bool has_switching_condition(const StageContext& ctx)
{
    return (ctx.stage == StageId::PreFault && ctx.fault_active) ||
           ctx.stage == StageId::EarlyPostFault;
}

StageId next_stage(StageId s)
{
    return static_cast<StageId>(std::min(stage_number(s) + 1, 4));
}

} // namespace

StepResult step(const FullState& s, double t, double dt, const StageContext& ctx, const Scenario& sc)
{
    if (!(dt > 0.0))
        throw ParameterError("step: dt must be > 0");
    auto rhs = [&](double tt, const FullState& x) { return derivatives(x, tt, ctx, sc); };
    auto advance = [&](double h) {
        FullState n = num::rk4_step_t(s, t, h, rhs);
        if (!n.finite())
            throw IntegrationBlowup("step: non-finite state", t + h);
        return n;
    };

    const bool armed = has_switching_condition(ctx);
    if (armed && switching_condition(s, t, ctx, sc))
        return {s, t, StageEvent{ctx.stage, next_stage(ctx.stage), t}};

    FullState next = advance(dt);
    if (!armed || !switching_condition(next, t + dt, ctx, sc))
        return {next, t + dt, std::nullopt};

    double lo = 0.0;
    double hi = dt;
    while (hi - lo > kEventTolerance) {
        const double mid = 0.5 * (lo + hi);
        FullState m = advance(mid);
        if (switching_condition(m, t + mid, ctx, sc)) {
            hi = mid;
            next = m;
        } else {
            lo = mid;
        }
    }
    return {next, t + hi, StageEvent{ctx.stage, next_stage(ctx.stage), t + hi}};
}

FullState initial_state(const SystemParams& p)
{
    const EquilibriumPoint sep = sep_stage1(p);
    FullState s;
    s.omega_r = sep.omega_r;
    s.w_rsc = sep.i_rd - p.kpw * sep.omega_r;
    s.z_tvc = sep.i_rq - p.kpV * p.Ut_ref;
    s.x_pll = sep.x_pll;
    s.phi_pll = sep.phi_pll;
    return s;
}

double slip_threshold(const FullState& s, double t, const StageContext& ctx, const Scenario& sc)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double fallback = uep_stage1(sc.params).phi_pll + two_pi;
    if (ctx.stage == StageId::DuringFault || ctx.stage == StageId::EarlyPostFault) {
        const FrozenEquilibria eq = sep_uep_frozen(stage_coefficients(s, ctx, sc), grid_voltage(ctx, sc),
                                                   active_current(s, t, ctx, sc), sc.params.Xg);
        if (eq.exists)
            return eq.phi_u + two_pi;
    }
    return fallback;
}

const char* outcome_name(Outcome o)
{
    switch (o) {
    case Outcome::Stable:
        return "Stable";
    case Outcome::Unstable:
        return "Unstable";
    case Outcome::Indeterminate:
        break;
    }
    return "Indeterminate";
}

Trajectory simulate(const Scenario& sc)
{
    sc.validate();
    const SystemParams& p = sc.params;

    Trajectory tr;
    StageContext ctx;
    const EquilibriumPoint sep = sep_stage1(p);
    ctx.i_rd_target = sep.i_rd;

    FullState s = initial_state(p);
    double t = 0.0;

    const auto stride = std::max<long>(1, std::lround(sc.sample_interval / sc.dt));
    const auto n_steps = static_cast<long>(std::ceil(sc.horizon / sc.dt - 1e-9));

    auto record = [&] {
        TrajectorySample smp;
        smp.t = t;
        smp.state = s;
        smp.out = stage_algebraic(s, t, ctx, sc);
        smp.stage = ctx.stage;
        tr.samples.push_back(smp);
    };

    auto switch_to = [&](StageId to, StageContext next) {
        Transition tx;
        tx.from = ctx.stage;
        tx.to = to;
        tx.t = t;
        tx.before = s;
        tx.i_rd_before = active_current(s, t, ctx, sc);
        next.stage = to;
        ctx = next;
        tx.after = s;
        tx.i_rd_after = active_current(s, t, ctx, sc);
        tr.transitions.push_back(tx);
    };

    auto enter_stage2 = [&] {
        const AlgebraicOutputs out = stage_algebraic(s, t, ctx, sc);
        const LvrtCurrents lv = lvrt_currents(sc, out.U_t);
        StageContext next = ctx;
        next.i_rd2 = lv.i_rd2;
        next.i_rq2 = lv.i_rq2;
        next.omega_r_onset = s.omega_r;
        switch_to(StageId::DuringFault, next);
    };

    auto maybe_finish_ramp = [&] {
        if (ctx.stage == StageId::EarlyPostFault) {
            const double dir = ctx.i_rd_target >= ctx.i_rd2 ? 1.0 : -1.0;
            if (dir * (active_current(s, t, ctx, sc) - ctx.i_rd_target) >= 0.0)
                switch_to(StageId::LatePostFault, ctx);
        }
    };

    bool fault_applied = false;
    bool clear_applied = false;

    auto apply_scheduled = [&] {
        if (!fault_applied && t >= sc.t_f) {
            fault_applied = true;
            ctx.fault_active = true;
            if (ctx.stage == StageId::PreFault &&
                stage_algebraic(s, t, ctx, sc).U_t < p.lvrt_threshold)
                enter_stage2();
        }
        if (fault_applied && !clear_applied && t >= sc.t_c) {
            clear_applied = true;
            ctx.fault_active = false;
            if (ctx.stage == StageId::DuringFault) {
                StageContext next = ctx;
                next.t_clear = t;
                tr.stage3_entry = s;
                switch_to(StageId::EarlyPostFault, next);
                maybe_finish_ramp();
            }
        }
    };

    try {
        apply_scheduled();
        record();
        for (long n = 1; n <= n_steps; ++n) {
            const double t_grid = std::min(static_cast<double>(n) * sc.dt, sc.horizon);
            while (t < t_grid) {
                double t_stop = t_grid;
                if (!fault_applied)
                    t_stop = std::min(t_stop, sc.t_f);
                else if (!clear_applied)
                    t_stop = std::min(t_stop, sc.t_c);
                if (t_stop > t) {
                    const StepResult r = step(s, t, t_stop - t, ctx, sc);
                    s = r.state;
                    if (r.event) {
                        t = r.t;
                        if (r.event->to == StageId::DuringFault)
                            enter_stage2();
                        else
                            switch_to(r.event->to, ctx);
                    } else {
                        t = t_stop;
                    }
                }
                apply_scheduled();
            }
            if (ctx.stage == StageId::DuringFault)
                tr.max_phi_stage2 = std::max(tr.max_phi_stage2, s.phi_pll);
            if (s.phi_pll > slip_threshold(s, t, ctx, sc)) {
                tr.slipped = true;
                if (sc.stop_on_slip) {
                    record();
                    break;
                }
            }
            if (n % stride == 0 || n == n_steps)
                record();
        }
    } catch (const Error& e) {
        tr.blew_up = true;
        tr.failure = e.what();
    }

    tr.final_context = ctx;
    tr.final_state = s;
    tr.final_time = t;
    return tr;
}

Outcome classify_outcome(const Trajectory& traj, const Scenario& sc)
{
    constexpr double window = 0.5;
    constexpr double phi_tol = 0.05;
    constexpr double x_tol = 0.01;

    if (traj.blew_up || traj.slipped)
        return Outcome::Unstable;

    const StageContext& ctx = traj.final_context;
    if (ctx.stage == StageId::EarlyPostFault)
        return Outcome::Indeterminate;
    if (ctx.stage == StageId::DuringFault && !sc.permanent())
        return Outcome::Indeterminate;

    const double t_last = traj.transitions.empty() ? 0.0 : traj.transitions.back().t;
    if (traj.final_time - t_last < window)
        return Outcome::Indeterminate;

    double phi_ref = 0.0;
    if (ctx.stage == StageId::DuringFault) {
        const FrozenEquilibria eq = sep_uep_frozen(stage_coefficients(traj.final_state, ctx, sc),
                                                   sc.Ug2, ctx.i_rd2, sc.params.Xg);
        if (!eq.exists)
            return Outcome::Unstable;
        phi_ref = eq.phi_s;
    } else {
        const double Ug = grid_voltage(ctx, sc);
        const double ratio = sc.params.Pin * sc.params.Xg / (Ug * sc.params.Ut_ref);
        if (!(std::abs(ratio) <= 1.0))
            return Outcome::Unstable;
        phi_ref = std::asin(ratio);
    }

    for (auto it = traj.samples.rbegin(); it != traj.samples.rend(); ++it) {
        if (it->t < traj.final_time - window)
            break;
        if (std::abs(it->state.phi_pll - phi_ref) >= phi_tol ||
            std::abs(it->state.x_pll - 1.0) >= x_tol)
            return Outcome::Unstable;
    }
    return Outcome::Stable;
}

} // namespace tsslab
