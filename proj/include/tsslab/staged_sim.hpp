#pragma once

// Four-stage LVRT simulator: pre-fault, during-fault, early post-fault
// (active-current ramp) and late post-fault (normal control restored).

#include "tsslab/model.hpp"
#include "tsslab/params.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace tsslab {

enum class StageId : int { PreFault = 1, DuringFault = 2, EarlyPostFault = 3, LatePostFault = 4 };

inline int stage_number(StageId s) { return static_cast<int>(s); }

/// Integrated states. The PI controllers carry a proportional path on a
/// time derivative, so their states are shifted:
///   w_rsc = i_rd - kpw*omega_r,  z_tvc = i_rq - kpV*U_t
/// which leaves an explicit right-hand side.
struct FullState {
    double omega_r = 0.0;
    double w_rsc = 0.0;
    double z_tvc = 0.0;
    double x_pll = 1.0;
    double phi_pll = 0.0;

    bool finite() const;
    bool operator==(const FullState&) const = default;
};

FullState operator+(const FullState& a, const FullState& b);
FullState operator*(double s, const FullState& a);

inline constexpr double kPermanentFault = std::numeric_limits<double>::infinity();

struct Scenario {
    std::string name = "scenario";
    SystemParams params;
    double Ug2 = 0.2;                   // during-fault grid voltage
    double t_f = 0.5;                   // fault instant, s
    double t_c = kPermanentFault;       // clearing instant, s
    double i_rd2 = 0.34;                // requested LVRT active current
    std::optional<double> i_rq2;        // explicit LVRT reactive current; nullopt: from U_t at entry
    bool allow_zero_active_current = false;
    double horizon = 40.0;              // s (absolute)
    double dt = 50e-6;                  // s
    double sample_interval = 1e-3;      // s, trajectory sampling
    bool freeze_rotor_during_fault = false;
    bool coefficients_follow_rotor = false; // c, d track omega_r during stages 2-3
    bool stop_on_slip = true;

    bool permanent() const { return !(t_c < kPermanentFault); }
    void validate() const;
    bool operator==(const Scenario&) const = default;
};

/// Quantities latched as the stages switch.
struct StageContext {
    StageId stage = StageId::PreFault;
    bool fault_active = false;
    double i_rd2 = 0.0;           // capacity-limited LVRT active current
    double i_rq2 = 0.0;           // held LVRT reactive current
    double omega_r_onset = 0.0;   // rotor speed at stage-2 entry
    double t_clear = kPermanentFault;
    double i_rd_target = 0.0;     // pre-fault active current, end of the ramp
};

struct LvrtCurrents {
    double i_rd2 = 0.0;
    double i_rq2 = 0.0;
    bool active_current_limited = false;
};

/// LVRT current commands at stage-2 entry. Reactive injection grows in
/// magnitude with the voltage deficit: i_rq2 = i_rq1,s - Ke*(knee - U_t).
/// The active current is clipped to the capacity circle and floored at 0.
/// Throws CapacityExhausted when |i_rq2| > Imax unless the scenario allows
/// a zero active current.
LvrtCurrents lvrt_currents(const Scenario& sc, double U_t_at_onset);

/// Grid voltage seen in the given context.
double grid_voltage(const StageContext& ctx, const Scenario& sc);

/// Active current command of the current stage at time t.
double active_current(const FullState& s, double t, const StageContext& ctx, const Scenario& sc);

/// Coefficients used by the network equations in this stage.
CoeffSet stage_coefficients(const FullState& s, const StageContext& ctx, const Scenario& sc);

AlgebraicOutputs stage_algebraic(const FullState& s, double t, const StageContext& ctx,
                                 const Scenario& sc);

FullState derivatives(const FullState& s, double t, const StageContext& ctx, const Scenario& sc);

struct StageEvent {
    StageId from;
    StageId to;
    double t;
};

struct StepResult {
    FullState state;
    double t = 0.0;
    std::optional<StageEvent> event;  // state and t are at the event if set
};

inline constexpr double kEventTolerance = 1e-6;

/// One RK4 step of at most dt in the current stage. If the stage's
/// switching condition is crossed within (t, t+dt] the step is cut at the
/// crossing, localized by bisection to kEventTolerance; the returned time
/// lies on the far side of the crossing. Throws IntegrationBlowup on a
/// non-finite state.
StepResult step(const FullState& s, double t, double dt, const StageContext& ctx,
                const Scenario& sc);

struct TrajectorySample {
    double t = 0.0;
    FullState state;
    AlgebraicOutputs out;
    StageId stage = StageId::PreFault;
};

struct Transition {
    StageId from;
    StageId to;
    double t = 0.0;
    FullState before;
    FullState after;
    double i_rd_before = 0.0;
    double i_rd_after = 0.0;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::vector<Transition> transitions;
    StageContext final_context;
    FullState final_state;
    double final_time = 0.0;
    bool blew_up = false;
    bool slipped = false;         // angle passed a UEP + 2*pi
    std::string failure;
    double max_phi_stage2 = -std::numeric_limits<double>::infinity();
    std::optional<FullState> stage3_entry;  // state at fault clearing
};

/// Initial state: the pre-fault SEP in shifted coordinates.
FullState initial_state(const SystemParams& p);

Trajectory simulate(const Scenario& sc);

enum class Outcome { Stable, Unstable, Indeterminate };

const char* outcome_name(Outcome o);

/// Angle beyond which the run counts as a pole slip in the given context:
/// the frozen UEP of the stage plus 2*pi (stage-1 UEP when the stage has none).
double slip_threshold(const FullState& s, double t, const StageContext& ctx, const Scenario& sc);

/// Stable iff the last 0.5 s stay within 0.05 rad of the final-stage SEP
/// angle and |x_pll - 1| < 0.01. Unstable on blow-up, pole slip, or no
/// convergence. Indeterminate if the run ended mid-ramp or the settling
/// window after the last switch is shorter than 0.5 s.
Outcome classify_outcome(const Trajectory& traj, const Scenario& sc);

} // namespace tsslab
