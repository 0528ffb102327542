#pragma once

// Equal-area assessment: permanent-fault first-swing test, the critical
// clearing angle of the whole LVRT sequence, and the EAC-based CCT.

#include "tsslab/gse.hpp"
#include "tsslab/staged_sim.hpp"

#include <limits>
#include <string>

namespace tsslab {

inline constexpr double kQuadratureTol = 1e-10;
inline constexpr double kAngleTol = 1e-10;

struct EacAreas {
    bool has_equilibrium = false;  // stage-2 SEP/UEP exist
    double S_plus = 0.0;           // integral of (Pm - Pe) from phi_start to phi_s2
    double S_minus = 0.0;          // integral of (Pe - Pm) from phi_s2 to phi_end
    double phi_start = 0.0;        // pre-fault angle
    double phi_s2 = 0.0;
    double phi_end = 0.0;          // stage-2 UEP
};

/// Damping is ignored. Without a stage-2 equilibrium only phi_start is set.
EacAreas areas_permanent_fault(const GseParams& g2, double phi_s1);

/// S+ <= S- with an existing stage-2 equilibrium and phi_s1 below the UEP.
bool permanent_fault_stable(const GseParams& g2, double phi_s1);

enum class ClearingAngleKind {
    Angle,          // phi_cr in (phi_s1, phi_u3)
    AlwaysStable,   // arccos argument < -1, or the angle reaches phi_u3
    AlwaysUnstable, // argument > 1, or the angle falls below phi_s1
    NoStage3Equilibrium,
};

struct ClearingAngle {
    ClearingAngleKind kind = ClearingAngleKind::Angle;
    double phi_cr = 0.0;
    double argument = 0.0;  // cos(phi_cr) before arccos
    double phi_s1 = 0.0;
    double phi_u3 = 0.0;
};

const char* clearing_angle_kind_name(ClearingAngleKind k);

/// Closed-form critical clearing angle with the recovered voltage Ug3 and
/// the stage-3 active current frozen at i_rd2. Throws DegenerateError when
/// Ug3 <= Ug2 (no recovery to trade area against).
ClearingAngle critical_clearing_angle(const SystemParams& p, double Ug2, double Ug3, double i_rd2,
                                      double omega_r_frozen);

/// LVRT currents the simulator would latch at fault onset from the
/// pre-fault SEP. Throws ParameterError when the fault does not pull U_t
/// below the LVRT threshold.
LvrtCurrents onset_lvrt_currents(const Scenario& sc);

struct EacCct {
    ClearingAngle angle;
    double cct = std::numeric_limits<double>::infinity();  // s after t_f; inf if never reached
};

inline constexpr double kCctBracket = 1.5;   // s
inline constexpr double kCctTolerance = 1e-4; // s

/// Integrates the damped stage-2 PLL from the pre-fault SEP and returns
/// the first time the angle reaches phi_cr. cct = 0 when the clearing angle
/// says always-unstable, inf when always-stable or not reached within the
/// bracket.
EacCct cct_eac(const Scenario& sc);

} // namespace tsslab
