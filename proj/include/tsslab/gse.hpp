#pragma once

// Generalized swing equation of the PLL for a frozen stage (fixed grid
// voltage and active current):
//
//   Meq * phi'' = Pm - Pe_amp*sin(phi) - Deq_coeff*cos(phi)*phi'
//
// with Pm = d*Xg*i_rd, Pe_amp = c*Ug, Meq = 1/kipll and
// Deq_coeff = c*(kppll/kipll)*Ug.

#include "tsslab/model.hpp"
#include "tsslab/params.hpp"
#include "tsslab/staged_sim.hpp"

#include <array>
#include <iosfwd>

namespace tsslab {

struct GseParams {
    double Pm = 0.0;
    double Pe_amp = 0.0;
    double Meq = 0.0;
    double Deq_coeff = 0.0;
    // PLL constants needed to map (x_pll, phi_pll) <-> (phi, phi_dot).
    double kppll = 0.0;
    double omega0 = 0.0;

    double kipll() const { return 1.0 / Meq; }
    /// u_tq of the frozen stage at angle phi.
    double u_tq(double phi) const;
    FrozenEquilibria equilibria() const;
};

struct GseState {
    double phi = 0.0;
    double phi_dot = 0.0;
};

GseState operator+(const GseState& a, const GseState& b);
GseState operator*(double s, const GseState& a);

/// Driving-subsystem coordinates of the PLL.
struct PllState {
    double x_pll = 1.0;
    double phi_pll = 0.0;
};

PllState operator+(const PllState& a, const PllState& b);
PllState operator*(double s, const PllState& a);

GseParams gse_from_stage(const SystemParams& p, double Ug, double i_rd, double omega_r_frozen);

/// phi_dot = kppll*u_tq + omega0*(x_pll - 1).
GseState to_gse(const PllState& s, const GseParams& g);
PllState to_pll(const GseState& s, const GseParams& g);

GseState gse_derivatives(const GseState& s, const GseParams& g);
PllState pll_derivatives(const PllState& s, const GseParams& g);

/// Jacobian of gse_derivatives in (phi, phi_dot).
std::array<std::array<double, 2>, 2> gse_jacobian(const GseState& s, const GseParams& g);

/// E = Meq*phi_dot^2/2 - Pm*phi - Pe_amp*cos(phi); conserved when Deq_coeff = 0.
double gse_energy(const GseState& s, const GseParams& g);

/// Integrates the stage-2 DAE (through the full staged model, with i_rd and
/// i_rq held) and the GSE from the stage-2 entry state and returns the
/// maximum angle deviation over `duration`. The scenario's fault is taken
/// as permanent; the DAE starts at the stage-1 SEP.
double gse_vs_dae_residual(const Scenario& sc, double duration);

/// Same comparison from an arbitrary PLL starting point.
double gse_vs_dae_residual(const Scenario& sc, double duration, const PllState& start);

/// CSV grid (phi, phi_dot, phi_ddot) for phase portraits.
void write_phase_portrait(std::ostream& os, const GseParams& g, double phi_min, double phi_max,
                          int n_phi, double phid_min, double phid_max, int n_phid);

} // namespace tsslab
