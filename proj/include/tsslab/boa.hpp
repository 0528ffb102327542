#pragma once

// Basin of attraction of the frozen stage-3 PLL system in the
// (phi_pll, x_pll) plane. Forward simulation decides membership; the
// stable manifold of the UEP is kept for plots and cross-checks.

#include "tsslab/gse.hpp"
#include "tsslab/staged_sim.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

namespace tsslab {

/// Saddle data at (phi_u, phi_dot = 0) in GSE coordinates (phi, phi_dot).
struct SaddleEigen {
    double phi_u = 0.0;
    double lambda_stable = 0.0;   // < 0
    double lambda_unstable = 0.0; // > 0
    std::array<double, 2> v_stable{};   // unit length
    std::array<double, 2> v_unstable{}; // unit length
};

/// Throws NoEquilibriumError without a UEP and DegenerateError when an
/// eigenvalue is within 1e-9 (relative to the trace scale) of zero.
SaddleEigen uep_eigenstructure(const GseParams& g);

/// Eigenvalues of the GSE Jacobian at any state, as (re, im) pairs.
std::array<std::array<double, 2>, 2> gse_eigenvalues(const GseState& s, const GseParams& g);

struct StateWindow {
    double phi_min = -2.0 * std::numbers::pi - 1.0;
    double phi_max = 2.0 * std::numbers::pi + 1.0;
    double x_min = 0.8;
    double x_max = 1.2;

    bool contains(const PllState& s) const
    {
        return s.phi_pll >= phi_min && s.phi_pll <= phi_max && s.x_pll >= x_min && s.x_pll <= x_max;
    }
};

struct ManifoldOptions {
    double seed_offset = 1e-5;    // along the stable eigenvector, GSE coordinates
    double arc_length_budget = 20.0; // per branch, in the (phi, x) plane
    double dt = 1e-5;             // backward-time step, s
    long max_steps = 2'000'000;
    StateWindow window;
};

struct BoaBoundary {
    std::vector<PllState> polyline;  // branch 0 reversed, UEP, branch 1
    std::size_t uep_index = 0;
    std::array<bool, 2> truncated{};  // branch left the window
    std::array<bool, 2> exhausted{};  // branch hit the arc-length or step budget
    double Ug3 = 0.0;
    double i_rd3 = 0.0;
    double phi_s = 0.0;
    double phi_u = 0.0;
    GseParams g;
};

BoaBoundary boundary_manifold(const GseParams& g, const ManifoldOptions& opt = {});

/// Same, tagged with the frozen stage-3 inputs.
BoaBoundary boundary_manifold(const SystemParams& p, double Ug3, double i_rd3, double omega_r,
                              const ManifoldOptions& opt = {});

enum class Membership { Inside, Outside, Indeterminate };

const char* membership_name(Membership m);

enum class MembershipMethod { ForwardSim, ManifoldSide };

struct MembershipResult {
    Membership verdict = Membership::Indeterminate;
    MembershipMethod method = MembershipMethod::ForwardSim;
    double t_converge = std::numeric_limits<double>::quiet_NaN();  // s, Inside only
    double escape_angle = std::numeric_limits<double>::quiet_NaN(); // rad, Outside only
    bool boundary_band = false;  // Indeterminate: likely on the separatrix

    bool inside() const { return verdict == Membership::Inside; }
};

struct MembershipOptions {
    double dt = 50e-6;
    double horizon = 5.0;
    double radius = 0.05;    // rad around the SEP
    double x_radius = 0.01;  // around x_pll = 1
    double dwell = 0.1;      // s spent inside the radius before accepting
};

/// Forward-integrates the frozen system. Inside on settling at the SEP;
/// Outside once phi passes phi_u + 2*pi (or phi_u - 4*pi going down),
/// settles at a 2*pi-shifted SEP copy, or diverges. Outside at once when
/// the frozen system has no SEP.
MembershipResult is_in_boa(const PllState& point, const GseParams& g,
                           const MembershipOptions& opt = {});

/// Manifold-side test: the basin is the strip between the stable manifold
/// and its copy shifted by -2*pi. Counts crossings of the ray
/// {x = x0, phi > phi0} with each curve. Indeterminate outside the x-range
/// covered by both branches or when a branch was cut by a budget.
MembershipResult is_in_boa_manifold(const PllState& point, const BoaBoundary& b);

/// Distance in the (phi, x) plane to the boundary or its -2*pi copy.
double distance_to_boundary(const PllState& point, const BoaBoundary& b);

struct GridSpec {
    double phi_min = -4.0, phi_max = 4.0;
    int n_phi = 81;
    double x_min = 0.9, x_max = 1.1;
    int n_x = 41;

    PllState at(int i, int j) const;
};

struct GridCell {
    PllState point;
    Membership verdict = Membership::Indeterminate;
};

/// Row-major in phi then x. The parallel and serial kernels return
/// identical results.
std::vector<GridCell> membership_grid(const GseParams& g, const GridSpec& grid,
                                      const MembershipOptions& opt = {});
std::vector<GridCell> membership_grid_serial(const GseParams& g, const GridSpec& grid,
                                             const MembershipOptions& opt = {});

/// Uniform random points of the window drawn from one mt19937_64 stream
/// before any evaluation, so the verdicts do not depend on the thread count.
std::vector<PllState> sample_points(const StateWindow& w, std::size_t n, std::uint64_t seed);

std::vector<Membership> membership_batch(const std::vector<PllState>& pts, const GseParams& g,
                                         const MembershipOptions& opt = {});
std::vector<Membership> membership_batch_serial(const std::vector<PllState>& pts,
                                                const GseParams& g,
                                                const MembershipOptions& opt = {});

/// Frozen stage-3 system of a scenario: recovered voltage, i_rd3 = i_rd2,
/// coefficients at the onset rotor speed.
GseParams stage3_frozen(const Scenario& sc);

struct BoaCct {
    double cct = std::numeric_limits<double>::infinity();  // s after t_f
    PllState stage3_entry;   // PLL state at the critical clearing instant
    bool no_stage3_equilibrium = false;
};

inline constexpr double kBoaCctBracket = 1.5;  // s

/// Largest clearing delay whose stage-3 initial state lies inside the
/// frozen basin, resolved to one integration step (<= 1e-4 s). 0 when the
/// frozen stage-3 system has no SEP, inf when the stage-2 trajectory is
/// still inside at the end of the bracket.
BoaCct cct_boa(const Scenario& sc);

/// Stage-3 initial PLL state for clearing at sc.t_c (stage-2 GSE from the
/// pre-fault SEP).
PllState stage3_initial_state(const Scenario& sc);

} // namespace tsslab
