#include "tsslab/boa.hpp"

#include "tsslab/eac.hpp"
#include "tsslab/errors.hpp"
#include "tsslab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace tsslab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::array<double, 2> unit_eigenvector(double lambda)
{
    // Jacobian rows are (0, 1) and (j10, j11), so (1, lambda) is an eigenvector.
    const double n = std::hypot(1.0, lambda);
    return {1.0 / n, lambda / n};
}

} // namespace

SaddleEigen uep_eigenstructure(const GseParams& g)
{
    const FrozenEquilibria eq = g.equilibria();
    if (!eq.exists)
        throw NoEquilibriumError("uep_eigenstructure: frozen system has no UEP");
    if (eq.degenerate)
        throw DegenerateError("uep_eigenstructure: SEP and UEP coincide");

    const auto J = gse_jacobian({eq.phi_u, 0.0}, g);
    const double tr = J[0][0] + J[1][1];
    const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    const double disc = tr * tr - 4.0 * det;
    const double scale = std::abs(tr) + std::sqrt(std::abs(det));
    if (!(det < 0.0) || !(disc > 0.0))
        throw DegenerateError("uep_eigenstructure: UEP is not a saddle");

    SaddleEigen e;
    e.phi_u = eq.phi_u;
    e.lambda_stable = 0.5 * (tr - std::sqrt(disc));
    e.lambda_unstable = 0.5 * (tr + std::sqrt(disc));
    if (std::min(std::abs(e.lambda_stable), std::abs(e.lambda_unstable)) < 1e-9 * scale)
        throw DegenerateError("uep_eigenstructure: eigenvalue near zero");
    e.v_stable = unit_eigenvector(e.lambda_stable);
    e.v_unstable = unit_eigenvector(e.lambda_unstable);
    return e;
}

std::array<std::array<double, 2>, 2> gse_eigenvalues(const GseState& s, const GseParams& g)
{
    const auto J = gse_jacobian(s, g);
    const double tr = J[0][0] + J[1][1];
    const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    const double disc = tr * tr - 4.0 * det;
    if (disc >= 0.0) {
        const double r = std::sqrt(disc);
        return {{{0.5 * (tr - r), 0.0}, {0.5 * (tr + r), 0.0}}};
    }
    const double im = 0.5 * std::sqrt(-disc);
    return {{{0.5 * tr, -im}, {0.5 * tr, im}}};
}

BoaBoundary boundary_manifold(const GseParams& g, const ManifoldOptions& opt)
{
    const SaddleEigen e = uep_eigenstructure(g);
    const FrozenEquilibria eq = g.equilibria();

    BoaBoundary b;
    b.g = g;
    b.phi_s = eq.phi_s;
    b.phi_u = eq.phi_u;

    const PllState uep = to_pll({e.phi_u, 0.0}, g);
    auto backward = [&](const PllState& s) {
        const PllState d = pll_derivatives(s, g);
        return PllState{-d.x_pll, -d.phi_pll};
    };
    // Decimation keeps the polyline light; 1e-3 is well below the band width.
    constexpr double min_spacing = 1e-3;

    std::array<std::vector<PllState>, 2> branches;
    for (int k = 0; k < 2; ++k) {
        const double sign = k == 0 ? -1.0 : 1.0;
        PllState s = to_pll({e.phi_u + sign * opt.seed_offset * e.v_stable[0],
                             sign * opt.seed_offset * e.v_stable[1]},
                            g);
        auto& br = branches[static_cast<std::size_t>(k)];
        br.push_back(s);
        double arc = 0.0;
        PllState last = s;
        long n = 0;
        for (;; ++n) {
            if (n >= opt.max_steps || arc >= opt.arc_length_budget) {
                b.exhausted[static_cast<std::size_t>(k)] = true;
                break;
            }
            const PllState next = num::rk4_step(s, opt.dt, backward);
            arc += std::hypot(next.phi_pll - s.phi_pll, next.x_pll - s.x_pll);
            s = next;
            if (!std::isfinite(s.phi_pll) || !std::isfinite(s.x_pll) || !opt.window.contains(s)) {
                if (std::isfinite(s.phi_pll) && std::isfinite(s.x_pll))
                    br.push_back(s);
                b.truncated[static_cast<std::size_t>(k)] = true;
                break;
            }
            if (std::hypot(s.phi_pll - last.phi_pll, s.x_pll - last.x_pll) >= min_spacing) {
                br.push_back(s);
                last = s;
            }
        }
    }

    b.polyline.assign(branches[0].rbegin(), branches[0].rend());
    b.uep_index = b.polyline.size();
    b.polyline.push_back(uep);
    b.polyline.insert(b.polyline.end(), branches[1].begin(), branches[1].end());
    return b;
}

BoaBoundary boundary_manifold(const SystemParams& p, double Ug3, double i_rd3, double omega_r,
                              const ManifoldOptions& opt)
{
    BoaBoundary b = boundary_manifold(gse_from_stage(p, Ug3, i_rd3, omega_r), opt);
    b.Ug3 = Ug3;
    b.i_rd3 = i_rd3;
    return b;
}

const char* membership_name(Membership m)
{
    switch (m) {
    case Membership::Inside:
        return "inside";
    case Membership::Outside:
        return "outside";
    case Membership::Indeterminate:
        break;
    }
    return "indeterminate";
}

MembershipResult is_in_boa(const PllState& point, const GseParams& g, const MembershipOptions& opt)
{
    MembershipResult r;
    r.method = MembershipMethod::ForwardSim;
    const FrozenEquilibria eq = g.equilibria();
    if (!eq.exists) {
        r.verdict = Membership::Outside;
        r.escape_angle = point.phi_pll;
        return r;
    }

    auto rhs = [&](const PllState& s) { return pll_derivatives(s, g); };
    PllState s = point;
    double dwell_start = -1.0;
    const auto n = static_cast<long>(std::ceil(opt.horizon / opt.dt - 1e-9));
    for (long i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) * opt.dt;
        if (!std::isfinite(s.phi_pll) || !std::isfinite(s.x_pll) ||
            s.phi_pll > eq.phi_u + kTwoPi || s.phi_pll < eq.phi_u - 2.0 * kTwoPi) {
            r.verdict = Membership::Outside;
            r.escape_angle = s.phi_pll;
            return r;
        }
        const double copy = std::round((s.phi_pll - eq.phi_s) / kTwoPi);
        const bool near = std::abs(s.phi_pll - eq.phi_s - kTwoPi * copy) < opt.radius &&
                          std::abs(s.x_pll - 1.0) < opt.x_radius;
        if (near) {
            if (dwell_start < 0.0)
                dwell_start = t;
            if (t - dwell_start >= opt.dwell - 1e-12) {
                if (copy == 0.0) {
                    r.verdict = Membership::Inside;
                    r.t_converge = dwell_start;
                } else {
                    r.verdict = Membership::Outside;
                    r.escape_angle = s.phi_pll;
                }
                return r;
            }
        } else {
            dwell_start = -1.0;
        }
        if (i < n)
            s = num::rk4_step(s, opt.dt, rhs);
    }
    r.boundary_band = true;
    return r;
}

namespace {

// Crossings of the ray {x = x0, phi > phi0} with the polyline shifted by dphi.
int ray_crossings(const std::vector<PllState>& pl, const PllState& p0, double dphi)
{
    int count = 0;
    for (std::size_t i = 1; i < pl.size(); ++i) {
        const PllState& a = pl[i - 1];
        const PllState& b = pl[i];
        if ((a.x_pll <= p0.x_pll) == (b.x_pll <= p0.x_pll))
            continue;
        const double phi =
            a.phi_pll + (p0.x_pll - a.x_pll) * (b.phi_pll - a.phi_pll) / (b.x_pll - a.x_pll) + dphi;
        if (phi > p0.phi_pll)
            ++count;
    }
    return count;
}

double segment_distance(const PllState& p, const PllState& a, const PllState& b, double dphi)
{
    const double ax = a.phi_pll + dphi, ay = a.x_pll;
    const double bx = b.phi_pll + dphi, by = b.x_pll;
    const double vx = bx - ax, vy = by - ay;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((p.phi_pll - ax) * vx + (p.x_pll - ay) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.phi_pll - (ax + t * vx), p.x_pll - (ay + t * vy));
}

} // namespace

MembershipResult is_in_boa_manifold(const PllState& point, const BoaBoundary& b)
{
    MembershipResult r;
    r.method = MembershipMethod::ManifoldSide;
    if (b.polyline.size() < 2 || b.exhausted[0] || b.exhausted[1])
        return r;
    const auto [lo, hi] = std::minmax_element(
        b.polyline.begin(), b.polyline.end(),
        [](const PllState& a, const PllState& c) { return a.x_pll < c.x_pll; });
    if (!(point.x_pll > lo->x_pll && point.x_pll < hi->x_pll))
        return r;

    // Odd count: left of the curve through phi_u. Even count for the
    // shifted copy: right of the curve through phi_u - 2*pi.
    const bool left_of_upper = ray_crossings(b.polyline, point, 0.0) % 2 == 1;
    const bool right_of_lower = ray_crossings(b.polyline, point, -kTwoPi) % 2 == 0;
    r.verdict = left_of_upper && right_of_lower ? Membership::Inside : Membership::Outside;
    return r;
}

double distance_to_boundary(const PllState& point, const BoaBoundary& b)
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < b.polyline.size(); ++i)
        for (double dphi : {0.0, -kTwoPi})
            best = std::min(best, segment_distance(point, b.polyline[i - 1], b.polyline[i], dphi));
    return best;
}

PllState GridSpec::at(int i, int j) const
{
    const double phi = n_phi > 1 ? phi_min + (phi_max - phi_min) * i / (n_phi - 1) : phi_min;
    const double x = n_x > 1 ? x_min + (x_max - x_min) * j / (n_x - 1) : x_min;
    return {x, phi};
}

std::vector<GridCell> membership_grid(const GseParams& g, const GridSpec& grid,
                                      const MembershipOptions& opt)
{
    const long total = static_cast<long>(grid.n_phi) * grid.n_x;
    std::vector<GridCell> cells(static_cast<std::size_t>(std::max(0L, total)));
#pragma omp parallel for schedule(dynamic, 16)
    for (long k = 0; k < total; ++k) {
        GridCell& c = cells[static_cast<std::size_t>(k)];
        c.point = grid.at(static_cast<int>(k / grid.n_x), static_cast<int>(k % grid.n_x));
        c.verdict = is_in_boa(c.point, g, opt).verdict;
    }
    return cells;
}

std::vector<GridCell> membership_grid_serial(const GseParams& g, const GridSpec& grid,
                                             const MembershipOptions& opt)
{
    std::vector<GridCell> cells;
    for (int i = 0; i < grid.n_phi; ++i) {
        for (int j = 0; j < grid.n_x; ++j) {
            GridCell c;
            c.point = grid.at(i, j);
            c.verdict = is_in_boa(c.point, g, opt).verdict;
            cells.push_back(c);
        }
    }
    return cells;
}

std::vector<PllState> sample_points(const StateWindow& w, std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uphi(w.phi_min, w.phi_max);
    std::uniform_real_distribution<double> ux(w.x_min, w.x_max);
    std::vector<PllState> pts(n);
    for (auto& p : pts) {
        p.phi_pll = uphi(rng);
        p.x_pll = ux(rng);
    }
    return pts;
}

std::vector<Membership> membership_batch(const std::vector<PllState>& pts, const GseParams& g,
                                         const MembershipOptions& opt)
{
    std::vector<Membership> out(pts.size(), Membership::Indeterminate);
    const auto n = static_cast<long>(pts.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (long i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = is_in_boa(pts[static_cast<std::size_t>(i)], g, opt).verdict;
    return out;
}

std::vector<Membership> membership_batch_serial(const std::vector<PllState>& pts,
                                                const GseParams& g, const MembershipOptions& opt)
{
    std::vector<Membership> out;
    out.reserve(pts.size());
    for (const auto& p : pts)
        out.push_back(is_in_boa(p, g, opt).verdict);
    return out;
}

GseParams stage3_frozen(const Scenario& sc)
{
    const LvrtCurrents lv = onset_lvrt_currents(sc);
    const double omega = initial_state(sc.params).omega_r;
    return gse_from_stage(sc.params, sc.params.Ug_nominal, lv.i_rd2, omega);
}

namespace {

GseParams stage2_frozen(const Scenario& sc)
{
    const LvrtCurrents lv = onset_lvrt_currents(sc);
    const double omega = initial_state(sc.params).omega_r;
    return gse_from_stage(sc.params, sc.Ug2, lv.i_rd2, omega);
}

} // namespace

PllState stage3_initial_state(const Scenario& sc)
{
    sc.validate();
    if (sc.permanent())
        throw ParameterError("stage3_initial_state: scenario has no clearing instant");
    const GseParams g2 = stage2_frozen(sc);
    const FullState s0 = initial_state(sc.params);
    PllState s{s0.x_pll, s0.phi_pll};
    auto rhs = [&](const PllState& x) { return pll_derivatives(x, g2); };
    const double span = sc.t_c - sc.t_f;
    const auto n = static_cast<long>(std::floor(span / sc.dt + 1e-9));
    for (long i = 0; i < n; ++i)
        s = num::rk4_step(s, sc.dt, rhs);
    const double rest = span - static_cast<double>(n) * sc.dt;
    if (rest > 1e-15)
        s = num::rk4_step(s, rest, rhs);
    return s;
}

BoaCct cct_boa(const Scenario& sc)
{
    sc.validate();
    BoaCct res;
    const GseParams g3 = stage3_frozen(sc);
    if (!g3.equilibria().exists) {
        res.no_stage3_equilibrium = true;
        res.cct = 0.0;
        return res;
    }

    const GseParams g2 = stage2_frozen(sc);
    const FullState s0 = initial_state(sc.params);
    auto rhs = [&](const PllState& x) { return pll_derivatives(x, g2); };
    const auto n = static_cast<long>(std::ceil(kBoaCctBracket / sc.dt - 1e-9));
    std::vector<PllState> traj(static_cast<std::size_t>(n) + 1);
    traj[0] = {s0.x_pll, s0.phi_pll};
    for (long i = 0; i < n; ++i)
        traj[static_cast<std::size_t>(i) + 1] = num::rk4_step(traj[static_cast<std::size_t>(i)], sc.dt, rhs);

    auto inside = [&](long k) { return is_in_boa(traj[static_cast<std::size_t>(k)], g3).inside(); };
    if (inside(n)) {
        res.stage3_entry = traj.back();
        return res;
    }
    if (!inside(0)) {
        res.cct = 0.0;
        res.stage3_entry = traj.front();
        return res;
    }
    long lo = 0;
    long hi = n;
    while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        if (inside(mid))
            lo = mid;
        else
            hi = mid;
    }
    res.cct = static_cast<double>(lo) * sc.dt;
    res.stage3_entry = traj[static_cast<std::size_t>(lo)];
    return res;
}

} // namespace tsslab
