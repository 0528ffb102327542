// Acceptance gate: one PASS/FAIL line per criterion.
//
//   acceptance [--known-unattainable N ...]
//
// Listed criteria still print their real verdict; they are only left out
// of the exit status.

#include "tsslab/assessment.hpp"
#include "tsslab/boa.hpp"
#include "tsslab/eac.hpp"
#include "tsslab/export.hpp"
#include "tsslab/gse.hpp"
#include "tsslab/model.hpp"
#include "tsslab/numerics.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace tsslab;

namespace {

struct Gate {
    std::set<int> waived;
    bool ok = true;
    int waived_failures = 0;

    void report(int id, bool pass, const std::string& what, double seconds)
    {
        const bool w = waived.count(id) > 0;
        std::printf("[%s] criterion %d: %s (%.1f s)%s\n", pass ? "PASS" : "FAIL", id, what.c_str(),
                    seconds, !pass && w ? " [known unattainable, not gating]" : "");
        std::fflush(stdout);
        if (!pass && !w)
            ok = false;
        if (!pass && w)
            ++waived_failures;
    }
};

class Timer {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Equal-area root by composite Simpson and bisection.
double phi_cr_quadrature(const SystemParams& p, double ug2, double ug3, double ird)
{
    const CoeffSet k = correction_coefficients(p, p.omega_r_ref);
    const double pm = k.d * p.Xg * ird;
    const double phi_s1 = std::asin(p.Pin * p.Xg / (p.Ug_nominal * p.Ut_ref));
    const double phi_u3 = std::numbers::pi - std::asin(pm / (k.c * ug3));
    auto simpson = [](auto f, double a, double b) {
        const int n = 4000;
        const double h = (b - a) / n;
        double s = f(a) + f(b);
        for (int i = 1; i < n; ++i)
            s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
        return s * h / 3.0;
    };
    auto h = [&](double pc) {
        return simpson([&](double x) { return pm - k.c * ug2 * std::sin(x); }, phi_s1, pc) -
               simpson([&](double x) { return k.c * ug3 * std::sin(x) - pm; }, pc, phi_u3);
    };
    return num::bisect_root(h, phi_s1, phi_u3, 1e-14);
}

std::string trajectory_bytes(const Scenario& sc)
{
    std::ostringstream os;
    write_trajectory_csv(os, simulate(sc));
    return os.str();
}

} // namespace

int main(int argc, char** argv)
{
    Gate gate;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--known-unattainable") == 0 && i + 1 < argc)
            gate.waived.insert(std::atoi(argv[++i]));
        else {
            std::fprintf(stderr, "usage: acceptance [--known-unattainable N ...]\n");
            return 2;
        }
    }
    const SystemParams p;

    {  // 1
        Timer t;
        const CoeffSet k = correction_coefficients(p, sep_stage1(p).omega_r);
        const std::array<double, 4> got{k.a, k.b, k.c, k.d}, want{0.89, 0.85, 0.87, 1.00};
        bool pass = true;
        for (int i = 0; i < 4; ++i)
            pass = pass && std::abs(got[i] - want[i]) <= 0.005;
        gate.report(1, pass, fmt("coefficients (%.4f, %.4f, %.4f, %.4f)", k.a, k.b, k.c, k.d), t.seconds());
    }

    {  // 2
        Timer t;
        const EquilibriumPoint s = sep_stage1(p), u = uep_stage1(p);
        const std::array<double, 5> gs{s.omega_r, s.i_rd, s.i_rq, s.x_pll, s.phi_pll};
        const std::array<double, 5> gu{u.omega_r, u.i_rd, u.i_rq, u.x_pll, u.phi_pll};
        const std::array<double, 5> ws{1.2, 0.7, -0.43, 1, 0.41}, wu{1.2, 0.7, -4.25, 1, 2.73};
        bool pass = true;
        for (int i = 0; i < 5; ++i)
            pass = pass && std::abs(gs[i] - ws[i]) <= 0.01 && std::abs(gu[i] - wu[i]) <= 0.01;
        gate.report(2, pass,
                    fmt("SEP [%.4f, %.4f, %.4f, %.4f, %.4f] UEP [%.4f, %.4f, %.4f, %.4f, %.4f]", gs[0],
                        gs[1], gs[2], gs[3], gs[4], gu[0], gu[1], gu[2], gu[3], gu[4]),
                    t.seconds());
    }

    {  // 3
        Timer t;
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> ug(0.05, 0.5), ird(0.0, 0.5), x(0.98, 1.02), phi(-1.0, 2.5);
        double worst = 0.0;
        for (int i = 0; i < 10; ++i) {
            Scenario sc;
            sc.Ug2 = ug(rng);
            sc.i_rq2 = -0.9;
            sc.i_rd2 = ird(rng);
            worst = std::max(worst, gse_vs_dae_residual(sc, 1.0, {x(rng), phi(rng)}));
        }
        gate.report(3, worst < 1e-8, fmt("GSE vs DAE max deviation %.3e rad over 10 scenarios", worst),
                    t.seconds());
    }

    {  // 4
        Timer t;
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> ug2(0.0, 0.5), ug3(0.6, 1.0), ird(0.05, 0.7);
        int n = 0;
        double worst = 0.0;
        while (n < 100) {
            const double a = ug2(rng), b = ug3(rng), c = ird(rng);
            const ClearingAngle r = critical_clearing_angle(p, a, b, c, p.omega_r_ref);
            if (r.kind != ClearingAngleKind::Angle)
                continue;
            worst = std::max(worst, std::abs(r.phi_cr - phi_cr_quadrature(p, a, b, c)));
            ++n;
        }
        gate.report(4, worst < 1e-9, fmt("closed form vs quadrature root max %.3e rad (100 points)", worst),
                    t.seconds());
    }

    std::vector<TableRow> table1;
    {  // 5
        Timer t;
        table1 = reproduce_table(1, p, 0);
        const std::array<double, 6> eac{0.143, 0.099, 0.270, 0.109, 0.239, 0.125};
        const std::array<double, 6> boa{0.158, 0.115, 0.283, 0.125, 0.253, 0.141};
        const std::array<double, 6> emt{0.157, 0.114, 0.282, 0.124, 0.252, 0.140};
        bool pass = table1.size() == 6;
        std::string detail;
        for (std::size_t i = 0; i < table1.size(); ++i) {
            const CctReport& r = table1[i].report;
            pass = pass && r.status == "ok" && std::abs(r.cct_eac - eac[i]) <= 0.005 &&
                   std::abs(r.cct_boa - boa[i]) <= 0.005 && std::abs(r.cct_sim - emt[i]) <= 0.15 * emt[i];
            detail += fmt(" [%.4f %.4f %.4f]", r.cct_eac, r.cct_boa, r.cct_sim);
        }
        gate.report(5, pass, "table 1 (eac boa sim):" + detail, t.seconds());
    }

    {  // 6
        Timer t;
        const auto rows = reproduce_table(2, p, 0);
        bool pass = rows.size() == 12;
        bool monotone = true;
        double drop = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const CctReport& r = rows[i].report;
            pass = pass && r.status == "ok" && r.cct_eac == rows[0].report.cct_eac &&
                   r.cct_boa == rows[0].report.cct_boa;
            if (i > 0)
                monotone = monotone && r.cct_sim <= rows[i - 1].report.cct_sim;
        }
        if (!rows.empty())
            drop = rows.front().report.cct_sim - rows.back().report.cct_sim;
        pass = pass && monotone && drop <= 0.010;
        gate.report(6, pass,
                    fmt("table 2: eac %.4f, boa %.4f constant; sim %.4f -> %.4f, monotone %s, drop %.1f ms",
                        rows[0].report.cct_eac, rows[0].report.cct_boa, rows.front().report.cct_sim,
                        rows.back().report.cct_sim, monotone ? "yes" : "no", drop * 1e3),
                    t.seconds());
    }

    {  // 7
        Timer t;
        std::array<Outcome, 3> got{};
        double case2_peak = 0.0;
        for (int k = 1; k <= 3; ++k) {
            const Scenario sc = reference_case(k, p);
            const Trajectory tr = simulate(sc);
            got[k - 1] = classify_outcome(tr, sc);
            if (k == 2)
                case2_peak = tr.max_phi_stage2;
        }
        // Stage-2 divergence: the angle runs past the pre-fault UEP before clearing.
        const bool diverges = case2_peak > uep_stage1(p).phi_pll;
        const bool pass = got[0] == Outcome::Stable && got[1] == Outcome::Stable &&
                          got[2] == Outcome::Unstable && diverges;
        gate.report(7, pass,
                    fmt("cases I/II/III: %s / %s / %s (want Stable / Stable / Unstable), case II stage-2 peak "
                        "phi %.3f rad",
                        outcome_name(got[0]), outcome_name(got[1]), outcome_name(got[2]), case2_peak),
                    t.seconds());
    }

    {  // 8
        Timer t;
        std::vector<std::string> failed;

        const Scenario c1 = reference_case(1, p);
        const Trajectory tr = simulate(c1);
        double jump = 0.0;
        for (const Transition& x : tr.transitions) {
            jump = std::max({jump, std::abs(x.after.omega_r - x.before.omega_r),
                             std::abs(x.after.w_rsc - x.before.w_rsc), std::abs(x.after.z_tvc - x.before.z_tvc),
                             std::abs(x.after.x_pll - x.before.x_pll),
                             std::abs(x.after.phi_pll - x.before.phi_pll)});
        }
        if (tr.transitions.size() != 3 || jump > 1e-12)
            failed.push_back("continuity");
        if (tr.transitions.size() == 3 &&
            std::abs(tr.transitions[2].i_rd_after - tr.transitions[2].i_rd_before) > p.Kramp * kEventTolerance)
            failed.push_back("bumpless");

        GseParams g = gse_from_stage(p, 0.2, 0.28, p.omega_r_ref);
        g.Deq_coeff = 0.0;
        GseState s{sep_stage1(p).phi_pll, 0.0};
        const double e0 = gse_energy(s, g);
        double drift = 0.0;
        for (int i = 0; i < 20000; ++i) {
            s = num::rk4_step(s, 50e-6, [&](const GseState& q) { return gse_derivatives(q, g); });
            drift = std::max(drift, std::abs(gse_energy(s, g) - e0));
        }
        if (drift >= 1e-6)
            failed.push_back("energy");

        int saddles = 0;
        bool saddle_ok = true;
        for (double ug = 0.1; ug <= 1.0 + 1e-12; ug += 0.1) {
            for (double ird = 0.05; ird <= 0.8; ird += 0.05) {
                const GseParams gg = gse_from_stage(p, ug, ird, p.omega_r_ref);
                const FrozenEquilibria eq = gg.equilibria();
                if (!eq.exists || eq.degenerate)
                    continue;
                const SaddleEigen e = uep_eigenstructure(gg);
                saddle_ok = saddle_ok && e.lambda_stable < 0.0 && e.lambda_unstable > 0.0;
                ++saddles;
            }
        }
        if (!saddle_ok)
            failed.push_back("saddle");

        const BoaBoundary b = boundary_manifold(p, p.Ug_nominal, 0.34, p.omega_r_ref);
        StateWindow w;
        w.phi_min = -4.0;
        w.phi_max = 4.0;
        w.x_min = 0.9;
        w.x_max = 1.1;
        const auto pts = sample_points(w, 1000, 8);
        const auto fwd = membership_batch(pts, b.g);
        int compared = 0, mismatched = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (distance_to_boundary(pts[i], b) < 1e-3)
                continue;
            const MembershipResult m = is_in_boa_manifold(pts[i], b);
            ++compared;
            if (m.verdict != fwd[i])
                ++mismatched;
        }
        if (mismatched != 0)
            failed.push_back("boa-agreement");

        bool ordered = table1.size() == 6;
        for (const TableRow& r : table1)
            ordered = ordered && r.report.cct_eac <= r.report.cct_boa;
        if (!ordered)
            failed.push_back("eac<=boa");

        Scenario det = c1;
        det.horizon = 5.0;
        if (trajectory_bytes(det) != trajectory_bytes(det))
            failed.push_back("determinism");

        std::string list;
        for (const auto& f : failed)
            list += " " + f;
        gate.report(8, failed.empty(),
                    fmt("properties: jump %.1e, energy drift %.1e, %d saddles, boa mismatches %d/%d%s%s", jump,
                        drift, saddles, mismatched, compared, failed.empty() ? "" : ", failed:", list.c_str()),
                    t.seconds());
    }

    {  // 9
        Timer t;
        Scenario sc = reference_case(1, p);
        const double a = simulate(sc).final_state.phi_pll;
        sc.dt = 25e-6;
        const double b = simulate(sc).final_state.phi_pll;
        gate.report(9, std::abs(a - b) < 1e-4, fmt("case I terminal phi change %.3e rad for dt 50 -> 25 us", std::abs(a - b)),
                    t.seconds());
    }

    if (!gate.ok)
        std::printf("ACCEPTANCE: FAIL\n");
    else if (gate.waived_failures > 0)
        std::printf("ACCEPTANCE: PASS except %d known-unattainable criterion(s)\n", gate.waived_failures);
    else
        std::printf("ACCEPTANCE: PASS\n");
    return gate.ok ? 0 : 1;
}
