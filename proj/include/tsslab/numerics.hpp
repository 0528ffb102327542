#pragma once

// Small numerical kernels shared by the simulator and the assessors.

#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>

namespace tsslab::num {

// Classical fixed-step fourth-order Runge-Kutta. State must support
// state + state and double * state.
template <class State, class Rhs>
State rk4_step(const State& s, double h, Rhs&& rhs)
{
    const State k1 = rhs(s);
    const State k2 = rhs(s + (0.5 * h) * k1);
    const State k3 = rhs(s + (0.5 * h) * k2);
    const State k4 = rhs(s + h * k3);
    return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Time-dependent variant: rhs(t, state).
template <class State, class Rhs>
State rk4_step_t(const State& s, double t, double h, Rhs&& rhs)
{
    const State k1 = rhs(t, s);
    const State k2 = rhs(t + 0.5 * h, s + (0.5 * h) * k1);
    const State k3 = rhs(t + 0.5 * h, s + (0.5 * h) * k2);
    const State k4 = rhs(t + h, s + h * k3);
    return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace detail {

template <class F>
double simpson_recurse(F& f, double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

// Adaptive Simpson quadrature with Richardson correction. Reversed limits
// give the negated integral.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol = 1e-10, int max_depth = 50)
{
    if (a == b)
        return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_recurse(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

// Bisection on a bracketing interval [lo, hi] where sign(f(lo)) != sign(f(hi)).
// Returns the midpoint of the final interval of width <= tol.
template <class F>
double bisect_root(F&& f, double lo, double hi, double tol = 1e-10, int max_iter = 200)
{
    double flo = f(lo);
    for (int i = 0; i < max_iter && (hi - lo) > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = f(mid);
        if (fmid == 0.0)
            return mid;
        if ((fmid < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Supremum of a monotone predicate: pred(lo) true, pred(hi) false.
// Returns the last known-true point after shrinking the bracket below tol.
template <class P>
double bisect_predicate(P&& pred, double lo, double hi, double tol)
{
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (pred(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

} // namespace tsslab::num
