#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "mch/errors.hpp"

namespace mch::roots {

// Safeguarded secant/bisection on a sign-change bracket.  f(lo) and f(hi)
// must have opposite (or zero) signs.
template <class Func>
double refine(const Func& f, double lo, double hi, double xtol = 0.0,
              int max_iter = 200) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        // accept an endpoint that is a root to rounding relative to the other
        const double alo = std::fabs(flo), ahi = std::fabs(fhi);
        if (alo <= 1e-10 * ahi) return lo;
        if (ahi <= 1e-10 * alo) return hi;
        throw DomainError("refine: endpoints do not bracket a root");
    }
    if (xtol <= 0.0) xtol = 1e-15 * (std::fabs(lo) + std::fabs(hi) + 1.0);
    for (int it = 0; it < max_iter; ++it) {
        // secant candidate, fall back to midpoint when outside the bracket
        double x = hi - fhi * (hi - lo) / (fhi - flo);
        const double mid = 0.5 * (lo + hi);
        if (!(x > lo && x < hi)) x = mid;
        const double fx = f(x);
        if (fx == 0.0 || hi - lo <= xtol) return x;
        if ((fx > 0.0) == (flo > 0.0)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
    }
    return 0.5 * (lo + hi);
}

struct ScanRoot {
    double x;
    int multiplicity; // 1 = transversal sign change, 2 = tangential touch
};

// Scans [lo,hi] at n+1 equispaced points and refines every sign change.
// Local minima of |f| that dip below touch_tol without a sign change are
// reported as multiplicity-2 touches (tangencies), refined on |f| minimum.
template <class Func>
std::vector<ScanRoot> scan(const Func& f, double lo, double hi, int n,
                           double touch_tol = 0.0) {
    std::vector<ScanRoot> out;
    if (!(hi > lo) || n < 2) return out;
    const double h = (hi - lo) / n;
    double xp = lo, fp = f(lo);
    if (fp == 0.0) out.push_back({lo, 1});
    for (int i = 1; i <= n; ++i) {
        const double x = (i == n) ? hi : lo + i * h;
        const double fx = f(x);
        if (fx == 0.0) {
            if (out.empty() || std::fabs(out.back().x - x) > 0.5 * h)
                out.push_back({x, 1});
        } else if ((fp > 0.0) != (fx > 0.0) && fp != 0.0) {
            const double r = refine(f, xp, x);
            if (out.empty() || std::fabs(out.back().x - r) > 0.5 * h)
                out.push_back({r, 1});
        }
        xp = x;
        fp = fx;
    }
    if (touch_tol > 0.0) {
        // look for tangential touches between recorded roots
        double prev = lo;
        std::vector<ScanRoot> touches;
        for (int i = 1; i < n; ++i) {
            const double xm = lo + i * h;
            const double fm = f(xm), fl = f(xm - h), fr = f(xm + h);
            if (std::fabs(fm) <= touch_tol && std::fabs(fm) <= std::fabs(fl) &&
                std::fabs(fm) <= std::fabs(fr) && fm * fl > 0.0 && fm * fr > 0.0) {
                bool near = false;
                for (const auto& r : out)
                    if (std::fabs(r.x - xm) <= 2.0 * h) near = true;
                for (const auto& r : touches)
                    if (std::fabs(r.x - xm) <= 2.0 * h) near = true;
                if (!near) touches.push_back({xm, 2});
            }
        }
        (void)prev;
        for (const auto& t : touches) {
            auto it = out.begin();
            while (it != out.end() && it->x < t.x) ++it;
            out.insert(it, t);
        }
    }
    return out;
}

// Newton polish with derivative callback; falls back to the initial guess if
// iteration leaves [lo,hi].
template <class Func, class Deriv>
double polish(const Func& f, const Deriv& df, double x0, double lo, double hi,
              int max_iter = 50) {
    double x = x0;
    for (int it = 0; it < max_iter; ++it) {
        const double fx = f(x);
        const double dx = df(x);
        if (dx == 0.0) break;
        const double xn = x - fx / dx;
        if (!(xn >= lo && xn <= hi)) break;
        if (std::fabs(xn - x) <= 1e-16 * (std::fabs(x) + 1.0)) return xn;
        x = xn;
    }
    return x;
}

// Real roots of x^3 + p x + q = 0 (ascending order).
std::vector<double> depressed_cubic_roots(double p, double q);

} // namespace mch::roots
