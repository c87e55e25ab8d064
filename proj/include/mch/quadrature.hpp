#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "mch/errors.hpp"

namespace mch::quad {

// 7-point Gauss / 15-point Kronrod pair on [a,b].
// Returns the K15 estimate; err is a conservative error estimate.
template <class Func>
double gk15(const Func& f, double a, double b, double& err) {
    // abscissa, Gauss weight, Kronrod weight
    static const double nw[8][3] = {
        {0.000000000000000, 0.417959183673469, 0.209482141084728},
        {0.405845151377397, 0.381830050505119, 0.190350578064785},
        {0.741531185599394, 0.279705391489277, 0.140653259715525},
        {0.949107912342759, 0.129484966168870, 0.063092092629979},
        {0.207784955007898, 0.0, 0.204432940075298},
        {0.586087235467691, 0.0, 0.169004726639267},
        {0.864864423359769, 0.0, 0.104790010322250},
        {0.991455371120813, 0.0, 0.022935322010529}};

    const double mid = 0.5 * (a + b);
    const double half = b - mid;

    double y0 = f(mid);
    double g7 = nw[0][1] * y0;
    double k15 = nw[0][2] * y0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * nw[i][0];
        const double yi = f(mid + dx) + f(mid - dx);
        g7 += nw[i][1] * yi;
        k15 += nw[i][2] * yi;
    }
    g7 *= half;
    k15 *= half;

    err = 200.0 * std::fabs(g7 - k15);
    err *= std::sqrt(err);
    return k15;
}

// Adaptive bisection on top of gk15.  Throws QuadratureError if the interval
// stack overflows before the tolerance is met.
template <class Func>
double integrate(const Func& f, double a, double b, double rel_tol = 1e-10,
                 double abs_tol = 1e-14, int max_intervals = 4000) {
    if (a == b) return 0.0;
    struct Seg {
        double a, b;
    };
    std::vector<Seg> stack;
    stack.push_back({a, b});
    double sum = 0.0;
    int used = 1;
    while (!stack.empty()) {
        const Seg s = stack.back();
        stack.pop_back();
        double err = 0.0;
        const double v = gk15(f, s.a, s.b, err);
        if (err <= rel_tol * std::fabs(v) || err <= abs_tol ||
            std::fabs(s.b - s.a) <= 1e-15 * (std::fabs(a) + std::fabs(b) + 1.0)) {
            sum += v;
            continue;
        }
        if (used + 2 > max_intervals)
            throw QuadratureError("adaptive quadrature did not converge");
        const double mid = 0.5 * (s.a + s.b);
        stack.push_back({s.a, mid});
        stack.push_back({mid, s.b});
        used += 2;
    }
    return sum;
}

// Gauss-Legendre 5-point rule on [a,b]; used for smooth short panels where
// adaptivity is unnecessary (e.g. polyline position accumulation).
template <class Func>
double gl5(const Func& f, double a, double b) {
    static const double x[5] = {-0.906179845938664, -0.538469310105683, 0.0,
                                0.538469310105683, 0.906179845938664};
    static const double w[5] = {0.236926885056189, 0.478628670499366,
                                0.568888888888889, 0.478628670499366,
                                0.236926885056189};
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 5; ++i) s += w[i] * f(mid + half * x[i]);
    return s * half;
}

} // namespace mch::quad
