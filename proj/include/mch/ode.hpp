#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "mch/errors.hpp"

namespace mch::ode {

using State = std::vector<double>;
using Rhs = std::function<void(double t, const State& y, State& dydt)>;

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double h_init = 1e-3;
    double h_min = 1e-14;
    double h_max = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 2'000'000;
};

struct StepRecord {
    double t0, t1;
    State y0, y1;
    State f0, f1; // derivatives at the endpoints (for dense output)
};

// Cubic Hermite interpolation inside an accepted step.
inline void dense_eval(const StepRecord& s, double t, State& y) {
    const double h = s.t1 - s.t0;
    const double u = (t - s.t0) / h;
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1;
    const double h10 = u3 - 2 * u2 + u;
    const double h01 = -2 * u3 + 3 * u2;
    const double h11 = u3 - u2;
    y.resize(s.y0.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = h00 * s.y0[i] + h10 * h * s.f0[i] + h01 * s.y1[i] +
               h11 * h * s.f1[i];
}

// Dormand-Prince 5(4) adaptive integrator.
//
// observer(t, y) is called after every accepted step (and once at t0).
// event, if nonempty, is a scalar function whose sign change inside a step
// stops integration; the crossing time is located on the dense output and
// returned through event_time.  Integration also stops at t_end.
class DormandPrince {
public:
    explicit DormandPrince(Rhs rhs, Options opt = {}) : rhs_(std::move(rhs)), opt_(opt) {}

    // Returns final time (== t_end, or the located event time).
    double integrate(State& y, double t0, double t_end,
                     const std::function<void(double, const State&)>& observer = {},
                     const std::function<double(double, const State&)>& event = {},
                     double* event_time = nullptr,
                     double event_arm_delay = 0.0) {
        const int dir = (t_end >= t0) ? 1 : -1;
        double t = t0;
        double h = std::min(opt_.h_init, std::fabs(t_end - t0)) * dir;
        if (h == 0.0) return t0;
        const std::size_t n = y.size();
        State k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
        State ytmp(n), y5(n), err(n);
        rhs_(t, y, k1);
        if (observer) observer(t, y);
        double ev_prev = event ? event(t, y) : 0.0;
        bool armed = !event || event_arm_delay <= 0.0;

        for (std::size_t step = 0; step < opt_.max_steps; ++step) {
            if (dir * (t - t_end) >= 0.0) return t;
            if (dir * (t + h - t_end) > 0.0) h = t_end - t;

            stage(t, y, h, k1, k2, k3, k4, k5, k6, k7, ytmp, y5, err);

            // error norm against mixed tolerance
            double enorm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double sc =
                    opt_.abs_tol +
                    opt_.rel_tol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
                const double e = err[i] / sc;
                enorm += e * e;
            }
            enorm = std::sqrt(enorm / n);

            if (enorm <= 1.0) {
                StepRecord rec{t, t + h, y, y5, k1, k7};
                const double t_new = t + h;
                if (event && !armed && dir * (t_new - t0) >= event_arm_delay)
                    armed = true;
                if (event && armed) {
                    const double ev_new = event(t_new, y5);
                    if (ev_prev != 0.0 && (ev_prev > 0.0) != (ev_new > 0.0)) {
                        const double te = locate_event(rec, event);
                        dense_eval(rec, te, y);
                        if (observer) observer(te, y);
                        if (event_time) *event_time = te;
                        return te;
                    }
                    ev_prev = ev_new;
                }
                t = t_new;
                y = y5;
                k1 = k7; // FSAL
                if (observer) observer(t, y);
            }

            // PI-free step size update
            const double fac =
                (enorm > 0.0) ? 0.9 * std::pow(enorm, -0.2) : 5.0;
            h *= std::min(5.0, std::max(0.2, fac));
            if (std::fabs(h) > opt_.h_max) h = opt_.h_max * dir;
            if (std::fabs(h) < opt_.h_min)
                throw IntegratorError("step size underflow");
        }
        throw IntegratorError("max step count exceeded");
    }

private:
    void stage(double t, const State& y, double h, const State& k1, State& k2,
               State& k3, State& k4, State& k5, State& k6, State& k7,
               State& ytmp, State& y5, State& err) {
        const std::size_t n = y.size();
        auto axpy = [&](State& out, std::initializer_list<std::pair<double, const State*>> terms) {
            for (std::size_t i = 0; i < n; ++i) {
                double s = y[i];
                for (const auto& [a, v] : terms) s += h * a * (*v)[i];
                out[i] = s;
            }
        };
        axpy(ytmp, {{1.0 / 5, &k1}});
        rhs_(t + h / 5, ytmp, k2);
        axpy(ytmp, {{3.0 / 40, &k1}, {9.0 / 40, &k2}});
        rhs_(t + 3 * h / 10, ytmp, k3);
        axpy(ytmp, {{44.0 / 45, &k1}, {-56.0 / 15, &k2}, {32.0 / 9, &k3}});
        rhs_(t + 4 * h / 5, ytmp, k4);
        axpy(ytmp, {{19372.0 / 6561, &k1},
                    {-25360.0 / 2187, &k2},
                    {64448.0 / 6561, &k3},
                    {-212.0 / 729, &k4}});
        rhs_(t + 8 * h / 9, ytmp, k5);
        axpy(ytmp, {{9017.0 / 3168, &k1},
                    {-355.0 / 33, &k2},
                    {46732.0 / 5247, &k3},
                    {49.0 / 176, &k4},
                    {-5103.0 / 18656, &k5}});
        rhs_(t + h, ytmp, k6);
        axpy(y5, {{35.0 / 384, &k1},
                  {500.0 / 1113, &k3},
                  {125.0 / 192, &k4},
                  {-2187.0 / 6784, &k5},
                  {11.0 / 84, &k6}});
        rhs_(t + h, y5, k7);
        static const double e[7] = {
            71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920,
            -17253.0 / 339200, 22.0 / 525, -1.0 / 40};
        for (std::size_t i = 0; i < n; ++i)
            err[i] = h * (e[0] * k1[i] + e[2] * k3[i] + e[3] * k4[i] +
                          e[4] * k5[i] + e[5] * k6[i] + e[6] * k7[i]);
    }

    double locate_event(const StepRecord& rec,
                        const std::function<double(double, const State&)>& event) {
        State y;
        double a = rec.t0, b = rec.t1;
        dense_eval(rec, a, y);
        double fa = event(a, y);
        for (int it = 0; it < 200; ++it) {
            const double m = 0.5 * (a + b);
            dense_eval(rec, m, y);
            const double fm = event(m, y);
            if (fm == 0.0 || std::fabs(b - a) <=
                                 1e-15 * (std::fabs(a) + std::fabs(b) + 1.0))
                return m;
            if ((fm > 0.0) == (fa > 0.0)) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        return 0.5 * (a + b);
    }

    Rhs rhs_;
    Options opt_;
};

inline void midpoint_stage_fixed_point(const Rhs& rhs, const State& y, double t,
                                       double h, State& k, State& ymid,
                                       State& knew, std::size_t n) {
    rhs(t, y, k);
    for (int it = 0; it < 50; ++it) {
        for (std::size_t i = 0; i < n; ++i) ymid[i] = y[i] + 0.5 * h * k[i];
        rhs(t + 0.5 * h, ymid, knew);
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            diff = std::max(diff, std::fabs(knew[i] - k[i]));
        k.swap(knew);
        if (diff < 1e-14) return;
    }
}

// Fixed-step implicit midpoint rule (symplectic); fixed-point iteration on
// the midpoint stage.
inline void implicit_midpoint(const Rhs& rhs, State& y, double t0, double t_end,
                              double dt,
                              const std::function<void(double, const State&)>& observer = {}) {
    const std::size_t n = y.size();
    State k(n), ymid(n), knew(n);
    double t = t0;
    if (observer) observer(t, y);
    while (t < t_end - 1e-15 * std::max(1.0, std::fabs(t_end))) {
        const double h = std::min(dt, t_end - t);
        midpoint_stage_fixed_point(rhs, y, t, h, k, ymid, knew, n);
        for (std::size_t i = 0; i < n; ++i) y[i] += h * k[i];
        t += h;
        if (observer) observer(t, y);
    }
}

} // namespace mch::ode
