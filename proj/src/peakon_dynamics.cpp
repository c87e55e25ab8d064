#include "mch/peakon_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mch/ode.hpp"

namespace mch::peakon {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double reduce_nearest_image(double x, double ell) {
    if (!std::isfinite(ell)) return x;
    double r = std::remainder(x, ell); // (-ell/2, ell/2]
    if (r == 0.5 * ell) r = -0.5 * ell;
    return r;
}
} // namespace

GValue fundamental_solution(double ell, double x) {
    if (!std::isfinite(ell)) {
        const double e = 0.5 * std::exp(-std::fabs(x));
        if (x > 0.0) return {e, -e, -e};
        if (x < 0.0) return {e, e, e};
        return {0.5, 0.5, -0.5};
    }
    const double r = reduce_nearest_image(x, ell);
    const double den = 2.0 * std::sinh(0.5 * ell);
    if (r < 0.0) {
        const double a = r + 0.5 * ell;
        return {std::cosh(a) / den, std::sinh(a) / den, std::sinh(a) / den};
    }
    if (r > 0.0) {
        const double a = r - 0.5 * ell;
        return {std::cosh(a) / den, std::sinh(a) / den, std::sinh(a) / den};
    }
    const double g0 = std::cosh(0.5 * ell) / den;
    return {g0, 0.5, -0.5};
}

double single_peakon_speed(double ell, double k, double p) {
    if (k > 0.0)
        throw NoPeakonError("single_peakon_speed: no peakon solution for k > 0");
    if (k == 0.0) {
        if (!std::isfinite(ell)) return p * p / 6.0;
        const double ch = 1.0 / std::tanh(0.5 * ell);
        return 0.25 * p * p * (ch * ch - 1.0 / 3.0);
    }
    const double s = std::sqrt(-k);
    if (!std::isfinite(ell)) {
        const double a = 0.5 * p - s;
        return a * a - p * p / 12.0;
    }
    const double a = 0.5 * p / std::tanh(0.5 * ell) - s;
    return a * a - p * p / 12.0;
}

void PeakonEnsemble::validate() const {
    if (positions.size() != amplitudes.size() || positions.empty())
        throw DomainError("PeakonEnsemble: size mismatch or empty");
    for (std::size_t i = 0; i + 1 < positions.size(); ++i)
        if (!(positions[i] < positions[i + 1]))
            throw OrderingError("PeakonEnsemble: positions not strictly increasing");
    for (double p : amplitudes)
        if (p == 0.0) throw DomainError("PeakonEnsemble: zero amplitude");
    if (model == Model::mCH && k > 0.0)
        throw DomainError("PeakonEnsemble: mCH peakons require k <= 0");
}

namespace {

// u and one-sided u_x at position x_i for the mCH ansatz
// u = sum_j p_j G(x - x_j) + background, background = -sqrt(-k).
void mch_point_values(const PeakonEnsemble& e, std::size_t i, double& u,
                      double& uxm, double& uxp) {
    const double bg = e.k < 0.0 ? -std::sqrt(-e.k) : 0.0;
    u = bg;
    uxm = 0.0;
    uxp = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j) {
        const GValue g = fundamental_solution(e.ell, e.positions[i] - e.positions[j]);
        u += e.amplitudes[j] * g.g;
        uxm += e.amplitudes[j] * g.dleft;
        uxp += e.amplitudes[j] * g.dright;
    }
}

} // namespace

std::vector<double> mch_rhs(const PeakonEnsemble& e) {
    e.validate();
    std::vector<double> out(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        double u, uxm, uxp;
        mch_point_values(e, i, u, uxm, uxp);
        out[i] = u * u - (uxp * uxp + uxp * uxm + uxm * uxm) / 3.0;
    }
    return out;
}

std::pair<std::vector<double>, std::vector<double>> ch_rhs(const PeakonEnsemble& e) {
    e.validate();
    const std::size_t n = e.size();
    std::vector<double> dx(n, 0.0), dp(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = reduce_nearest_image(
                e.positions[i] - e.positions[j], e.ell);
            const GValue g = fundamental_solution(e.ell, d);
            dx[i] += e.amplitudes[j] * g.g;
            const double sgn = (d > 0.0) - (d < 0.0);
            dp[i] += e.amplitudes[i] * e.amplitudes[j] * sgn * g.g;
        }
    }
    return {dx, dp};
}

double h0_quadratic(const PeakonEnsemble& e) {
    double s = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i)
        for (std::size_t j = 0; j < e.size(); ++j)
            s += e.amplitudes[i] * e.amplitudes[j] *
                 fundamental_solution(e.ell, e.positions[i] - e.positions[j]).g;
    return 0.5 * s;
}

Trajectory evolve(const PeakonEnsemble& e0, double t_end, EvolveOptions opt) {
    e0.validate();
    const std::size_t n = e0.size();
    const bool ch = e0.model == Model::CH;

    double xscale = 1.0;
    for (double x : e0.positions) xscale = std::max(xscale, std::fabs(x));
    const double eps = opt.collision_eps_factor * xscale;

    auto make_ensemble = [&](const ode::State& y) {
        PeakonEnsemble e = e0;
        e.positions.assign(y.begin(), y.begin() + n);
        if (ch) e.amplitudes.assign(y.begin() + n, y.end());
        return e;
    };

    ode::Rhs rhs = [&](double, const ode::State& y, ode::State& dy) {
        PeakonEnsemble e = make_ensemble(y);
        dy.assign(y.size(), 0.0);
        // near-contact states reached inside trial steps: freeze instead of
        // evaluating the degenerate one-sided derivatives
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (e.positions[i + 1] - e.positions[i] <= 0.0) return;
        if (ch) {
            auto [dx, dp] = ch_rhs(e);
            std::copy(dx.begin(), dx.end(), dy.begin());
            std::copy(dp.begin(), dp.end(), dy.begin() + n);
        } else {
            auto dx = mch_rhs(e);
            std::copy(dx.begin(), dx.end(), dy.begin());
        }
    };

    ode::State y(ch ? 2 * n : n);
    std::copy(e0.positions.begin(), e0.positions.end(), y.begin());
    if (ch) std::copy(e0.amplitudes.begin(), e0.amplitudes.end(), y.begin() + n);

    Trajectory traj;
    double last_record = -kInf;
    auto observer = [&](double t, const ode::State& s) {
        if (opt.record_dt > 0.0 && t - last_record < opt.record_dt &&
            t != t_end)
            return;
        last_record = t;
        traj.t.push_back(t);
        traj.x.emplace_back(s.begin(), s.begin() + n);
        if (ch)
            traj.p.emplace_back(s.begin() + n, s.end());
        else
            traj.p.push_back(e0.amplitudes);
        traj.h0.push_back(h0_quadratic(make_ensemble(s)));
    };

    std::function<double(double, const ode::State&)> event;
    if (n > 1) {
        event = [&](double, const ode::State& s) {
            double gap = kInf;
            for (std::size_t i = 0; i + 1 < n; ++i)
                gap = std::min(gap, s[i + 1] - s[i]);
            return gap - eps;
        };
    }

    if (opt.symplectic && ch) {
        ode::implicit_midpoint(rhs, y, 0.0, t_end, opt.fixed_dt, observer);
        return traj;
    }

    ode::Options oo;
    oo.rel_tol = opt.rel_tol;
    oo.abs_tol = opt.abs_tol;
    ode::DormandPrince dp(rhs, oo);
    double event_time = 0.0;
    const double tf = dp.integrate(y, 0.0, t_end, observer, event, &event_time);
    if (tf < t_end) {
        traj.collided = true;
        traj.collision_time = tf;
        double best = kInf;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double gap = y[i + 1] - y[i];
            if (gap < best) {
                best = gap;
                traj.collision_pair = {(int)i, (int)i + 1};
            }
        }
    }
    return traj;
}

HamiltonianReport hamiltonians(const std::vector<double>& u, double ell, double k) {
    const std::size_t n = u.size();
    if (!std::isfinite(ell) || ell <= 0.0)
        throw DomainError("hamiltonians: finite period required");
    if (n < 16) throw ResolutionError("hamiltonians: need at least 16 samples");
    const double dx = ell / n;
    auto at = [&](std::size_t i) { return u[(i + 4 * n) % n]; };

    // 4th-order periodic first derivative; 2nd-order as a resolution check
    std::vector<double> ux(n), ux2(n);
    for (std::size_t i = 0; i < n; ++i) {
        ux[i] = (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) /
                (12.0 * dx);
        ux2[i] = (at(i + 1) - at(i - 1)) / (2.0 * dx);
    }
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        diff += (ux[i] - ux2[i]) * (ux[i] - ux2[i]);
        norm += ux[i] * ux[i];
    }
    if (norm > 0.0 && std::sqrt(diff / norm) > 0.1)
        throw ResolutionError("hamiltonians: derivative stencils disagree; refine grid");

    double h0 = 0.0, h1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double uu = u[i], vv = ux[i];
        h0 += uu * uu + vv * vv;
        h1 += uu * uu * uu * uu + 2.0 * uu * uu * vv * vv -
              vv * vv * vv * vv / 3.0 + 4.0 * k * uu * uu;
    }
    return {h0 * dx, 0.25 * h1 * dx};
}

} // namespace mch::peakon
