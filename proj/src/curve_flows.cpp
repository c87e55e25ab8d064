#include "mch/curve_flows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mch/phase_plane.hpp"
#include "mch/quadrature.hpp"

namespace mch::curve {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// smooth-part integral over (0, r], split at kinks and atom locations
double smooth_integral(const CurvatureData& curv, double r) {
    if (r <= 0.0) return 0.0;
    std::vector<double> cuts{0.0};
    for (double b : curv.smooth_breaks)
        if (b > 0.0 && b < r) cuts.push_back(b);
    for (const auto& a : curv.atoms)
        if (a.s > 0.0 && a.s < r) cuts.push_back(a.s);
    cuts.push_back(r);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] - cuts[i] <= 1e-14) continue;
        total += quad::integrate(curv.smooth, cuts[i], cuts[i + 1], 1e-12,
                                 1e-14, 2000);
    }
    return total;
}

double theta_base(const CurvatureData& curv, double r) {
    double th = smooth_integral(curv, r);
    for (const auto& a : curv.atoms)
        if (a.s <= r) th += a.jump;
    return th;
}
} // namespace

double angle_function(const CurvatureData& curv, double s) {
    if (s < 0.0) throw DomainError("angle_function: s < 0");
    const double T = curv.period;
    if (!(T > 0.0)) throw DomainError("angle_function: nonpositive period");
    double q = std::floor(s / T);
    double r = s - q * T;
    if (r == 0.0 && q > 0.0) { // theta(nT) = n theta(T) includes the atom at T
        q -= 1.0;
        r = T;
    }
    const double thT = theta_base(curv, T);
    return q * thT + theta_base(curv, r);
}

double PlanarPolyline::length() const {
    double L = 0.0;
    for (std::size_t i = 0; i + 1 < vertices.size(); ++i)
        L += std::hypot(vertices[i + 1][0] - vertices[i][0],
                        vertices[i + 1][1] - vertices[i][1]);
    return L;
}

double PlanarPolyline::signed_area() const {
    double A = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = vertices[i];
        const auto& b = vertices[(i + 1) % n];
        A += a[0] * b[1] - b[0] * a[1];
    }
    return 0.5 * A;
}

PlanarPolyline reconstruct_curve(const CurvatureData& curv, int n_periods,
                                 int resolution) {
    if (n_periods < 1) throw DomainError("reconstruct_curve: n_periods < 1");
    if (resolution < 16)
        throw DomainError("reconstruct_curve: resolution < 16");
    const double T = curv.period;

    // piece boundaries within one period
    std::vector<double> bounds{0.0, T};
    for (double b : curv.smooth_breaks)
        if (b > 0.0 && b < T) bounds.push_back(b);
    for (const auto& a : curv.atoms)
        if (a.s > 0.0 && a.s < T) bounds.push_back(a.s);
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

    PlanarPolyline poly;
    poly.vertices.push_back({0.0, 0.0});
    poly.s.push_back(0.0);
    double x = 0.0, y = 0.0;
    for (int per = 0; per < n_periods; ++per) {
        const double off = per * T;
        for (std::size_t p = 0; p + 1 < bounds.size(); ++p) {
            const double a = off + bounds[p], b = off + bounds[p + 1];
            for (int i = 0; i < resolution; ++i) {
                const double sa = a + (b - a) * i / resolution;
                const double sb = a + (b - a) * (i + 1) / resolution;
                x += quad::gl5(
                    [&](double s) { return std::cos(angle_function(curv, s)); },
                    sa, sb);
                y += quad::gl5(
                    [&](double s) { return std::sin(angle_function(curv, s)); },
                    sa, sb);
                poly.vertices.push_back({x, y});
                poly.s.push_back(sb);
            }
        }
    }
    const double gap = std::hypot(x, y);
    poly.closed = gap <= 1e-6 * std::max(1.0, poly.length());
    return poly;
}

namespace {
// best rational p/q ~ x with q <= q_max by continued fractions
bool rational_approx(double x, int q_max, double tol, long& p, long& q) {
    long p0 = 1, q0 = 0; // h_{-1}/k_{-1}
    long p1 = (long)std::floor(x), q1 = 1;
    double frac = x - std::floor(x);
    for (int iter = 0; iter < 64; ++iter) {
        if (std::fabs(x - (double)p1 / (double)q1) <= tol) {
            p = p1;
            q = q1;
            return true;
        }
        if (frac < 1e-15) break;
        const double inv = 1.0 / frac;
        const long a = (long)std::floor(inv);
        frac = inv - std::floor(inv);
        const long p2 = a * p1 + p0, q2 = a * q1 + q0;
        if (q2 > q_max) break;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    }
    if (std::fabs(x - (double)p1 / (double)q1) <= tol) {
        p = p1;
        q = q1;
        return true;
    }
    return false;
}
} // namespace

ClosureReport closure_check(const CurvatureData& curv) {
    ClosureReport rep;
    rep.theta_T = angle_function(curv, curv.period);
    const double x = rep.theta_T / kTwoPi;
    long p = 0, q = 1;
    if (!rational_approx(x, 64, 1e-9, p, q)) return rep; // irrational: open
    if (q == 1) {
        // full turns: the rational criterion is silent, so probe numerically
        rep.inconclusive = true;
        rep.m = (int)p;
        rep.n = 1;
        const PlanarPolyline probe = reconstruct_curve(curv, 1, 128);
        rep.closed = probe.closed;
        rep.total_length = curv.period;
        return rep;
    }
    rep.closed = true;
    rep.m = (int)p;
    rep.n = (int)q;
    rep.total_length = q * curv.period;
    return rep;
}

double gauss_bonnet(const CurvatureData& curv, int n) {
    return n * angle_function(curv, curv.period);
}

double theta_total(const ModelParams& params, double h, double* cross_check) {
    if (params.k != 1.0)
        throw DomainError("theta_total: requires k = 1");
    const auto hits = phase::intersect_hyperbola(params, h,
                                                 phase::BranchSign::Plus,
                                                 phase::Hyperbola::Patch);
    if (hits.size() < 2)
        throw NoIntersectionError("theta_total: arc endpoints not found");
    const double phi1 = hits.front().point.phi;
    const double phi2 = hits.back().point.phi;
    auto v_of = [&](double phi) {
        return std::sqrt(std::max(
            0.0, phase::branch_value(params, h, phase::BranchSign::Plus, phi)));
    };
    const double main =
        2.0 * quad::integrate([&](double phi) { return phi / v_of(phi); },
                              phi1, phi2, 1e-11, 1e-13, 8000);
    if (cross_check) {
        const double c = params.c, g = params.g;
        const double v1 = std::sqrt(std::max(0.0, 3.0 * (phi1 * phi1 - c)));
        const double v2 = std::sqrt(std::max(0.0, 3.0 * (phi2 * phi2 - c)));
        const double smooth = quad::integrate(
            [&](double phi) {
                const double v = v_of(phi);
                return (2.0 * phi - g) / ((c - phi * phi + v * v) * v);
            },
            phi1, phi2, 1e-11, 1e-13, 8000);
        *cross_check = 2.0 * (smooth + v2 - v1);
    }
    return main;
}

CurvatureData profile_to_curvature(const wave::WaveProfile& profile) {
    if (!std::isfinite(profile.period) || profile.period <= 0.0)
        throw DomainError("profile_to_curvature: finite period required");
    const ModelParams p = profile.params;
    const double T = profile.period;

    auto kappa_at = [p, profile](double s) -> double {
        const PhasePoint pt = profile.eval(s);
        const double den = p.c - pt.phi * pt.phi + pt.v * pt.v;
        const double num = 2.0 * p.k * pt.phi - p.g;
        const double scale = 1.0 + p.c * p.c + pt.phi * pt.phi + pt.v * pt.v;
        if (std::fabs(den) < 1e-8 * scale) {
            if (std::fabs(num) >= 1e-8 * (1.0 + std::fabs(p.g)))
                throw DomainError(
                    "profile_to_curvature: profile touches the jump hyperbola");
            // removable point: average the two nearby one-sided values
            const double d = 1e-6 * profile.period;
            auto side = [&](double ss) {
                const PhasePoint q = profile.eval(ss);
                return (2.0 * p.k * q.phi - p.g) /
                       (p.c - q.phi * q.phi + q.v * q.v);
            };
            return 0.5 * (side(s - d) + side(s + d));
        }
        return num / den;
    };

    CurvatureData curv;
    curv.period = T;
    curv.smooth = kappa_at;
    for (const auto& j : profile.joints) {
        double s = j.xi - profile.xi_min;
        s -= T * std::floor(s / T);
        if (s == 0.0) s = T; // atoms live on (0, T]
        curv.atoms.push_back({s, j.v_left - j.v_right});
        curv.smooth_breaks.push_back(s < T ? s : 0.0);
    }
    curv.smooth_breaks.erase(
        std::remove(curv.smooth_breaks.begin(), curv.smooth_breaks.end(), 0.0),
        curv.smooth_breaks.end());
    std::sort(curv.atoms.begin(), curv.atoms.end(),
              [](const CurvatureData::Atom& a, const CurvatureData::Atom& b) {
                  return a.s < b.s;
              });
    return curv;
}

FlowLaw mch_flow_law() {
    FlowLaw law;
    law.a = [](double u, double us, double, double) {
        return -(u * u - us * us) - 2.0;
    };
    law.b = [](double, double us, double, double) { return -2.0 * us; };
    return law;
}

FlowLaw mkdv_flow_law() {
    FlowLaw law;
    law.a = [](double, double, double kappa, double) {
        return 0.5 * kappa * kappa;
    };
    law.b = [](double, double, double, double kappa_s) { return kappa_s; };
    return law;
}

FlowLaw tangential_flow_law(double a0) {
    FlowLaw law;
    law.a = [a0](double, double, double, double) { return a0; };
    law.b = [](double, double, double, double) { return 0.0; };
    return law;
}

namespace {

using Vec2 = std::array<double, 2>;

// periodic vertex ring without the duplicated closing vertex
struct Ring {
    std::vector<Vec2> r;
    std::size_t n() const { return r.size(); }
    const Vec2& at(long i) const {
        const long nn = (long)r.size();
        return r[(std::size_t)(((i % nn) + nn) % nn)];
    }
};

double seg_len(const Vec2& a, const Vec2& b) {
    return std::hypot(b[0] - a[0], b[1] - a[1]);
}

// signed three-point circumcircle curvature (positive counterclockwise)
double circum_curvature(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double ux = b[0] - a[0], uy = b[1] - a[1];
    const double vx = c[0] - b[0], vy = c[1] - b[1];
    const double cross = ux * vy - uy * vx;
    const double la = std::hypot(ux, uy), lb = std::hypot(vx, vy);
    const double lc = std::hypot(c[0] - a[0], c[1] - a[1]);
    if (la * lb * lc == 0.0) return 0.0;
    return 2.0 * cross / (la * lb * lc);
}

// cyclic tridiagonal solve (Sherman-Morrison over the Thomas algorithm)
std::vector<double> solve_cyclic_tridiag(std::vector<double> a,
                                         std::vector<double> b,
                                         std::vector<double> c,
                                         std::vector<double> rhs) {
    const std::size_t n = b.size();
    if (n < 3) throw DomainError("cyclic tridiagonal: n < 3");
    const double alpha = c[n - 1], beta = a[0];
    const double gamma = -b[0];
    b[0] -= gamma;
    b[n - 1] -= alpha * beta / gamma;
    auto thomas = [&](std::vector<double> d) {
        std::vector<double> cp(n), dp(n);
        cp[0] = c[0] / b[0];
        dp[0] = d[0] / b[0];
        for (std::size_t i = 1; i < n; ++i) {
            const double m = b[i] - a[i] * cp[i - 1];
            cp[i] = c[i] / m;
            dp[i] = (d[i] - a[i] * dp[i - 1]) / m;
        }
        for (std::size_t i = n - 1; i-- > 0;) dp[i] -= cp[i] * dp[i + 1];
        return dp;
    };
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = alpha;
    const std::vector<double> y = thomas(rhs);
    const std::vector<double> z = thomas(u);
    const double fact =
        (y[0] + beta * y[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] - fact * z[i];
    return x;
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1,
                        const Vec2& q2) {
    auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
        const double v = (b[0] - a[0]) * (c[1] - a[1]) -
                         (b[1] - a[1]) * (c[0] - a[0]);
        return (v > 0.0) - (v < 0.0);
    };
    const int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
    const int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
    return o1 != o2 && o3 != o4;
}

bool ring_self_intersects(const Ring& ring) {
    const std::size_t n = ring.n();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue; // adjacent through the wrap
            if (segments_intersect(ring.at((long)i), ring.at((long)i + 1),
                                   ring.at((long)j), ring.at((long)j + 1)))
                return true;
        }
    }
    return false;
}

} // namespace

CurveTrajectory evolve_closed_curve(
    const PlanarPolyline& poly, const FlowLaw& law,
    const std::function<std::pair<double, double>(double)>& u_profile,
    double dt, int n_steps, CurveEvolveOptions opt) {
    if (!law.a || !law.b) throw DomainError("evolve_closed_curve: missing law");
    if (poly.vertices.size() < 4)
        throw DomainError("evolve_closed_curve: too few vertices");
    if (!(dt > 0.0) || n_steps < 1)
        throw DomainError("evolve_closed_curve: bad step parameters");

    Ring ring;
    ring.r.assign(poly.vertices.begin(), poly.vertices.end());
    // drop a duplicated closing vertex
    if (seg_len(ring.r.front(), ring.r.back()) <=
        1e-9 * std::max(1.0, poly.length()))
        ring.r.pop_back();
    const std::size_t n = ring.n();
    if (n < 4) throw DomainError("evolve_closed_curve: too few vertices");

    std::vector<double> labels(n);
    for (std::size_t i = 0; i < n; ++i)
        labels[i] = i < poly.s.size() ? poly.s[i] : (double)i;

    CurveTrajectory traj;
    std::vector<double> kappa_prev;

    auto ring_length = [&]() {
        double L = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            L += seg_len(ring.at((long)i), ring.at((long)i + 1));
        return L;
    };
    auto ring_area = [&]() {
        double A = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& a = ring.at((long)i);
            const Vec2& b = ring.at((long)i + 1);
            A += a[0] * b[1] - b[0] * a[1];
        }
        return 0.5 * A;
    };
    const double closing_label =
        poly.s.size() == n + 1
            ? poly.s[n]
            : labels.back() + seg_len(ring.r.back(), ring.r.front());
    auto snapshot = [&](double t) {
        traj.t.push_back(t);
        traj.length.push_back(ring_length());
        traj.area.push_back(ring_area());
        if (opt.store_frames) {
            PlanarPolyline f;
            f.vertices = ring.r;
            f.vertices.push_back(ring.r.front());
            f.s = labels;
            f.s.push_back(closing_label);
            f.closed = true;
            traj.frames.push_back(std::move(f));
        }
    };

    snapshot(0.0);

    for (int step = 0; step < n_steps; ++step) {
        std::vector<double> ds(n), kappa(n);
        for (std::size_t i = 0; i < n; ++i) {
            ds[i] = 0.5 * (seg_len(ring.at((long)i - 1), ring.at((long)i)) +
                           seg_len(ring.at((long)i), ring.at((long)i + 1)));
            kappa[i] = circum_curvature(ring.at((long)i - 1), ring.at((long)i),
                                        ring.at((long)i + 1));
        }
        auto dd = [&](const std::vector<double>& f, std::size_t i) {
            const double h2 = ds[(i + 1) % n] + ds[i];
            return (f[(i + 1) % n] - f[(i + n - 1) % n]) / h2;
        };

        std::vector<double> u(n, 0.0), us(n, 0.0);
        if (opt.self_consistent_u) {
            // u - u_ss = kappa on the periodic ring (3-point Laplacian)
            std::vector<double> lo(n), di(n), up(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double hm = seg_len(ring.at((long)i - 1), ring.at((long)i));
                const double hp = seg_len(ring.at((long)i), ring.at((long)i + 1));
                const double hc = 0.5 * (hm + hp);
                lo[i] = -1.0 / (hm * hc);
                up[i] = -1.0 / (hp * hc);
                di[i] = 1.0 - lo[i] - up[i];
            }
            u = solve_cyclic_tridiag(lo, di, up, kappa);
            for (std::size_t i = 0; i < n; ++i) us[i] = dd(u, i);
        } else if (u_profile) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto [uu, uus] = u_profile(labels[i]);
                u[i] = uu;
                us[i] = uus;
            }
        }

        std::vector<double> a(n), b(n), ks(n);
        for (std::size_t i = 0; i < n; ++i) ks[i] = dd(kappa, i);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = law.a(u[i], us[i], kappa[i], ks[i]);
            b[i] = law.b(u[i], us[i], kappa[i], ks[i]);
        }

        double int_b = 0.0;
        for (std::size_t i = 0; i < n; ++i) int_b += b[i] * ds[i];
        traj.minus_int_b_ds.push_back(-int_b);

        // curvature-evolution residual kappa_t - b_ss - (kappa a)_s
        if (!kappa_prev.empty()) {
            std::vector<double> bss(n), ka(n);
            for (std::size_t i = 0; i < n; ++i) ka[i] = kappa[i] * a[i];
            double rms = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double hm = seg_len(ring.at((long)i - 1), ring.at((long)i));
                const double hp = seg_len(ring.at((long)i), ring.at((long)i + 1));
                const double hc = 0.5 * (hm + hp);
                bss[i] = (b[(i + 1) % n] - b[i]) / (hp * hc) -
                         (b[i] - b[(i + n - 1) % n]) / (hm * hc);
                const double kt = (kappa[i] - kappa_prev[i]) / dt;
                const double res = kt - bss[i] - dd(ka, i);
                rms += res * res;
            }
            traj.curvature_residual.push_back(std::sqrt(rms / n));
        } else {
            traj.curvature_residual.push_back(0.0);
        }
        kappa_prev = kappa;

        // explicit Euler step r += dt (a tau + b n), n = left normal
        std::vector<Vec2> next(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& pm = ring.at((long)i - 1);
            const Vec2& pp = ring.at((long)i + 1);
            double tx = pp[0] - pm[0], ty = pp[1] - pm[1];
            const double tn = std::hypot(tx, ty);
            if (tn == 0.0) throw StepError("evolve_closed_curve: degenerate vertex");
            tx /= tn;
            ty /= tn;
            const double nx = -ty, ny = tx;
            next[i] = {ring.r[i][0] + dt * (a[i] * tx + b[i] * nx),
                       ring.r[i][1] + dt * (a[i] * ty + b[i] * ny)};
        }
        ring.r = std::move(next);
        if (opt.check_self_intersection && ring_self_intersects(ring))
            throw StepError("evolve_closed_curve: discrete curve self-intersects");
        snapshot((step + 1) * dt);
    }
    return traj;
}

double elastic_energy(const PlanarPolyline& poly, const std::vector<double>& xi,
                      const std::vector<double>& a_values) {
    const std::size_t n = poly.vertices.size();
    if (xi.size() != n || a_values.size() != n)
        throw DomainError("elastic_energy: size mismatch");
    for (double a : a_values)
        if (std::fabs(a) < 1e-12)
            throw DivisionError("elastic_energy: a vanishes");
    double e = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double dxi = xi[i + 1] - xi[i];
        if (!(dxi > 0.0))
            throw DomainError("elastic_energy: xi not increasing");
        const double chi = std::hypot(poly.vertices[i + 1][0] - poly.vertices[i][0],
                                      poly.vertices[i + 1][1] - poly.vertices[i][1]) /
                           dxi;
        const double a_mid = 0.5 * (a_values[i] + a_values[i + 1]);
        e += (chi - 1.0) / a_mid * dxi;
    }
    return e;
}

} // namespace mch::curve
