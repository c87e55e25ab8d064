#include "mch/weak_verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mch/peakon_dynamics.hpp"
#include "mch/quadrature.hpp"

namespace mch::weak {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void mollifier_derivs(double s, double out[4]) {
    out[0] = out[1] = out[2] = out[3] = 0.0;
    const double q = 1.0 - s * s;
    if (!(q > 0.0)) return;
    const double w = std::exp(-1.0 / q);
    const double q2 = q * q, q3 = q2 * q, q4 = q3 * q;
    // logarithmic derivatives: L1 = (log w)', etc.
    const double l1 = -2.0 * s / q2;
    const double l2 = -2.0 / q2 - 8.0 * s * s / q3;
    const double l3 = -24.0 * s / q3 - 48.0 * s * s * s / q4;
    out[0] = w;
    out[1] = w * l1;
    out[2] = w * (l1 * l1 + l2);
    out[3] = w * (l1 * l1 * l1 + 3.0 * l1 * l2 + l3);
}

TestField make_bump(double x0, double t0, double rx, double rt) {
    if (!(rx > 0.0) || !(rt > 0.0))
        throw DomainError("make_bump: radii must be positive");
    TestField tf;
    tf.x_lo = x0 - rx;
    tf.x_hi = x0 + rx;
    tf.t_lo = t0 - rt;
    tf.t_hi = t0 + rt;
    tf.eval = [=](double x, double t) {
        TestDerivs d;
        double X[4], T[4];
        mollifier_derivs((x - x0) / rx, X);
        mollifier_derivs((t - t0) / rt, T);
        if (X[0] == 0.0 && X[1] == 0.0 && X[2] == 0.0 && X[3] == 0.0) return d;
        const double ix = 1.0 / rx, ix2 = ix * ix, ix3 = ix2 * ix;
        const double it = 1.0 / rt;
        d.f = X[0] * T[0];
        d.fx = X[1] * T[0] * ix;
        d.fxx = X[2] * T[0] * ix2;
        d.fxxx = X[3] * T[0] * ix3;
        d.ft = X[0] * T[1] * it;
        d.fxxt = X[2] * T[1] * ix2 * it;
        return d;
    };
    // sup of every derivative the weak form touches, on a sampling grid
    double sup = 0.0;
    const int n = 48;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            const TestDerivs d = tf.eval(tf.x_lo + (tf.x_hi - tf.x_lo) * i / n,
                                         tf.t_lo + (tf.t_hi - tf.t_lo) * j / n);
            sup = std::max({sup, std::fabs(d.f), std::fabs(d.fx),
                            std::fabs(d.fxx), std::fabs(d.fxxx),
                            std::fabs(d.ft), std::fabs(d.fxxt)});
        }
    tf.sup_derivs = sup;
    return tf;
}

TestField linear_combination(const std::vector<std::pair<double, TestField>>& terms) {
    if (terms.empty()) throw DomainError("linear_combination: empty");
    TestField tf;
    tf.x_lo = tf.t_lo = kInf;
    tf.x_hi = tf.t_hi = -kInf;
    tf.sup_derivs = 0.0;
    for (const auto& [w, f] : terms) {
        tf.x_lo = std::min(tf.x_lo, f.x_lo);
        tf.x_hi = std::max(tf.x_hi, f.x_hi);
        tf.t_lo = std::min(tf.t_lo, f.t_lo);
        tf.t_hi = std::max(tf.t_hi, f.t_hi);
        tf.sup_derivs += std::fabs(w) * f.sup_derivs;
    }
    tf.eval = [terms](double x, double t) {
        TestDerivs d;
        for (const auto& [w, f] : terms) {
            if (x < f.x_lo || x > f.x_hi || t < f.t_lo || t > f.t_hi) continue;
            const TestDerivs e = f.eval(x, t);
            d.f += w * e.f;
            d.fx += w * e.fx;
            d.fxx += w * e.fxx;
            d.fxxx += w * e.fxxx;
            d.ft += w * e.ft;
            d.fxxt += w * e.fxxt;
        }
        return d;
    };
    return tf;
}

CandidateSolution candidate_from_peakon(double p, double speed, double ell,
                                        double k, double background) {
    CandidateSolution c;
    c.k = k;
    c.ell = ell;
    c.lines.push_back({0.0, speed});
    if (std::isfinite(ell)) c.line_period = ell;
    c.eval = [=](double x, double t) {
        const peakon::GValue g = peakon::fundamental_solution(ell, x - speed * t);
        // off the crest the two one-sided derivatives agree
        return std::make_pair(background + p * g.g, p * g.dright);
    };
    return c;
}

CandidateSolution candidate_from_profile(const wave::WaveProfile& profile,
                                         double speed) {
    CandidateSolution c;
    c.k = profile.params.k;
    c.ell = kInfiniteEll;
    for (const auto& j : profile.joints) c.lines.push_back({j.xi, speed});
    if (std::isfinite(profile.period) && profile.period > 0.0)
        c.line_period = profile.period;
    c.eval = [profile, speed](double x, double t) {
        const PhasePoint pt = profile.eval(x - speed * t);
        return std::make_pair(pt.phi, pt.v);
    };
    return c;
}

namespace {

// Positions of all discontinuity-line images inside [xa, xb] at time t.
std::vector<double> line_cuts(const CandidateSolution& cand, double t,
                              double xa, double xb) {
    std::vector<double> cuts;
    for (const auto& ln : cand.lines) {
        const double base = ln.xi0 + ln.speed * t;
        if (cand.line_period > 0.0) {
            const double per = cand.line_period;
            const double n0 = std::floor((xa - base) / per);
            for (double n = n0; base + n * per <= xb; n += 1.0) {
                const double x = base + n * per;
                if (x >= xa && x <= xb) cuts.push_back(x);
            }
        } else if (base >= xa && base <= xb) {
            cuts.push_back(base);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [&](double a, double b) {
                               return std::fabs(a - b) <= 1e-12 * (1.0 + std::fabs(a));
                           }),
               cuts.end());
    return cuts;
}

} // namespace

double weak_residual(const CandidateSolution& cand, const TestField& test,
                     double t_end, double* scale_out) {
    if (!cand.eval || !test.eval)
        throw DomainError("weak_residual: missing evaluator");
    const double xa = test.x_lo, xb = test.x_hi;
    const double ta = std::max(0.0, test.t_lo);
    const double tb = std::min(t_end, test.t_hi);

    // normalization scale: (1 + sup|u|)^3 * sup|test derivs| * support area
    double sup_u = 0.0;
    {
        const int n = 24;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) {
                const double x = xa + (xb - xa) * i / n;
                const double t = ta + std::max(0.0, tb - ta) * j / n;
                sup_u = std::max(sup_u, std::fabs(cand.eval(x, t).first));
            }
    }
    const double area = (xb - xa) * (test.t_hi - test.t_lo);
    const double scale =
        (1.0 + sup_u) * (1.0 + sup_u) * (1.0 + sup_u) * test.sup_derivs * area;
    if (scale_out) *scale_out = scale;
    if (!(tb > ta) && !(test.t_lo < 0.0 && test.t_hi > 0.0)) return 0.0;

    const double k = cand.k;
    auto integrand = [&](double x, double t) {
        const auto [u, ux] = cand.eval(x, t);
        const TestDerivs d = test.eval(x, t);
        return u * (d.ft - d.fxxt) +
               (2.0 * k * u + u * u * u + u * ux * ux) * d.fx -
               u * u * u * d.fxxx / 3.0 - ux * ux * ux * d.fxx / 3.0;
    };

    const double abs_tol_x = 1e-12 * (scale > 0.0 ? scale : 1.0) / (xb - xa);
    auto slice = [&](double t) {
        std::vector<double> cuts = line_cuts(cand, t, xa, xb);
        cuts.insert(cuts.begin(), xa);
        cuts.push_back(xb);
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            if (cuts[i + 1] - cuts[i] <= 1e-13 * (1.0 + std::fabs(cuts[i])))
                continue;
            s += quad::integrate([&](double x) { return integrand(x, t); },
                                 cuts[i], cuts[i + 1], 1e-10, abs_tol_x, 8000);
        }
        return s;
    };

    double total = 0.0;
    if (tb > ta) {
        const double abs_tol_t =
            1e-11 * (scale > 0.0 ? scale : 1.0);
        total = quad::integrate(slice, ta, tb, 1e-9, abs_tol_t, 8000);
    }

    // initial-data contribution when the support straddles t = 0
    if (test.t_lo < 0.0 && test.t_hi > 0.0) {
        std::vector<double> cuts = line_cuts(cand, 0.0, xa, xb);
        cuts.insert(cuts.begin(), xa);
        cuts.push_back(xb);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            if (cuts[i + 1] - cuts[i] <= 1e-13 * (1.0 + std::fabs(cuts[i])))
                continue;
            total += quad::integrate(
                [&](double x) {
                    const TestDerivs d = test.eval(x, 0.0);
                    return cand.eval(x, 0.0).first * (d.f - d.fxx);
                },
                cuts[i], cuts[i + 1], 1e-10, abs_tol_x, 8000);
        }
    }
    return total;
}

SuiteResult residual_suite(const CandidateSolution& cand, unsigned long long seed,
                           int n_tests, SuiteConfig cfg) {
    if (n_tests < 1) throw DomainError("residual_suite: n_tests < 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(cfg.x_lo, cfg.x_hi);
    std::uniform_real_distribution<double> ut(cfg.t_lo, cfg.t_hi);
    std::uniform_real_distribution<double> urx(cfg.rx_min, cfg.rx_max);
    std::uniform_real_distribution<double> urt(cfg.rt_min, cfg.rt_max);

    SuiteResult res;
    res.seed = seed;
    double t_end = cfg.t_hi + cfg.rt_max + 1.0;

    for (int i = 0; i < n_tests; ++i) {
        double rx = urx(rng);
        const double rt = urt(rng);
        if (cand.line_period > 0.0)
            rx = std::min(rx, 0.49 * cand.line_period);
        double t0 = ut(rng);
        double x0;
        // stratification: alternate bumps cycle through the discontinuity
        // lines so every line is straddled; the rest are fully random
        if (!cand.lines.empty() && i % 2 == 0) {
            const auto& ln = cand.lines[(i / 2) % cand.lines.size()];
            // straddle the line but off-center: a bump centered exactly on it
            // has an antisymmetric line contribution that integrates to zero,
            // and 0.65*rx sits near the slope maximum of the mollifier
            x0 = ln.xi0 + ln.speed * t0 + 0.65 * rx;
            if (cand.line_period > 0.0)
                x0 -= cand.line_period *
                      std::floor((x0 - cfg.x_lo) / cand.line_period) *
                      ((x0 < cfg.x_lo || x0 > cfg.x_hi) ? 1.0 : 0.0);
        } else {
            x0 = ux(rng);
        }
        const TestField tf = make_bump(x0, t0, rx, rt);
        double scale = 0.0;
        const double r = weak_residual(cand, tf, t_end, &scale);
        const double norm = scale > 0.0 ? std::fabs(r) / scale : std::fabs(r);
        res.per_test.push_back({x0, t0, rx, rt, r, scale, norm});
    }
    std::vector<double> norms;
    for (const auto& e : res.per_test) norms.push_back(e.normalized);
    std::sort(norms.begin(), norms.end());
    res.max_normalized = norms.back();
    res.median_normalized = norms[norms.size() / 2];
    return res;
}

} // namespace mch::weak
