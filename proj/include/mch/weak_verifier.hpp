#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "mch/errors.hpp"
#include "mch/params.hpp"
#include "mch/wave_builder.hpp"

namespace mch::weak {

// All derivatives of the test function the weak form needs.
struct TestDerivs {
    double f = 0, fx = 0, fxx = 0, fxxx = 0, ft = 0, fxxt = 0;
};

// Smooth compactly supported space-time test function (possibly a linear
// combination of bumps) with its support box and derivative magnitude.
struct TestField {
    std::function<TestDerivs(double, double)> eval;
    double x_lo = 0, x_hi = 0, t_lo = 0, t_hi = 0;
    double sup_derivs = 1.0; // max over used derivatives on the support
};

// psi(s) = exp(-1/(1-s^2)) on |s|<1, 0 outside; derivatives to order 3,
// coded analytically.
void mollifier_derivs(double s, double out[4]);

// Product bump psi((x-x0)/rx) * psi((t-t0)/rt).
TestField make_bump(double x0, double t0, double rx, double rt);

TestField linear_combination(const std::vector<std::pair<double, TestField>>& terms);

struct DiscontinuityLine {
    double xi0 = 0.0;  // x-intercept at t = 0
    double speed = 0.0;
};

struct CandidateSolution {
    // (u, u_x) at (x, t); u_x may be either one-sided limit on a line
    std::function<std::pair<double, double>(double, double)> eval;
    std::vector<DiscontinuityLine> lines;
    double line_period = 0.0; // spacing of periodic line images (0 = none)
    double k = 0.0;
    double ell = kInfiniteEll;
};

// u(x,t) = p G(x - speed t) + background on the line or circle.
CandidateSolution candidate_from_peakon(double p, double speed, double ell,
                                        double k = 0.0, double background = 0.0);

// Traveling candidate u(x,t) = phi(x - speed t) from a built profile.
CandidateSolution candidate_from_profile(const wave::WaveProfile& profile,
                                         double speed);

// Weak-form functional of Definition-style L(u, phi) plus initial-data terms
// when the support overlaps t=0.  2D quadrature never crosses a
// discontinuity line.  Raw value returned; the normalization scale
// (1+sup|u|)^3 * sup|phi derivs| * support area goes to *scale_out.
double weak_residual(const CandidateSolution& cand, const TestField& test,
                     double t_end, double* scale_out = nullptr);

struct SuiteConfig {
    double x_lo = -10, x_hi = 10;
    double t_lo = 1.5, t_hi = 3.5;
    double rx_min = 1.0, rx_max = 4.0;
    double rt_min = 0.4, rt_max = 1.2;
};

struct SuiteResult {
    struct Entry {
        double x0, t0, rx, rt;
        double residual;   // raw
        double scale;
        double normalized; // |residual| / scale
    };
    std::vector<Entry> per_test;
    double max_normalized = 0.0;
    double median_normalized = 0.0;
    unsigned long long seed = 0;
};

// Seeded pseudo-random bumps, stratified so that every discontinuity line is
// straddled by at least one bump.
SuiteResult residual_suite(const CandidateSolution& cand, unsigned long long seed,
                           int n_tests, SuiteConfig cfg = {});

} // namespace mch::weak
