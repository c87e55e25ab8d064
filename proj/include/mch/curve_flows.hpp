#pragma once

#include <array>
#include <functional>
#include <vector>

#include "mch/errors.hpp"
#include "mch/params.hpp"
#include "mch/wave_builder.hpp"

namespace mch::curve {

// Periodic distributional curvature: a smooth density on (0, T) plus angle
// atoms at isolated points of (0, T].
struct CurvatureData {
    double period = 1.0;
    std::function<double(double)> smooth; // kappa(s), s in (0, T)
    std::vector<double> smooth_breaks;    // interior kinks of the smooth part
    struct Atom {
        double s;    // in (0, T]
        double jump; // delta-theta
    };
    std::vector<Atom> atoms;
};

// theta(s) = integral of the smooth part over (0, s] plus the atoms at
// locations <= s, extended by theta(s + T) = theta(s) + theta(T).
// Right-continuous with left limits.
double angle_function(const CurvatureData& curv, double s);

struct PlanarPolyline {
    std::vector<std::array<double, 2>> vertices;
    std::vector<double> s; // arclength parameter at each vertex
    bool closed = false;
    int m = 0, n = 0; // rotation fraction theta(T)/2pi = m/n when known

    double length() const;
    double signed_area() const; // shoelace
};

// Unit-speed integration of (cos theta, sin theta); vertices land exactly on
// every atom location and smooth-part kink.  resolution = samples per smooth
// piece (>= 16).
PlanarPolyline reconstruct_curve(const CurvatureData& curv, int n_periods,
                                 int resolution = 64);

struct ClosureReport {
    bool closed = false;
    bool inconclusive = false; // theta(T) in 2*pi*Z: criterion silent
    int m = 0, n = 0;
    double total_length = 0.0;
    double theta_T = 0.0;
};

// Rational-closure test: theta(T)/2pi ~ m/n (denominator <= 64, tol 1e-9,
// continued fractions).  Proper fractions close after n periods; integers are
// inconclusive and fall back to a numerical endpoint test.
ClosureReport closure_check(const CurvatureData& curv);

// Total curvature over n periods: n * theta(T).
double gauss_bonnet(const CurvatureData& curv, int n);

// Total turning angle over one period of the patched profile at level h,
// via 2 * int phi / v dphi over the upper arc between the gluing-hyperbola
// intersections.  *cross_check receives the equivalent expression
// 2 * (int (2 phi - g) / ((c - phi^2 + v^2) v) dphi + v2 - v1).
// Requires k = 1 and h above find_h0.
double theta_total(const ModelParams& params, double h,
                   double* cross_check = nullptr);

// kappa = phi - phi'' from the traveling-wave ODE in closed form,
// (2 k phi - g) / (c - phi^2 + v^2), plus one atom per joint with
// jump = v_left - v_right.  DomainError where the denominator degenerates
// away from a removable point.
CurvatureData profile_to_curvature(const wave::WaveProfile& profile);

// Normal/tangential velocity law a, b as functions of (u, u_s, kappa,
// kappa_s) along the curve.
struct FlowLaw {
    std::function<double(double, double, double, double)> a;
    std::function<double(double, double, double, double)> b;
};

FlowLaw mch_flow_law();          // a = -(u^2 - u_s^2) - 2, b = -2 u_s
FlowLaw mkdv_flow_law();         // a = kappa^2 / 2,        b = kappa_s
FlowLaw tangential_flow_law(double a0); // a = a0, b = 0

struct CurveEvolveOptions {
    // when set, u is recomputed from the discrete curvature each step by
    // solving the periodic Helmholtz problem u - u_ss = kappa
    bool self_consistent_u = false;
    bool store_frames = true;
    bool check_self_intersection = true;
};

struct CurveTrajectory {
    std::vector<PlanarPolyline> frames; // step 0 .. n_steps if stored
    std::vector<double> t;
    std::vector<double> length;
    std::vector<double> area;
    std::vector<double> minus_int_b_ds;      // predicted dA/dt
    std::vector<double> curvature_residual;  // rms of kappa_t - b_ss - (kappa a)_s
};

// Explicit Euler stepping r += dt (a tau + b n) on a closed polyline.
// u_profile supplies (u, u_s) at the Lagrangian vertex label s (may be empty
// with self_consistent_u or laws that ignore u).  StepError on
// self-intersection of the discrete curve.
CurveTrajectory evolve_closed_curve(
    const PlanarPolyline& poly, const FlowLaw& law,
    const std::function<std::pair<double, double>(double)>& u_profile,
    double dt, int n_steps, CurveEvolveOptions opt = {});

// E = int (1/a)(chi - 1) d xi with stretch chi = |r_xi| relative to the
// reference parameter xi attached to the vertices.  DivisionError if any
// |a| < 1e-12.
double elastic_energy(const PlanarPolyline& poly, const std::vector<double>& xi,
                      const std::vector<double>& a_values);

} // namespace mch::curve
