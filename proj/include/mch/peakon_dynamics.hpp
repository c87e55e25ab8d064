#pragma once

#include <utility>
#include <vector>

#include "mch/errors.hpp"
#include "mch/params.hpp"

namespace mch::peakon {

// Kernel of (1 - d_xx)^{-1}: exponential on the line, hyperbolic cosine on
// the circle of circumference ell.  value plus one-sided derivatives.
struct GValue {
    double g;
    double dleft;  // derivative limit from x^-
    double dright; // derivative limit from x^+
};

GValue fundamental_solution(double ell, double x);

// Closed-form single-peakon speed; NoPeakonError for k > 0.
double single_peakon_speed(double ell, double k, double p);

enum class Model { mCH, CH };

struct PeakonEnsemble {
    Model model = Model::mCH;
    double ell = kInfiniteEll;
    double k = 0.0; // mCH only; must be <= 0
    std::vector<double> positions;  // strictly increasing
    std::vector<double> amplitudes; // nonzero

    std::size_t size() const { return positions.size(); }
    void validate() const;
};

// dx_i/dt for the mCH ensemble (amplitudes are constants of motion).
std::vector<double> mch_rhs(const PeakonEnsemble& e);

// (dx_i/dt, dp_i/dt) for the CH ensemble; sgn(0) = 0 convention.
std::pair<std::vector<double>, std::vector<double>> ch_rhs(const PeakonEnsemble& e);

// Candidate conserved quantity 1/2 sum_ij p_i p_j G(x_i - x_j): the CH
// Hamiltonian; logged as a diagnostic for mCH without any conservation claim.
double h0_quadratic(const PeakonEnsemble& e);

struct EvolveOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double record_dt = 0.0;    // 0: record every accepted step
    bool symplectic = false;   // fixed-step implicit midpoint (CH only)
    double fixed_dt = 1e-3;
    double collision_eps_factor = 1e-8; // eps = factor * max(1, |x| scale)
};

struct Trajectory {
    std::vector<double> t;
    std::vector<std::vector<double>> x; // t-major
    std::vector<std::vector<double>> p;
    std::vector<double> h0;
    bool collided = false;
    double collision_time = 0.0;
    std::pair<int, int> collision_pair{-1, -1};
};

Trajectory evolve(const PeakonEnsemble& e, double t_end, EvolveOptions opt = {});

struct HamiltonianReport {
    double h0;
    double h1;
};

// H0 = int (u^2 + u_x^2), H1 = 1/4 int (u^4 + 2u^2 u_x^2 - u_x^4/3 + 4k u^2)
// on one period from uniform samples (trapezoid; u_x by 4th-order stencils).
HamiltonianReport hamiltonians(const std::vector<double>& u_samples, double ell,
                               double k);

} // namespace mch::peakon
