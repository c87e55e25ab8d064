#pragma once

#include <vector>

#include "mch/errors.hpp"
#include "mch/params.hpp"

namespace mch::phase {

// First integral of the traveling-wave system:
//   H(phi, v) = (phi^2 - v^2)^2/4 - c (phi^2 - v^2)/2 + k phi^2 - g phi
double hamiltonian(const ModelParams& p, PhasePoint pt);

// Gradient (H_phi, H_v).
PhasePoint grad_hamiltonian(const ModelParams& p, PhasePoint pt);

struct Hessian {
    double hpp, hpv, hvv; // H_phiphi, H_phiv, H_vv
    double discriminant() const { return hpv * hpv - hpp * hvv; }
    double norm2() const { return hpp * hpp + 2.0 * hpv * hpv + hvv * hvv; }
};

Hessian hessian(const ModelParams& p, PhasePoint pt);

enum class CritKind { Center, Saddle, Degenerate };

struct CriticalPoint {
    PhasePoint location;
    CritKind kind;
    bool on_c_hyperbola; // member of the pair (g/2k, +-sqrt(g^2/4k^2 - c))
    double discriminant;
};

// All solutions of grad H = 0: axis roots of -phi^3 - (2k-c)phi + g = 0
// plus, when g^2 - 4k^2 c > 0 and k != 0, the pair on phi^2 - v^2 = c.
// Sorted by (phi, v).
std::vector<CriticalPoint> classify_critical_points(const ModelParams& p);

enum class BranchSign { Plus, Minus };

// Inner radicand c^2 - 4(k phi^2 - g phi - h) of the branch formula.
double inner_radicand(const ModelParams& p, double h, double phi);

// v^2 on the selected branch: phi^2 - c +- sqrt(inner).  DomainError if
// either radicand is negative beyond tolerance (small negatives clamp to 0).
double branch_value(const ModelParams& p, double h, BranchSign sign, double phi);

// Signed branch radicand phi^2 - c +- sqrt(max(inner, 0)), evaluated in a
// rationalized form that avoids the catastrophic cancellation of
// (phi^2 - c) + sqrt(inner) when sqrt(inner) ~ |c|.  Negative values mean the
// point is off the branch.
double outer_value(const ModelParams& p, double h, BranchSign sign, double phi);

struct Interval {
    double lo, hi; // may be +-infinity
    bool contains(double x) const { return x >= lo && x <= hi; }
};

// Maximal phi-intervals on which branch_value is defined.  Analytic: interval
// endpoints are roots of the inner quadratic or of the outer quartic; no
// truncation is applied to unbounded components.
std::vector<Interval> branch_domain(const ModelParams& p, double h, BranchSign sign);

enum class Hyperbola {
    Jump,  // phi^2 - v^2 = c
    Patch, // phi^2 - v^2/3 = c
};

struct HyperbolaIntersection {
    PhasePoint point;  // upper-half representative (v >= 0)
    int multiplicity;  // 1 transversal, 2 tangential touch
};

// All intersections of the selected branch with the selected hyperbola,
// sorted by phi.  Each entry stands for the symmetric pair (phi, +-v).
std::vector<HyperbolaIntersection> intersect_hyperbola(const ModelParams& p,
                                                       double h, BranchSign sign,
                                                       Hyperbola which);

// Dense (phi, v) samples of the upper-half branch for plotting/CSV, with
// unbounded components truncated at |phi| <= phi_max.
struct BranchSample {
    double phi, v;
};
std::vector<BranchSample> sample_branch(const ModelParams& p, double h,
                                        BranchSign sign, int resolution,
                                        double phi_max = 50.0);

} // namespace mch::phase
