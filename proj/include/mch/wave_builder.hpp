#pragma once

#include <variant>
#include <vector>

#include "mch/errors.hpp"
#include "mch/params.hpp"
#include "mch/phase_plane.hpp"

namespace mch::wave {

enum class HalfPlane { Upper, Lower };
enum class Orientation { IncreasingPhi, DecreasingPhi };

// One branch-restricted arc of a level set H = h, represented as the graph
// v = +-sqrt(branch_value) over phi_interval.
struct LevelArc {
    ModelParams params;
    double h = 0.0;
    phase::BranchSign sign = phase::BranchSign::Plus;
    double phi_lo = 0.0;
    double phi_hi = 0.0;
    HalfPlane half = HalfPlane::Upper;
    Orientation orient = Orientation::IncreasingPhi;
};

// Checks domain membership and rejects arcs through (phi0, 0) with
// phi0^2 = c (excluded configuration; behavior there is undefined upstream).
void validate_arc(const LevelArc& arc);

// xi-time of the arc: integral of dphi/v with singularity-aware quadrature.
// An arc whose two endpoints both cross v=0 transversally closes into a loop
// by mirror symmetry; in that case the full loop time (2x the graph time) is
// returned.  Saddle-terminated arcs return +infinity.
// Throws SingularArcError if an interior critical point lies on the arc.
double period(const LevelArc& arc);

struct ProfileSegment {
    std::vector<double> xi, phi, v;
};

struct PeakonJoint {
    double xi;
    double phi;
    double v_left;
    double v_right;
};

enum class ProfileKind { SmoothPeriodic, PatchedPeriodic, Unbounded, CompactSupportComposite };

struct WaveProfile {
    ModelParams params;
    double h = 0.0;
    std::vector<ProfileSegment> segments; // ordered, contiguous in xi
    std::vector<PeakonJoint> joints;
    double period = 0.0; // +infinity for saddle-terminated pulses
    ProfileKind kind = ProfileKind::SmoothPeriodic;
    bool g_flipped = false; // built from the g<0 mirror normalization
    double xi_min = 0.0, xi_max = 0.0;

    // (phi, v) at xi; periodic wrap when the period is finite, clamped to the
    // sampled window otherwise.  Cubic Hermite on the dense samples with the
    // exact nodal slopes.
    PhasePoint eval(double xi) const;
};

// Solution that folds back over x: single-valued graphs over signed
// xi-intervals (a_n, b_n) with endpoint continuity.
struct MultiValuedProfile {
    struct Branch {
        double a = 0.0, b = 0.0; // signed interval; sgn = sgn(b - a)
        phase::BranchSign sign = phase::BranchSign::Plus;
        std::vector<double> xi, phi, v;
    };
    ModelParams params;
    double h = 0.0;
    std::vector<Branch> branches;
    double period = 0.0; // signed loop time when the path closes
    // per-fold continuity data: (phi, v, A_left, A_right) with A = g - 2k phi
    struct FoldCheck {
        double phi, v, a_left, a_right;
    };
    std::vector<FoldCheck> folds;
};

using TraceResult = std::variant<WaveProfile, MultiValuedProfile>;

// Accumulates xi = integral dphi/v along the arc starting at xi0; follows the
// level curve across folds (phi^2 - v^2 = c with v != 0) onto the other
// branch, across transversal v=0 crossings into the lower half plane, and
// stops at saddles or at the sampling truncation radius.
TraceResult trace_profile(const LevelArc& arc, double xi0 = 0.0,
                          int samples_per_segment = 2048);

// Threshold h0 such that for every h > h0 the Plus branch is a single
// positive graph whose patch-hyperbola intersections bracket a valid arc
// (constructive conditions checked numerically, located by bisection in h).
double find_h0(const ModelParams& params);

struct PatchOptions {
    int joint_index = -1;    // -1: auto-select the unit holding the v-maximum
    int samples = 2048;      // per segment
    double xi_window = 20.0; // half-window for saddle-terminated pulses
};

// Patching construction: upper arc between the selected endpoints (patch
// hyperbola intersections and/or v=0 crossings), glued to its mirrored lower
// arc by vertical chords (peakon joints).  Joints satisfy the kinematic jump
// condition exactly by construction.
WaveProfile build_patched_solution(const ModelParams& params, double h,
                                   PatchOptions opt = {});

struct JointReport {
    double xi;
    double residual1; // |c - (phi^2 - (vl^2 + vl vr + vr^2)/3)|
    double residual2; // |d/dt(vl - vr) - (A_l - A_r)|
};

std::vector<JointReport> verify_jump_conditions(const WaveProfile& profile);

struct CompositePulse {
    WaveProfile profile; // compactly supported on [0, period], zero background
    double speed = 0.0;
    double offset = 0.0; // left end of the support at t = 0
};

struct CompositeSolution {
    std::vector<CompositePulse> pulses; // sorted by offset
    double touch_time = 0.0;            // +infinity if supports never meet

    // u(x, t); valid for 0 <= t < touch_time
    double eval(double x, double t) const;
};

CompositeSolution compose_compact_peakons(std::vector<CompositePulse> pulses);

} // namespace mch::wave
