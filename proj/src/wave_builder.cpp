#include "mch/wave_builder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mch/quadrature.hpp"
#include "mch/rootfind.hpp"

namespace mch::wave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPhiMax = 50.0; // sampling truncation for unbounded arcs

using phase::BranchSign;

// --- level-set geometry helpers -------------------------------------------

struct Geom {
    ModelParams p;
    double h;
    BranchSign sign;

    double outer(double phi) const { return phase::outer_value(p, h, sign, phi); }
    double v_of(double phi) const { return std::sqrt(std::max(0.0, outer(phi))); }
};

// dv/dxi from the traveling-wave system; c - phi^2 + v^2 = -+sqrt(inner) on
// the two branches.
double dv_dxi(const ModelParams& p, double phi, double v) {
    const double den = p.c - phi * phi + v * v;
    return phi + (p.g - 2.0 * p.k * phi) / den;
}

// Snaps phi to a nearby non-center axis critical point whose level equals h;
// numerically located axis zeros are only sqrt(eps)-accurate, while the
// critical points are known to full precision from the cubic.
bool snap_axis_critical(const ModelParams& p, double h, double& phi) {
    for (const auto& cp : phase::classify_critical_points(p)) {
        if (cp.location.v != 0.0) continue;
        if (cp.kind == phase::CritKind::Center) continue;
        const double scale = 1.0 + std::fabs(cp.location.phi) + std::fabs(phi);
        if (std::fabs(phi - cp.location.phi) > 1e-5 * scale) continue;
        const double hc = phase::hamiltonian(p, cp.location);
        if (std::fabs(hc - h) <=
            1e-8 * (1.0 + std::fabs(h) + cp.location.phi * cp.location.phi)) {
            phi = cp.location.phi;
            return true;
        }
    }
    return false;
}

enum class EndType { Regular, Axis, Saddle, Fold };

struct EndInfo {
    EndType type;
    double v; // branch v at the endpoint
};

EndInfo classify_end(const Geom& g, double phi) {
    const double out = g.outer(phi);
    const double scale = 1.0 + phi * phi + std::fabs(g.p.c);
    const double v_eps = 1e-6 * scale;
    if (out <= v_eps * v_eps) {
        double ph = phi;
        if (snap_axis_critical(g.p, g.h, ph)) return {EndType::Saddle, 0.0};
        return {EndType::Axis, 0.0};
    }
    const double in = phase::inner_radicand(g.p, g.h, phi);
    if (in <= 1e-9 * scale * scale) return {EndType::Fold, std::sqrt(out)};
    return {EndType::Regular, std::sqrt(out)};
}

// Interior zeros of outer() on (a, b): v^2 >= 0 throughout a valid arc, so
// zeros are touch points.  Located as refined local minima that reach 0.
std::vector<double> interior_axis_zeros(const Geom& g, double a, double b) {
    std::vector<double> out;
    const int n = 1 << 10;
    const double hstep = (b - a) / n;
    if (!(hstep > 0.0)) return out;
    std::vector<double> f(n + 1);
    double fmax = 0.0;
    for (int i = 0; i <= n; ++i) {
        f[i] = g.outer(a + i * hstep);
        fmax = std::max(fmax, f[i]);
    }
    for (int i = 1; i < n; ++i) {
        if (f[i] <= f[i - 1] && f[i] <= f[i + 1]) {
            // ternary-search refinement of the local minimum
            double lo = a + (i - 1) * hstep, hi = a + (i + 1) * hstep;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::fabs(lo)); ++it) {
                const double m1 = lo + (hi - lo) / 3.0;
                const double m2 = hi - (hi - lo) / 3.0;
                if (g.outer(m1) < g.outer(m2))
                    hi = m2;
                else
                    lo = m1;
            }
            const double xm = 0.5 * (lo + hi);
            if (g.outer(xm) <= 1e-12 * (1.0 + fmax)) out.push_back(xm);
        }
    }
    return out;
}

// phi on the branch with given v^2, bracketed in [lo, hi] (outer monotone
// there).
double phi_from_v2(const Geom& g, double v2, double lo, double hi) {
    auto f = [&](double phi) { return g.outer(phi) - v2; };
    const double flo = f(lo), fhi = f(hi);
    // rounding can push v2 just outside the attainable range near an axis
    // crossing (outer ~ -1e-15 there); clamp to the closer endpoint
    if ((flo > 0.0) == (fhi > 0.0))
        return std::fabs(flo) <= std::fabs(fhi) ? lo : hi;
    return roots::refine(f, lo, hi);
}

// --- xi quadrature ----------------------------------------------------------
//
// xi-time of the upper-half graph over [a, b].  The integrand 1/v has
// inverse-square-root endpoint singularities at transversal v=0 crossings;
// inside |v| < v_switch the variable is switched to v via
// dxi = dv / (dv/dxi), which is analytic there.

struct GraphPiece {
    double a, b;        // phi interval, outer() > 0 on the interior
    EndInfo ea, eb;     // endpoint classification
};

double v_scale_of(const Geom& g, double a, double b) {
    double m = 0.0;
    for (int i = 0; i <= 64; ++i)
        m = std::max(m, g.v_of(a + (b - a) * i / 64.0));
    return m;
}

// phi at which the graph leaving the axis crossing phi0 toward `dir`
// (+1 right, -1 left) reaches |v| = vs.
double zone_boundary(const Geom& g, double phi0, int dir, double vs) {
    const double span = dir > 0 ? 1.0 : -1.0;
    double step = 1e-8 * (1.0 + std::fabs(phi0));
    double hi = phi0 + span * step;
    for (int it = 0; it < 200 && g.outer(hi) < vs * vs; ++it) {
        step *= 2.0;
        hi = phi0 + span * step;
    }
    return dir > 0 ? phi_from_v2(g, vs * vs, phi0, hi)
                   : phi_from_v2(g, vs * vs, hi, phi0);
}

// time of the sub-arc from the axis crossing at phi0 out to |v| = vs; the
// arc leaves phi0 toward `dir` (+1 right, -1 left).
double axis_zone_time(const Geom& g, double phi0, int dir, double vs,
                      double& phi_boundary) {
    const double phi_vs = zone_boundary(g, phi0, dir, vs);
    phi_boundary = phi_vs;
    // integrate dv / F with phi(v) tracked along the branch
    auto integrand = [&](double v) {
        const double lo = std::min(phi0, phi_vs), hiq = std::max(phi0, phi_vs);
        const double phi = phi_from_v2(g, v * v, lo, hiq);
        const double f = dv_dxi(g.p, phi, v);
        return 1.0 / std::fabs(f);
    };
    return quad::integrate(integrand, 0.0, vs, 1e-12, 1e-15);
}

// xi-time of the graph over [a, b]; endpoints must not be saddles.
double graph_time(const Geom& g, double a, double b, const EndInfo& ea,
                  const EndInfo& eb) {
    const double vscale = v_scale_of(g, a, b);
    const double vs = 0.01 * std::max(vscale, 1e-300);
    double lo = a, hi = b, t = 0.0;
    if (ea.type == EndType::Axis) t += axis_zone_time(g, a, +1, vs, lo);
    if (eb.type == EndType::Axis) t += axis_zone_time(g, b, -1, vs, hi);
    if (hi > lo)
        t += quad::integrate([&](double phi) { return 1.0 / g.v_of(phi); }, lo,
                             hi, 1e-12, 1e-15);
    return t;
}

// --- dense sampling ---------------------------------------------------------

struct ArcSamples {
    std::vector<double> xi, phi, v; // phi strictly increasing, v > 0 interior
};

// small-piece xi increment with a single Kronrod panel, escalated to the
// adaptive rule if its error estimate is not tiny
double piece_time_phi(const Geom& g, double x1, double x2) {
    double err = 0.0;
    auto f = [&](double phi) { return 1.0 / g.v_of(phi); };
    const double val = quad::gk15(f, x1, x2, err);
    if (err <= 1e-12 * (std::fabs(val) + 1e-12)) return val;
    return quad::integrate(f, x1, x2, 1e-12, 1e-15);
}

// Dense samples of the upper graph over [a, b] with endpoint-aware node
// placement.  Saddle endpoints get a geometric tail clipped at xi_window.
ArcSamples sample_graph(const Geom& g, double a, double b, const EndInfo& ea,
                        const EndInfo& eb, int n, double xi_window) {
    ArcSamples s;
    const double vscale = v_scale_of(g, a, b);
    const double vs = 0.01 * std::max(vscale, 1e-300);
    const int nz = std::max(24, n / 16);

    // Parameter plan: [tail | left axis zone | middle | right axis zone | tail]
    std::vector<double> nodes; // phi nodes, increasing
    double mid_lo = a, mid_hi = b;
    std::vector<double> left_zone, right_zone;

    if (ea.type == EndType::Axis) {
        const double boundary = zone_boundary(g, a, +1, vs);
        left_zone.push_back(a);
        for (int j = 1; j <= nz; ++j) {
            const double vj = vs * j / nz;
            left_zone.push_back(phi_from_v2(g, vj * vj, a, boundary));
        }
        mid_lo = boundary;
    } else if (ea.type == EndType::Saddle) {
        mid_lo = zone_boundary(g, a, +1, vs);
    }
    if (eb.type == EndType::Axis) {
        const double boundary = zone_boundary(g, b, -1, vs);
        right_zone.push_back(b);
        for (int j = 1; j <= nz; ++j) {
            const double vj = vs * j / nz;
            right_zone.push_back(phi_from_v2(g, vj * vj, boundary, b));
        }
        std::reverse(right_zone.begin(), right_zone.end());
        mid_hi = boundary;
    } else if (eb.type == EndType::Saddle) {
        mid_hi = zone_boundary(g, b, -1, vs);
    }

    nodes.insert(nodes.end(), left_zone.begin(), left_zone.end());
    const int nm = std::max(16, n - (int)left_zone.size() - (int)right_zone.size());
    for (int i = 0; i <= nm; ++i) {
        const double t = 0.5 * (1.0 - std::cos(M_PI * i / nm));
        const double phi = mid_lo + (mid_hi - mid_lo) * t;
        if (!nodes.empty() && phi <= nodes.back()) continue;
        nodes.push_back(phi);
    }
    for (double phi : right_zone)
        if (phi > nodes.back()) nodes.push_back(phi);

    // geometric saddle tails (xi grows logarithmically toward the saddle)
    std::vector<double> left_tail; // descending toward a
    if (ea.type == EndType::Saddle) {
        double hi = mid_lo, t_acc = 0.0;
        for (int it = 0; it < 8192 && t_acc < xi_window + 1.0; ++it) {
            const double lo2 = a + (hi - a) * 0.95;
            t_acc += piece_time_phi(g, lo2, hi);
            left_tail.push_back(lo2);
            hi = lo2;
        }
        std::reverse(left_tail.begin(), left_tail.end());
        nodes.insert(nodes.begin(), left_tail.begin(), left_tail.end());
    }
    if (eb.type == EndType::Saddle) {
        double lo2 = mid_hi, t_acc = 0.0;
        for (int it = 0; it < 8192 && t_acc < xi_window + 1.0; ++it) {
            const double hi2 = b - (b - lo2) * 0.95;
            t_acc += piece_time_phi(g, lo2, hi2);
            nodes.push_back(hi2);
            lo2 = hi2;
        }
    }

    // accumulate xi across nodes
    s.xi.reserve(nodes.size());
    s.phi.reserve(nodes.size());
    s.v.reserve(nodes.size());
    double xi = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i > 0) {
            const double x1 = nodes[i - 1], x2 = nodes[i];
            const double v1 = g.v_of(x1), v2 = g.v_of(x2);
            if (std::min(v1, v2) < vs && std::max(v1, v2) <= vs * (1.0 + 1e-9)) {
                // inside an axis zone: integrate in v
                auto integrand = [&](double v) {
                    const double phi = phi_from_v2(g, v * v, std::min(x1, x2),
                                                   std::max(x1, x2));
                    return 1.0 / std::fabs(dv_dxi(g.p, phi, v));
                };
                double err = 0.0;
                const double vlo = std::min(v1, v2), vhi = std::max(v1, v2);
                xi += quad::gk15(integrand, vlo, vhi, err);
            } else {
                xi += piece_time_phi(g, x1, x2);
            }
        }
        s.xi.push_back(xi);
        s.phi.push_back(nodes[i]);
        s.v.push_back(g.v_of(nodes[i]));
    }
    // exact endpoint values at axis crossings
    if (ea.type != EndType::Regular && ea.type != EndType::Fold && !left_zone.empty())
        s.v.front() = 0.0;
    if (eb.type != EndType::Regular && eb.type != EndType::Fold && !right_zone.empty())
        s.v.back() = 0.0;
    return s;
}

} // namespace

// --- arc validation and period ---------------------------------------------

void validate_arc(const LevelArc& arc) {
    if (!(arc.phi_hi > arc.phi_lo))
        throw DomainError("validate_arc: empty phi interval");
    Geom g{arc.params, arc.h, arc.sign};
    // excluded configuration: (phi0, 0) with phi0^2 = c on the arc
    if (arc.params.c >= 0.0) {
        const double rc = std::sqrt(arc.params.c);
        for (double phi0 : {rc, -rc}) {
            if (phi0 >= arc.phi_lo && phi0 <= arc.phi_hi &&
                g.outer(phi0) <= 1e-10 * (1.0 + arc.params.c))
                throw DomainError(
                    "validate_arc: arc passes through (phi0, 0) with phi0^2 = c");
        }
    }
    // domain membership at endpoints and a midpoint scan
    for (int i = 0; i <= 32; ++i) {
        const double phi = arc.phi_lo + (arc.phi_hi - arc.phi_lo) * i / 32.0;
        const double in = phase::inner_radicand(arc.params, arc.h, phi);
        const double scale = 1.0 + phi * phi + std::fabs(arc.params.c);
        if (in < -1e-9 * scale * scale)
            throw DomainError("validate_arc: phi interval leaves the branch domain");
    }
}

double period(const LevelArc& arc) {
    validate_arc(arc);
    Geom g{arc.params, arc.h, arc.sign};
    const EndInfo ea = classify_end(g, arc.phi_lo);
    const EndInfo eb = classify_end(g, arc.phi_hi);
    if (ea.type == EndType::Saddle || eb.type == EndType::Saddle) return kInf;

    // split at interior v=0 touch points; a critical touch blocks the arc
    std::vector<double> cuts{arc.phi_lo};
    for (double z : interior_axis_zeros(g, arc.phi_lo, arc.phi_hi)) {
        if (snap_axis_critical(arc.params, arc.h, z))
            throw SingularArcError("period: interior critical point on arc");
        cuts.push_back(z);
    }
    cuts.push_back(arc.phi_hi);

    double t = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const EndInfo ia = (i == 0) ? ea : EndInfo{EndType::Axis, 0.0};
        const EndInfo ib = (i + 2 == cuts.size()) ? eb : EndInfo{EndType::Axis, 0.0};
        t += graph_time(g, cuts[i], cuts[i + 1], ia, ib);
    }
    // axis-to-axis graphs mirror into closed loops
    if (ea.type == EndType::Axis && eb.type == EndType::Axis) t *= 2.0;
    return t;
}

// --- profile evaluation ------------------------------------------------------

PhasePoint WaveProfile::eval(double xi) const {
    if (segments.empty()) return {0.0, 0.0};
    double x = xi;
    if (std::isfinite(period) && period > 0.0) {
        x = xi - period * std::floor((xi - xi_min) / period);
        if (x < xi_min) x += period;
        if (x > xi_max) x = xi_max;
    } else {
        x = std::clamp(x, xi_min, xi_max);
    }
    // locate segment
    const ProfileSegment* seg = &segments.back();
    for (const auto& s : segments) {
        if (x <= s.xi.back() + 1e-14 * (1.0 + std::fabs(s.xi.back()))) {
            seg = &s;
            break;
        }
    }
    const auto& sx = seg->xi;
    auto it = std::upper_bound(sx.begin(), sx.end(), x);
    std::size_t i = (it == sx.begin()) ? 0 : (it - sx.begin() - 1);
    if (i + 1 >= sx.size()) i = sx.size() - 2;
    const double h = sx[i + 1] - sx[i];
    if (h <= 0.0) return {seg->phi[i], seg->v[i]};
    const double t = std::clamp((x - sx[i]) / h, 0.0, 1.0);
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    // phi' = v; v' = dv/dxi from the system
    const double f0 = dv_dxi(params, seg->phi[i], seg->v[i]);
    const double f1 = dv_dxi(params, seg->phi[i + 1], seg->v[i + 1]);
    PhasePoint out;
    out.phi = h00 * seg->phi[i] + h10 * h * seg->v[i] + h01 * seg->phi[i + 1] +
              h11 * h * seg->v[i + 1];
    out.v = h00 * seg->v[i] + h10 * h * f0 + h01 * seg->v[i + 1] + h11 * h * f1;
    return out;
}

// --- tracing -----------------------------------------------------------------

namespace {

// nearest breakpoint of the current graph in the travel direction: axis zero,
// fold (domain edge), saddle, or the sampling radius
struct NextStop {
    double phi;
    EndType type;
};

NextStop next_stop(const Geom& g, double phi_from, int dir) {
    // domain component containing phi_from
    auto domain = phase::branch_domain(g.p, g.h, g.sign);
    const phase::Interval* comp = nullptr;
    for (const auto& d : domain)
        if (phi_from >= d.lo - 1e-9 && phi_from <= d.hi + 1e-9) comp = &d;
    if (!comp) throw DomainError("trace: point left the branch domain");
    double edge = dir > 0 ? comp->hi : comp->lo;
    if (!std::isfinite(edge)) edge = dir > 0 ? kPhiMax : -kPhiMax;
    const double a = std::min(phi_from, edge), b = std::max(phi_from, edge);
    std::vector<double> zeros = interior_axis_zeros(g, a, b);
    double stop = edge;
    if (dir > 0) {
        for (double z : zeros)
            if (z > phi_from + 1e-12) {
                stop = std::min(stop, z);
                break;
            }
    } else {
        for (auto it = zeros.rbegin(); it != zeros.rend(); ++it)
            if (*it < phi_from - 1e-12) {
                stop = std::max(stop, *it);
                break;
            }
    }
    snap_axis_critical(g.p, g.h, stop);
    EndInfo ei = classify_end(g, stop);
    EndType t = ei.type;
    if (stop == edge && std::fabs(stop) >= kPhiMax - 1e-9 && t == EndType::Regular)
        t = EndType::Regular; // truncation stop
    return {stop, t};
}

} // namespace

TraceResult trace_profile(const LevelArc& arc, double xi0, int samples_per_segment) {
    validate_arc(arc);
    MultiValuedProfile mv;
    mv.params = arc.params;
    mv.h = arc.h;

    Geom g{arc.params, arc.h, arc.sign};
    int dir = arc.orient == Orientation::IncreasingPhi ? +1 : -1;
    int vsign = arc.half == HalfPlane::Upper ? +1 : -1;
    double phi_cur = dir > 0 ? arc.phi_lo : arc.phi_hi;
    double phi_goal_first = dir > 0 ? arc.phi_hi : arc.phi_lo;
    double xi = xi0;
    bool all_forward = true;
    bool closed = false;

    const double phi_start = phi_cur;
    const int dir_start = dir, vsign_start = vsign;
    const BranchSign sign_start = g.sign;

    for (int piece = 0; piece < 16; ++piece) {
        // decide the endpoint of this graph piece
        double phi_end;
        EndType end_type;
        if (piece == 0) {
            phi_end = phi_goal_first;
            end_type = classify_end(g, phi_end).type;
        } else {
            NextStop ns = next_stop(g, phi_cur, dir);
            phi_end = ns.phi;
            end_type = ns.type;
        }
        const double a = std::min(phi_cur, phi_end);
        const double b = std::max(phi_cur, phi_end);
        EndInfo ea = classify_end(g, a), eb = classify_end(g, b);
        if (std::fabs(a) >= kPhiMax - 1e-9) ea.type = EndType::Regular;
        if (std::fabs(b) >= kPhiMax - 1e-9) eb.type = EndType::Regular;
        // interior critical points block the trace
        for (double z : interior_axis_zeros(g, a, b))
            if (z > a + 1e-10 && z < b - 1e-10) {
                if (snap_axis_critical(g.p, g.h, z))
                    throw SingularArcError("trace: interior critical point");
                // transversal interior crossing: split implicitly by sampling;
                // only reachable on the first user-specified piece
            }
        ArcSamples s = sample_graph(g, a, b, ea, eb, samples_per_segment, 20.0);

        // signed xi direction of this piece: dxi = dphi / v
        const int xi_dir = dir * vsign;
        MultiValuedProfile::Branch br;
        br.sign = g.sign;
        const std::size_t m = s.xi.size();
        br.xi.resize(m);
        br.phi.resize(m);
        br.v.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            // traverse samples in travel order
            const std::size_t j = dir > 0 ? i : m - 1 - i;
            const double dxi = dir > 0 ? s.xi[j] : s.xi.back() - s.xi[j];
            br.xi[i] = xi + xi_dir * dxi;
            br.phi[i] = s.phi[j];
            br.v[i] = vsign * s.v[j];
        }
        br.a = br.xi.front();
        br.b = br.xi.back();
        xi = br.b;
        if (xi_dir < 0) all_forward = false;
        mv.branches.push_back(std::move(br));
        phi_cur = phi_end;

        if (end_type == EndType::Saddle || end_type == EndType::Regular) break;
        if (end_type == EndType::Fold) {
            mv.folds.push_back({phi_end, vsign * g.v_of(phi_end),
                                g.p.g - 2.0 * g.p.k * phi_end,
                                g.p.g - 2.0 * g.p.k * phi_end});
            g.sign = g.sign == BranchSign::Plus ? BranchSign::Minus : BranchSign::Plus;
            dir = -dir;
        } else { // Axis: cross into the other half plane
            vsign = -vsign;
            dir = -dir;
        }
        if (piece > 0 && std::fabs(phi_cur - phi_start) < 1e-9 * (1.0 + std::fabs(phi_start)) &&
            dir == dir_start && vsign == vsign_start && g.sign == sign_start) {
            closed = true;
            break;
        }
    }
    mv.period = xi - xi0;

    if (all_forward) {
        WaveProfile wp;
        wp.params = arc.params;
        wp.h = arc.h;
        wp.kind = closed ? ProfileKind::SmoothPeriodic : ProfileKind::Unbounded;
        wp.period = closed ? mv.period : kInf;
        for (auto& br : mv.branches) {
            ProfileSegment seg;
            seg.xi = std::move(br.xi);
            seg.phi = std::move(br.phi);
            seg.v = std::move(br.v);
            wp.segments.push_back(std::move(seg));
        }
        wp.xi_min = wp.segments.front().xi.front();
        wp.xi_max = wp.segments.back().xi.back();
        return wp;
    }
    return mv;
}

// --- patching ----------------------------------------------------------------

namespace {

struct Breakpoint {
    double phi;
    EndType type; // Axis, Saddle, or Regular (= patch intersection)
    bool patch;   // true if a patch-hyperbola intersection
};

struct ArcUnit {
    double lo, hi;
    Breakpoint left, right;
    double vmax;
};

std::vector<ArcUnit> patch_units(const ModelParams& p, double h) {
    Geom g{p, h, BranchSign::Plus};
    std::vector<ArcUnit> units;
    for (const auto& dom : phase::branch_domain(p, h, BranchSign::Plus)) {
        const double lo = std::isfinite(dom.lo) ? dom.lo : -kPhiMax;
        const double hi = std::isfinite(dom.hi) ? dom.hi : kPhiMax;
        if (!(hi > lo)) continue;
        std::vector<Breakpoint> brk;
        auto push = [&](Breakpoint bp) {
            for (const auto& q : brk)
                if (std::fabs(q.phi - bp.phi) <= 1e-8 * (1.0 + std::fabs(bp.phi)))
                    return;
            brk.push_back(bp);
        };
        push({lo, classify_end(g, lo).type, false});
        push({hi, classify_end(g, hi).type, false});
        for (double z : interior_axis_zeros(g, lo, hi)) {
            snap_axis_critical(p, h, z);
            push({z, classify_end(g, z).type, false});
        }
        for (const auto& is :
             phase::intersect_hyperbola(p, h, BranchSign::Plus, phase::Hyperbola::Patch))
            if (is.point.phi > lo - 1e-9 && is.point.phi < hi + 1e-9)
                push({std::clamp(is.point.phi, lo, hi), EndType::Regular, true});
        std::sort(brk.begin(), brk.end(),
                  [](const Breakpoint& x, const Breakpoint& y) { return x.phi < y.phi; });
        for (std::size_t i = 0; i + 1 < brk.size(); ++i) {
            ArcUnit u{brk[i].phi, brk[i + 1].phi, brk[i], brk[i + 1], 0.0};
            if (!(u.hi > u.lo)) continue;
            u.vmax = v_scale_of(g, u.lo, u.hi);
            units.push_back(u);
        }
    }
    return units;
}

bool unit_valid(const ArcUnit& u) {
    auto ok = [](const Breakpoint& b) {
        return b.patch || b.type == EndType::Axis || b.type == EndType::Saddle;
    };
    return ok(u.left) && ok(u.right) && (u.left.patch || u.right.patch);
}

// mirror of a profile under phi -> -phi (the g<0 normalization symmetry)
WaveProfile mirror_profile(WaveProfile wp) {
    for (auto& seg : wp.segments) {
        for (auto& x : seg.phi) x = -x;
        for (auto& x : seg.v) x = -x;
    }
    for (auto& j : wp.joints) {
        j.phi = -j.phi;
        j.v_left = -j.v_left;
        j.v_right = -j.v_right;
    }
    wp.params.g = -wp.params.g;
    return wp;
}

ProfileSegment mirrored_lower(const ArcSamples& s, double xi_offset, double t1) {
    // lower arc: phi retraced backward, v negated, xi = xi_offset + (t1 - xi_rev)
    ProfileSegment seg;
    const std::size_t m = s.xi.size();
    seg.xi.resize(m);
    seg.phi.resize(m);
    seg.v.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = m - 1 - i;
        seg.xi[i] = xi_offset + (t1 - s.xi[j]);
        seg.phi[i] = s.phi[j];
        seg.v[i] = -s.v[j];
    }
    return seg;
}

} // namespace

double find_h0(const ModelParams& params_in) {
    bool flipped = false;
    const ModelParams p = params_in.normalized(flipped);

    auto condition = [&](double h) -> bool {
        Geom g{p, h, BranchSign::Plus};
        auto dom = phase::branch_domain(p, h, BranchSign::Plus);
        if (dom.size() != 1) return false;
        const double lo = std::isfinite(dom[0].lo) ? dom[0].lo : -kPhiMax;
        const double hi = std::isfinite(dom[0].hi) ? dom[0].hi : kPhiMax;
        if (p.k < 0.0 &&
            (std::isfinite(dom[0].lo) || std::isfinite(dom[0].hi)))
            return false;
        // f(0) < 0: the branch sits above the patch hyperbola at phi = 0
        if (0.0 > lo && 0.0 < hi) {
            const double f0 = 3.0 * (0.0 - p.c) - g.outer(0.0);
            if (!(f0 < 0.0)) return false;
        }
        // exactly two patch intersections bracketing the arc; below the
        // threshold the left one leaves v^2 >= 0 and vanishes
        auto pts = phase::intersect_hyperbola(p, h, BranchSign::Plus,
                                              phase::Hyperbola::Patch);
        if (pts.size() != 2) return false;
        const double p1 = pts[0].point.phi, p2 = pts[1].point.phi;
        const double edge_tol = 1e-9 * (1.0 + std::fabs(lo) + std::fabs(hi));
        if (!(p1 >= lo - edge_tol && p2 <= hi + edge_tol && p2 > p1))
            return false;
        // strictly positive branch between the two intersections
        for (int i = 1; i < 64; ++i) {
            const double phi = p1 + (p2 - p1) * i / 64.0;
            if (!(g.outer(phi) > 0.0)) return false;
        }
        return true;
    };

    // find an upper starting point where the condition holds
    double h_hi = std::max(1.0, 0.75 * p.c * p.c + std::fabs(p.g) + std::fabs(p.k) + 1.0);
    int tries = 0;
    while (!condition(h_hi) && tries++ < 60) h_hi *= 2.0;
    if (tries >= 60) throw DomainError("find_h0: no admissible h found");

    // bisect down to the lowest h of the contiguous validity range
    double h_lo = h_hi;
    double step = std::max(1.0, std::fabs(h_hi));
    while (step > 1e-12 * (1.0 + std::fabs(h_hi))) {
        while (condition(h_lo - step)) h_lo -= step;
        step *= 0.5;
    }
    // floor from the constructive proof: f(0) < 0 needs h > 3c^2/4 when the
    // hyperbola vertex is real
    if (p.c < 0.0) h_lo = std::max(h_lo, 0.75 * p.c * p.c);
    return h_lo;
}

namespace {
WaveProfile build_patched_impl(const ModelParams& params_in, double h,
                               PatchOptions opt, int depth);
} // namespace

WaveProfile build_patched_solution(const ModelParams& params_in, double h,
                                   PatchOptions opt) {
    return build_patched_impl(params_in, h, opt, 0);
}

namespace {
WaveProfile build_patched_impl(const ModelParams& params_in, double h,
                               PatchOptions opt, int depth) {
    bool flipped = false;
    const ModelParams p = params_in.normalized(flipped);
    Geom g{p, h, BranchSign::Plus};

    std::vector<ArcUnit> units = patch_units(p, h);
    std::vector<ArcUnit> valid;
    for (const auto& u : units)
        if (unit_valid(u)) valid.push_back(u);
    if (valid.empty()) {
        bool any_patch = false;
        for (const auto& u : units) any_patch |= (u.left.patch || u.right.patch);
        if (!any_patch)
            throw NoIntersectionError(
                "build_patched_solution: patch hyperbola misses the level set");
        throw SaddleOnArcError(
            "build_patched_solution: no admissible arc between breakpoints");
    }
    const ArcUnit* chosen = nullptr;
    if (opt.joint_index >= 0) {
        if (opt.joint_index >= (int)valid.size())
            throw DomainError("build_patched_solution: joint index out of range");
        chosen = &valid[opt.joint_index];
    } else {
        for (const auto& u : valid) {
            if (!chosen) {
                chosen = &u;
                continue;
            }
            const double tol = 1e-9 * (1.0 + chosen->vmax);
            if (u.vmax > chosen->vmax + tol) {
                chosen = &u;
            } else if (std::fabs(u.vmax - chosen->vmax) <= tol &&
                       chosen->right.type == EndType::Saddle &&
                       u.right.type != EndType::Saddle) {
                // equal-height mirror pair: prefer the directly buildable one
                chosen = &u;
            }
        }
    }
    const ArcUnit u = *chosen;

    // saddle-at-right units are the phi -> -phi mirror of saddle-at-left ones
    if (u.right.type == EndType::Saddle) {
        if (depth > 0)
            throw DomainError(
                "build_patched_solution: mirror recursion did not resolve");
        ModelParams q = p;
        q.g = -p.g;
        WaveProfile wp = build_patched_impl(q, h, opt, depth + 1);
        wp = mirror_profile(wp);
        wp.params = params_in;
        wp.g_flipped = flipped;
        return flipped ? mirror_profile(wp) : wp;
    }

    EndInfo ea = classify_end(g, u.lo), eb = classify_end(g, u.hi);
    if (u.left.patch) ea = {EndType::Regular, g.v_of(u.lo)};
    if (u.right.patch) eb = {EndType::Regular, g.v_of(u.hi)};

    // joint v values come from the hyperbola, making the kinematic jump
    // condition exact by construction
    auto patch_v = [&](double phi) { return std::sqrt(3.0 * (phi * phi - p.c)); };

    WaveProfile wp;
    wp.params = p;
    wp.h = h;
    wp.g_flipped = flipped;

    ArcSamples s = sample_graph(g, u.lo, u.hi, ea, eb, opt.samples, opt.xi_window);
    const double t1 = s.xi.back();

    if (ea.type == EndType::Saddle) {
        // infinite-period pulse: joint at xi = 0, tails toward the saddle
        wp.kind = ProfileKind::Unbounded;
        wp.period = kInf;
        ProfileSegment up;
        up.xi.resize(s.xi.size());
        for (std::size_t i = 0; i < s.xi.size(); ++i) up.xi[i] = s.xi[i] - t1;
        up.phi = s.phi;
        up.v = s.v;
        wp.segments.push_back(std::move(up));
        wp.segments.push_back(mirrored_lower(s, 0.0, t1));
        const double vj = patch_v(u.hi);
        wp.joints.push_back({0.0, u.hi, vj, -vj});
        wp.xi_min = wp.segments.front().xi.front();
        wp.xi_max = wp.segments.back().xi.back();
    } else {
        wp.kind = ProfileKind::PatchedPeriodic;
        wp.period = 2.0 * t1;
        ProfileSegment up;
        up.xi = s.xi;
        up.phi = s.phi;
        up.v = s.v;
        wp.segments.push_back(std::move(up));
        wp.segments.push_back(mirrored_lower(s, t1, t1));
        if (u.left.patch) {
            const double vj = patch_v(u.lo);
            wp.joints.push_back({0.0, u.lo, -vj, vj});
        }
        if (u.right.patch) {
            const double vj = patch_v(u.hi);
            wp.joints.push_back({t1, u.hi, vj, -vj});
        }
        wp.xi_min = 0.0;
        wp.xi_max = 2.0 * t1;
    }

    if (flipped) {
        wp = mirror_profile(wp);
        wp.g_flipped = true;
    }
    wp.params = params_in;
    return wp;
}
} // namespace

std::vector<JointReport> verify_jump_conditions(const WaveProfile& profile) {
    std::vector<JointReport> out;
    const double c = profile.params.c;
    const double k = profile.params.k;
    const double gg = profile.params.g;
    for (const auto& j : profile.joints) {
        JointReport r;
        r.xi = j.xi;
        const double u2 = j.phi * j.phi;
        const double chord =
            (j.v_left * j.v_left + j.v_left * j.v_right + j.v_right * j.v_right) / 3.0;
        r.residual1 = std::fabs(c - (u2 - chord));
        // traveling profiles: d/dt(v_l - v_r) = 0 and A = g - 2 k phi is
        // continuous across the joint
        const double a_left = gg - 2.0 * k * j.phi;
        const double a_right = gg - 2.0 * k * j.phi;
        r.residual2 = std::fabs(0.0 - (a_left - a_right));
        out.push_back(r);
    }
    return out;
}

// --- compact-support composition ---------------------------------------------

CompositeSolution compose_compact_peakons(std::vector<CompositePulse> pulses) {
    if (pulses.empty()) throw DomainError("compose_compact_peakons: no pulses");
    for (const auto& pu : pulses) {
        if (!std::isfinite(pu.profile.period))
            throw DomainError("compose_compact_peakons: pulse with infinite support");
        double amp = 0.0;
        for (const auto& seg : pu.profile.segments)
            for (double phi : seg.phi) amp = std::max(amp, std::fabs(phi));
        const double end0 = std::fabs(pu.profile.eval(pu.profile.xi_min).phi);
        const double end1 = std::fabs(pu.profile.eval(pu.profile.xi_max).phi);
        if (end0 > 1e-6 * std::max(1.0, amp) || end1 > 1e-6 * std::max(1.0, amp))
            throw DomainError("compose_compact_peakons: nonzero background at support end");
    }
    std::sort(pulses.begin(), pulses.end(),
              [](const CompositePulse& a, const CompositePulse& b) {
                  return a.offset < b.offset;
              });
    double touch = kInf;
    for (std::size_t i = 0; i + 1 < pulses.size(); ++i) {
        const double right_i = pulses[i].offset + pulses[i].profile.period;
        const double gap = pulses[i + 1].offset - right_i;
        if (gap < 0.0)
            throw OverlapError("compose_compact_peakons: supports overlap at t=0");
        const double dv = pulses[i].speed - pulses[i + 1].speed;
        if (dv > 0.0) touch = std::min(touch, gap / dv);
    }
    CompositeSolution cs;
    cs.pulses = std::move(pulses);
    cs.touch_time = touch;
    return cs;
}

double CompositeSolution::eval(double x, double t) const {
    double u = 0.0;
    for (const auto& pu : pulses) {
        const double xi = x - pu.offset - pu.speed * t + pu.profile.xi_min;
        if (xi >= pu.profile.xi_min && xi <= pu.profile.xi_max)
            u += pu.profile.eval(xi).phi;
    }
    return u;
}

} // namespace mch::wave
