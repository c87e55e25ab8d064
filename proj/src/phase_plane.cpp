#include "mch/phase_plane.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mch/rootfind.hpp"

namespace mch::phase {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kScanResolution = 1 << 10; // 2^-10 of the domain width
} // namespace

double hamiltonian(const ModelParams& p, PhasePoint pt) {
    const double w = pt.phi * pt.phi - pt.v * pt.v;
    return 0.25 * w * w - 0.5 * p.c * w + p.k * pt.phi * pt.phi - p.g * pt.phi;
}

PhasePoint grad_hamiltonian(const ModelParams& p, PhasePoint pt) {
    const double w = pt.phi * pt.phi - pt.v * pt.v;
    return {pt.phi * (w - p.c + 2.0 * p.k) - p.g, pt.v * (p.c - w)};
}

Hessian hessian(const ModelParams& p, PhasePoint pt) {
    const double phi2 = pt.phi * pt.phi, v2 = pt.v * pt.v;
    return {3.0 * phi2 - v2 - p.c + 2.0 * p.k,
            -2.0 * pt.phi * pt.v,
            -phi2 + 3.0 * v2 + p.c};
}

namespace {

CriticalPoint classify_at(const ModelParams& p, PhasePoint loc, bool on_hyp) {
    const Hessian h = hessian(p, loc);
    const double disc = h.discriminant();
    const double tol = 1e-9 * (1.0 + h.norm2());
    CritKind kind = CritKind::Degenerate;
    if (disc > tol)
        kind = CritKind::Saddle;
    else if (disc < -tol)
        kind = CritKind::Center;
    return {loc, kind, on_hyp, disc};
}

} // namespace

std::vector<CriticalPoint> classify_critical_points(const ModelParams& p) {
    std::vector<CriticalPoint> out;
    // axis points: roots of phi^3 + (2k - c) phi - g = 0
    for (double r : roots::depressed_cubic_roots(2.0 * p.k - p.c, -p.g))
        out.push_back(classify_at(p, {r, 0.0}, false));
    // hyperbola pair (g/2k, +-sqrt(g^2/4k^2 - c))
    if (p.k != 0.0) {
        const double disc2 = p.g * p.g - 4.0 * p.k * p.k * p.c;
        if (disc2 > 0.0) {
            const double phi = p.g / (2.0 * p.k);
            const double v = std::sqrt(phi * phi - p.c);
            out.push_back(classify_at(p, {phi, -v}, true));
            out.push_back(classify_at(p, {phi, v}, true));
        }
    }
    std::sort(out.begin(), out.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
        if (a.location.phi != b.location.phi) return a.location.phi < b.location.phi;
        return a.location.v < b.location.v;
    });
    return out;
}

double inner_radicand(const ModelParams& p, double h, double phi) {
    return p.c * p.c - 4.0 * (p.k * phi * phi - p.g * phi - h);
}

namespace {

double radicand_tol(const ModelParams& p, double h, double phi) {
    return 1e-9 * (1.0 + p.c * p.c +
                   4.0 * (std::fabs(p.k) * phi * phi + std::fabs(p.g * phi) +
                          std::fabs(h)));
}

// outer radicand; negative inner beyond tolerance maps to -infinity so that
// domain scans see a definite sign.
double outer_raw(const ModelParams& p, double h, BranchSign sign, double phi) {
    const double in = inner_radicand(p, h, phi);
    if (in < -radicand_tol(p, h, phi)) return -kInf;
    return outer_value(p, h, sign, phi);
}

} // namespace

double outer_value(const ModelParams& p, double h, BranchSign sign, double phi) {
    const double phi2 = phi * phi;
    const double q = 4.0 * (p.k * phi2 - p.g * phi - h); // inner = c^2 - q
    const double in = std::max(0.0, p.c * p.c - q);
    const double s = std::sqrt(in);
    if (sign == BranchSign::Plus) {
        // phi^2 - (c - s) = phi^2 - q / (c + s) when c + s > 0
        if (p.c >= 0.0) {
            const double den = p.c + s;
            return den > 0.0 ? phi2 - q / den : phi2;
        }
        return phi2 - p.c + s;
    }
    // phi^2 - (c + s) = phi^2 - q / (c - s) when c - s < 0
    if (p.c <= 0.0) {
        const double den = p.c - s;
        return den < 0.0 ? phi2 - q / den : phi2;
    }
    return phi2 - p.c - s;
}

double branch_value(const ModelParams& p, double h, BranchSign sign, double phi) {
    const double in = inner_radicand(p, h, phi);
    const double tol = radicand_tol(p, h, phi);
    if (in < -tol)
        throw DomainError("branch_value: inner radicand negative");
    const double out = outer_value(p, h, sign, phi);
    if (out < -tol)
        throw DomainError("branch_value: branch radicand negative");
    return std::max(out, 0.0);
}

namespace {

// Components of { inner_radicand >= 0 }.
std::vector<Interval> inner_domain(const ModelParams& p, double h) {
    const double k = p.k, g = p.g, c = p.c;
    if (k == 0.0) {
        if (g == 0.0) {
            if (c * c + 4.0 * h >= 0.0) return {{-kInf, kInf}};
            return {};
        }
        const double edge = -(c * c + 4.0 * h) / (4.0 * g);
        if (g > 0.0) return {{edge, kInf}};
        return {{-kInf, edge}};
    }
    const double disc2 = g * g + k * (c * c + 4.0 * h);
    if (k > 0.0) {
        if (disc2 < 0.0) return {};
        const double s = std::sqrt(disc2);
        return {{(g - s) / (2.0 * k), (g + s) / (2.0 * k)}};
    }
    // k < 0: parabola 4k phi^2 - 4g phi - (c^2+4h) opens downward
    if (disc2 < 0.0) return {{-kInf, kInf}};
    const double s = std::sqrt(disc2);
    const double r1 = (g + s) / (2.0 * k); // k<0: this is the smaller root
    const double r2 = (g - s) / (2.0 * k);
    return {{-kInf, std::min(r1, r2)}, {std::max(r1, r2), kInf}};
}

// Rigorous bound on |roots| of the outer quartic
// phi^4 + (4k-2c) phi^2 - 4g phi - 4h = 0 (Cauchy bound).
double quartic_root_bound(const ModelParams& p, double h) {
    return 1.0 + std::max({std::fabs(4.0 * p.k - 2.0 * p.c),
                           4.0 * std::fabs(p.g), 4.0 * std::fabs(h)});
}

} // namespace

std::vector<Interval> branch_domain(const ModelParams& p, double h, BranchSign sign) {
    std::vector<Interval> out;
    const double bound = quartic_root_bound(p, h);
    for (const Interval& comp : inner_domain(p, h)) {
        // scan window: clip infinite tails at the quartic root bound; outside
        // of it the sign of outer is constant (positive, since phi^2 wins).
        const double lo = std::max(comp.lo, -bound - 1.0);
        const double hi = std::min(comp.hi, bound + 1.0);
        if (!(hi > lo)) {
            // entire component beyond the bound: outer > 0 throughout
            if (comp.lo > bound || comp.hi < -bound) out.push_back(comp);
            continue;
        }
        auto f = [&](double phi) { return outer_raw(p, h, sign, phi); };
        std::vector<double> brk{lo};
        for (const auto& r : roots::scan(f, lo, hi, kScanResolution))
            if (r.x > lo && r.x < hi) brk.push_back(r.x);
        brk.push_back(hi);
        for (std::size_t i = 0; i + 1 < brk.size(); ++i) {
            const double a = brk[i], b = brk[i + 1];
            const double mid = 0.5 * (a + b);
            if (f(mid) < 0.0) continue;
            Interval iv{a, b};
            if (a == lo && comp.lo < lo) iv.lo = comp.lo; // open tail
            if (b == hi && comp.hi > hi) iv.hi = comp.hi;
            if (!out.empty() && out.back().hi >= iv.lo - 1e-14 * (1.0 + std::fabs(iv.lo)))
                out.back().hi = iv.hi;
            else
                out.push_back(iv);
        }
    }
    return out;
}

std::vector<HyperbolaIntersection> intersect_hyperbola(const ModelParams& p,
                                                       double h, BranchSign sign,
                                                       Hyperbola which) {
    std::vector<HyperbolaIntersection> out;
    const double mult = (which == Hyperbola::Jump) ? 1.0 : 3.0;
    auto hyp_v2 = [&](double phi) { return mult * (phi * phi - p.c); };
    auto diff = [&](double phi) {
        return outer_raw(p, h, sign, phi) - hyp_v2(phi);
    };

    for (const Interval& dom : branch_domain(p, h, sign)) {
        // hyperbola needs v^2 >= 0: restrict to phi^2 >= c when c > 0
        std::vector<Interval> pieces;
        if (p.c > 0.0) {
            const double rc = std::sqrt(p.c);
            if (dom.lo < -rc) pieces.push_back({dom.lo, std::min(dom.hi, -rc)});
            if (dom.hi > rc) pieces.push_back({std::max(dom.lo, rc), dom.hi});
        } else {
            pieces.push_back(dom);
        }
        for (const Interval& piece : pieces) {
            const double bound = quartic_root_bound(p, h) + 1.0;
            const double lo = std::max(piece.lo, -bound);
            const double hi = std::min(piece.hi, bound);
            if (!(hi > lo)) continue;
            const double scale = 1.0 + std::fabs(p.c) + std::fabs(h);
            for (const auto& r :
                 roots::scan(diff, lo, hi, kScanResolution, 1e-9 * scale)) {
                // polish on the difference with central-difference slope
                double phi = r.x;
                if (r.multiplicity == 1) {
                    const double dstep = 1e-7 * (1.0 + std::fabs(phi));
                    phi = roots::polish(
                        diff,
                        [&](double x) {
                            return (diff(x + dstep) - diff(x - dstep)) /
                                   (2.0 * dstep);
                        },
                        phi, lo, hi);
                }
                const double v2 = std::max(0.0, hyp_v2(phi));
                out.push_back({{phi, std::sqrt(v2)}, r.multiplicity});
            }
        }
    }
    std::sort(out.begin(), out.end(),
              [](const HyperbolaIntersection& a, const HyperbolaIntersection& b) {
                  return a.point.phi < b.point.phi;
              });
    return out;
}

std::vector<BranchSample> sample_branch(const ModelParams& p, double h,
                                        BranchSign sign, int resolution,
                                        double phi_max) {
    std::vector<BranchSample> out;
    for (const Interval& dom : branch_domain(p, h, sign)) {
        const double lo = std::max(dom.lo, -phi_max);
        const double hi = std::min(dom.hi, phi_max);
        if (!(hi >= lo)) continue;
        for (int i = 0; i <= resolution; ++i) {
            const double phi = lo + (hi - lo) * i / resolution;
            double v2;
            try {
                v2 = branch_value(p, h, sign, phi);
            } catch (const DomainError&) {
                continue; // grazing the domain edge in floating point
            }
            out.push_back({phi, std::sqrt(v2)});
        }
    }
    return out;
}

} // namespace mch::phase
