#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mch/ode.hpp"
#include "mch/wave_builder.hpp"

using namespace mch;
using namespace mch::wave;

namespace {

// traveling-wave system: phi' = v, v' = phi - (g - 2k phi)/(phi^2 - v^2 - c)
ode::Rhs profile_ode(const ModelParams& p) {
    return [p](double, const ode::State& y, ode::State& dy) {
        const double w = y[0] * y[0] - y[1] * y[1];
        dy.resize(2);
        dy[0] = y[1];
        dy[1] = y[0] - (p.g - 2.0 * p.k * y[0]) / (w - p.c);
    };
}

// loop time by direct ODE integration: the system is reversible in v, so the
// full loop is twice the (phi_lo, 0) -> v = 0 transit
double ode_loop_period(const ModelParams& p, double phi_lo) {
    ode::State y{phi_lo, 0.0};
    ode::Options opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 1e-14;
    auto ev = [](double, const ode::State& s) { return s[1]; };
    ode::DormandPrince solver(profile_ode(p), opt);
    double t1 = 0.0;
    solver.integrate(y, 0.0, 1e4, {}, ev, &t1, 1e-6);
    return 2.0 * t1;
}

WaveProfile synthetic_compact_pulse(double amp, double T, int n = 400) {
    WaveProfile w;
    w.params = ModelParams{0.0, 1.0, 0.0};
    ProfileSegment seg;
    const double pi = std::acos(-1.0);
    for (int i = 0; i <= n; ++i) {
        const double xi = T * i / n;
        seg.xi.push_back(xi);
        seg.phi.push_back(amp * std::sin(pi * xi / T) * std::sin(pi * xi / T));
        seg.v.push_back(amp * pi / T * std::sin(2.0 * pi * xi / T));
    }
    w.segments.push_back(std::move(seg));
    w.period = T;
    w.kind = ProfileKind::CompactSupportComposite;
    w.xi_min = 0.0;
    w.xi_max = T;
    return w;
}

} // namespace

TEST_CASE("exponential pulse profile") {
    const ModelParams p{0.0, 2.0, 0.0};
    WaveProfile prof = build_patched_solution(p, 0.0);
    CHECK(std::isinf(prof.period));
    CHECK(prof.kind == ProfileKind::Unbounded);
    REQUIRE(prof.joints.size() == 1);
    CHECK(prof.joints[0].phi == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));
    CHECK(prof.joints[0].v_left == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
    CHECK(prof.joints[0].v_right == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-9));
    const double xi_peak = prof.joints[0].xi;
    double sup = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double xi = -5.0 + 10.0 * i / 1000.0;
        const double exact = std::sqrt(3.0) * std::exp(-std::fabs(xi));
        sup = std::max(sup, std::fabs(prof.eval(xi_peak + xi).phi - exact));
    }
    CHECK(sup <= 1e-6);
}

TEST_CASE("hyperbolic closed forms on k=0, g=0 levels") {
    const ModelParams p{0.0, 2.0, 0.0};
    SUBCASE("phi^2 - v^2 = -1: sinh profile") {
        // plus branch of h = 1/4 + c/2 carries w = c - sqrt(c^2+4h) = -1
        const double h = 1.25;
        LevelArc arc{p, h, phase::BranchSign::Plus, 0.5, 2.0,
                     HalfPlane::Upper, Orientation::IncreasingPhi};
        auto res = trace_profile(arc);
        REQUIRE(std::holds_alternative<WaveProfile>(res));
        const auto& prof = std::get<WaveProfile>(res);
        const double d = std::asinh(0.5); // phi(0) = 0.5
        for (const auto& seg : prof.segments)
            for (std::size_t i = 0; i < seg.xi.size(); ++i)
                CHECK(seg.phi[i] ==
                      doctest::Approx(std::sinh(seg.xi[i] + d)).epsilon(1e-8));
    }
    SUBCASE("phi^2 - v^2 = +1: cosh profile") {
        const double h = -0.75; // w = 2 - sqrt(4 + 4h) = 1
        LevelArc arc{p, h, phase::BranchSign::Plus, 1.5, 3.0,
                     HalfPlane::Upper, Orientation::IncreasingPhi};
        auto res = trace_profile(arc);
        REQUIRE(std::holds_alternative<WaveProfile>(res));
        const auto& prof = std::get<WaveProfile>(res);
        const double d = std::acosh(1.5);
        for (const auto& seg : prof.segments)
            for (std::size_t i = 0; i < seg.xi.size(); ++i)
                CHECK(seg.phi[i] ==
                      doctest::Approx(std::cosh(seg.xi[i] + d)).epsilon(1e-8));
    }
}

TEST_CASE("saddle-terminated arc has infinite time") {
    const ModelParams p{0.0, 2.0, 0.0};
    LevelArc arc{p, 0.0, phase::BranchSign::Plus, 0.0, 2.0,
                 HalfPlane::Upper, Orientation::IncreasingPhi};
    CHECK(std::isinf(period(arc)));
}

TEST_CASE("loop period matches direct ODE integration") {
    struct Case { ModelParams p; double h; };
    // small ovals around the axis centers of k>0 parameter sets
    const Case cases[] = {
        {{1.0, 4.0, 0.0}, -0.9},
        {{1.0, 4.0, 0.0}, -0.5},
        {{2.0, 3.0, 1.0}, -0.3},
    };
    for (const auto& cs : cases) {
        CAPTURE(cs.p.k); CAPTURE(cs.p.c); CAPTURE(cs.p.g); CAPTURE(cs.h);
        bool done = false;
        for (auto sign : {phase::BranchSign::Plus, phase::BranchSign::Minus}) {
            for (const auto& dom : phase::branch_domain(cs.p, cs.h, sign)) {
                if (!std::isfinite(dom.lo) || !std::isfinite(dom.hi)) continue;
                if (dom.hi - dom.lo > 3.0) continue; // want a small oval
                LevelArc arc{cs.p, cs.h, sign, dom.lo, dom.hi,
                             HalfPlane::Upper, Orientation::IncreasingPhi};
                double T;
                try {
                    T = period(arc);
                } catch (const Error&) {
                    continue;
                }
                if (!std::isfinite(T)) continue;
                const double T_ode = ode_loop_period(cs.p, dom.lo);
                CHECK(std::fabs(T - T_ode) <= 1e-6 * T_ode);
                done = true;
            }
        }
        CHECK(done);
    }
}

TEST_CASE("interior critical point raises SingularArcError") {
    // level through the saddle at the origin, arc spanning across it
    const ModelParams p{0.0, 2.0, 0.0};
    LevelArc arc{p, 0.0, phase::BranchSign::Plus, -1.0, 1.0,
                 HalfPlane::Upper, Orientation::IncreasingPhi};
    CHECK_THROWS_AS(period(arc), SingularArcError);
}

TEST_CASE("multi-valued trace across the fold") {
    // level through the origin for k=1,g=2,c=2 folds at the inner-radicand
    // edge phi = 1+sqrt(2), which lies on phi^2 - v^2 = c
    const ModelParams p{1.0, 2.0, 2.0};
    LevelArc arc{p, 0.0, phase::BranchSign::Plus, 0.0, 1.0 + std::sqrt(2.0),
                 HalfPlane::Upper, Orientation::IncreasingPhi};
    auto res = trace_profile(arc);
    REQUIRE(std::holds_alternative<MultiValuedProfile>(res));
    const auto& mv = std::get<MultiValuedProfile>(res);
    CHECK(mv.branches.size() >= 2);
    REQUIRE(!mv.folds.empty());
    for (const auto& f : mv.folds) {
        // fold point sits on the jump hyperbola and both one-sided momentum
        // flux limits agree
        CHECK(f.phi * f.phi - f.v * f.v == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(std::fabs(f.a_left - f.a_right) <= 1e-6 * (1.0 + std::fabs(f.a_left)));
        CHECK(std::fabs(f.v) > 1e-6);
    }
    // endpoint continuity between consecutive branch graphs
    for (std::size_t i = 0; i + 1 < mv.branches.size(); ++i) {
        const auto& a = mv.branches[i];
        const auto& b = mv.branches[i + 1];
        REQUIRE(!a.phi.empty());
        REQUIRE(!b.phi.empty());
        CHECK(a.phi.back() == doctest::Approx(b.phi.front()).epsilon(1e-6));
    }
}

TEST_CASE("patch threshold") {
    SUBCASE("reference value for k=1,g=2,c=2") {
        const double h0 = find_h0({1.0, 2.0, 2.0});
        const double exact = 1.0 + 2.0 * std::sqrt(2.0);
        CHECK(h0 <= exact + 1e-7);
        CHECK(h0 >= exact - 1e-3);
    }
    SUBCASE("negative speed floor 3c^2/4") {
        const double h0 = find_h0({1.0, -1.0, 1.0});
        CHECK(h0 >= 3.0 / 4.0 - 1e-9);
    }
    SUBCASE("k=0: two symmetric patch intersections above the threshold") {
        const ModelParams p{0.0, 2.0, 0.0};
        const double h0 = find_h0(p);
        for (double dh : {0.5, 2.0, 10.0}) {
            auto pts = phase::intersect_hyperbola(p, h0 + dh, phase::BranchSign::Plus,
                                                  phase::Hyperbola::Patch);
            REQUIRE(pts.size() == 2);
            CHECK(pts[0].point.phi == doctest::Approx(-pts[1].point.phi).epsilon(1e-9));
            CHECK(pts[0].point.v == doctest::Approx(pts[1].point.v).epsilon(1e-9));
        }
    }
}

TEST_CASE("patched periodic construction k=1,g=2,c=2") {
    const ModelParams p{1.0, 2.0, 2.0};
    for (double h : {4.0, 10.0}) {
        CAPTURE(h);
        WaveProfile prof = build_patched_solution(p, h);
        CHECK(prof.kind == ProfileKind::PatchedPeriodic);
        CHECK(std::isfinite(prof.period));
        CHECK(prof.period > 0.0);
        CHECK(!prof.joints.empty());
        // periodic continuation
        for (int i = 0; i < 100; ++i) {
            const double xi = prof.xi_min + prof.period * (i + 0.5) / 100.0;
            CHECK(std::fabs(prof.eval(xi + prof.period).phi - prof.eval(xi).phi) <=
                  1e-9 * (1.0 + std::fabs(prof.eval(xi).phi)));
        }
        for (const auto& rep : verify_jump_conditions(prof)) {
            CHECK(rep.residual1 <= 1e-10);
            CHECK(rep.residual2 <= 1e-10);
        }
    }
    // frozen regression value of the h=4 period
    CHECK(build_patched_solution(p, 4.0).period ==
          doctest::Approx(4.22096761).epsilon(1e-6));
}

TEST_CASE("jump conditions on a parameter grid") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> Uc(0.5, 3.0), Ug(0.0, 2.0), Uh(0.5, 8.0);
    int joints = 0;
    for (double k : {-1.0, 0.0, 1.0}) {
        for (int trial = 0; trial < 12; ++trial) {
            ModelParams p{k, Uc(rng), Ug(rng)};
            const double h = find_h0(p) + Uh(rng);
            WaveProfile prof;
            try {
                prof = build_patched_solution(p, h);
            } catch (const Error&) {
                continue;
            }
            for (const auto& rep : verify_jump_conditions(prof)) {
                CHECK(rep.residual1 <= 1e-10);
                ++joints;
            }
        }
    }
    CHECK(joints >= 20);
}

TEST_CASE("corrupted joint is detected") {
    WaveProfile prof = build_patched_solution({0.0, 2.0, 0.0}, 0.0);
    REQUIRE(!prof.joints.empty());
    prof.joints[0].v_right *= 1.1;
    auto reps = verify_jump_conditions(prof);
    REQUIRE(!reps.empty());
    CHECK(reps[0].residual1 > 0.05);
}

TEST_CASE("smooth periodic profile has no joints to report") {
    const ModelParams p{1.0, 4.0, 0.0};
    auto dom = phase::branch_domain(p, -0.9, phase::BranchSign::Plus);
    REQUIRE(!dom.empty());
    const phase::Interval* oval = nullptr;
    for (const auto& d : dom)
        if (std::isfinite(d.lo) && std::isfinite(d.hi) && d.hi - d.lo < 3.0) oval = &d;
    REQUIRE(oval != nullptr);
    LevelArc arc{p, -0.9, phase::BranchSign::Plus, oval->lo, oval->hi,
                 HalfPlane::Upper, Orientation::IncreasingPhi};
    auto res = trace_profile(arc);
    REQUIRE(std::holds_alternative<WaveProfile>(res));
    const auto& prof = std::get<WaveProfile>(res);
    CHECK(prof.joints.empty());
    CHECK(verify_jump_conditions(prof).empty());
    CHECK(std::isfinite(prof.period));
}

TEST_CASE("profile samples satisfy the first-order system") {
    WaveProfile prof = build_patched_solution({1.0, 2.0, 2.0}, 4.0);
    for (const auto& seg : prof.segments) {
        for (std::size_t i = 1; i + 1 < seg.xi.size(); ++i) {
            // second-order derivative on the (unevenly refined) sample grid
            const double h1 = seg.xi[i] - seg.xi[i - 1];
            const double h2 = seg.xi[i + 1] - seg.xi[i];
            if (h1 <= 0.0 || h2 <= 0.0 || h1 + h2 > 1e-2) continue;
            const double dphi = -h2 / (h1 * (h1 + h2)) * seg.phi[i - 1] +
                                (h2 - h1) / (h1 * h2) * seg.phi[i] +
                                h1 / (h2 * (h1 + h2)) * seg.phi[i + 1];
            CHECK(std::fabs(dphi - seg.v[i]) <= 1e-5 * (1.0 + std::fabs(seg.v[i])));
        }
    }
}

TEST_CASE("compact-support composition") {
    WaveProfile pulse = synthetic_compact_pulse(1.0, 2.0);
    SUBCASE("single pulse is the identity composition") {
        CompositeSolution cs = compose_compact_peakons({{pulse, 1.0, 0.0}});
        CHECK(std::isinf(cs.touch_time));
        for (double x : {0.3, 0.9, 1.7})
            CHECK(cs.eval(x, 0.0) == doctest::Approx(pulse.eval(x).phi).epsilon(1e-12));
        // translation at its own speed
        CHECK(cs.eval(1.5, 0.5) == doctest::Approx(pulse.eval(1.0).phi).epsilon(1e-12));
    }
    SUBCASE("slower pulse behind never touches") {
        CompositeSolution cs =
            compose_compact_peakons({{pulse, 0.5, 0.0}, {pulse, 2.0, 5.0}});
        CHECK(std::isinf(cs.touch_time));
    }
    SUBCASE("faster pulse behind touches at gap / speed difference") {
        CompositeSolution cs =
            compose_compact_peakons({{pulse, 3.0, 0.0}, {pulse, 1.0, 5.0}});
        // supports [0,2] and [5,7]: gap 3, closing speed 2
        CHECK(cs.touch_time == doctest::Approx(1.5).epsilon(1e-12));
    }
    SUBCASE("overlapping supports rejected") {
        CHECK_THROWS_AS(
            compose_compact_peakons({{pulse, 1.0, 0.0}, {pulse, 1.0, 1.0}}),
            OverlapError);
    }
}
