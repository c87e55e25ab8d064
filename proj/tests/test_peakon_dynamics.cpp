#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mch/peakon_dynamics.hpp"

using namespace mch;
using namespace mch::peakon;

TEST_CASE("fundamental solution") {
    SUBCASE("whole line: half exponential") {
        CHECK(fundamental_solution(kInfiniteEll, 0.0).g == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(fundamental_solution(kInfiniteEll, 1.0).g ==
              doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-14));
        CHECK(fundamental_solution(kInfiniteEll, -2.0).g ==
              doctest::Approx(0.5 * std::exp(-2.0)).epsilon(1e-14));
    }
    SUBCASE("circle: value at origin is coth(ell/2)/2") {
        for (double ell : {2.0, 6.0, 20.0})
            CHECK(fundamental_solution(ell, 0.0).g ==
                  doctest::Approx(0.5 / std::tanh(ell / 2.0)).epsilon(1e-14));
    }
    SUBCASE("derivative jump at the crest is -1") {
        for (double ell : {kInfiniteEll, 2.0, 6.0}) {
            const GValue G = fundamental_solution(ell, 0.0);
            CHECK(G.dright - G.dleft == doctest::Approx(-1.0).epsilon(1e-12));
        }
    }
    SUBCASE("continuity at the seam x = +-ell/2") {
        const double ell = 4.0;
        const GValue a = fundamental_solution(ell, ell / 2.0 - 1e-9);
        const GValue b = fundamental_solution(ell, -ell / 2.0 + 1e-9);
        CHECK(a.g == doctest::Approx(b.g).epsilon(1e-7));
    }
    SUBCASE("periodicity") {
        const double ell = 5.0;
        CHECK(fundamental_solution(ell, 1.3).g ==
              doctest::Approx(fundamental_solution(ell, 1.3 + 2.0 * ell).g).epsilon(1e-13));
    }
}

TEST_CASE("single peakon speeds") {
    SUBCASE("k=0 whole line: c = p^2/6") {
        CHECK(single_peakon_speed(kInfiniteEll, 0.0, 2.0 * std::sqrt(3.0)) ==
              doctest::Approx(2.0).epsilon(1e-14));
    }
    SUBCASE("k=-1, p=2 whole line: c = (p/2 - 1)^2 - p^2/12 = -1/3") {
        CHECK(single_peakon_speed(kInfiniteEll, -1.0, 2.0) ==
              doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
    }
    SUBCASE("closed forms on the circle") {
        const double ell = 3.0, p = 1.7;
        const double ch = 1.0 / std::tanh(ell / 2.0);
        CHECK(single_peakon_speed(ell, 0.0, p) ==
              doctest::Approx(p * p * (ch * ch - 1.0 / 3.0) / 4.0).epsilon(1e-14));
        const double sk = std::sqrt(2.0);
        const double base = p * ch / 2.0 - sk;
        CHECK(single_peakon_speed(ell, -2.0, p) ==
              doctest::Approx(base * base - p * p / 12.0).epsilon(1e-14));
    }
    SUBCASE("monotone convergence to p^2/6 as ell grows") {
        const double p = 2.0;
        double prev = single_peakon_speed(2.0, 0.0, p);
        for (double ell = 4.0; ell <= 1024.0; ell *= 2.0) {
            const double cur = single_peakon_speed(ell, 0.0, p);
            // strictly decreasing until the limit saturates in double
            if (prev - p * p / 6.0 > 1e-13) CHECK(cur < prev);
            else CHECK(cur <= prev);
            CHECK(cur >= p * p / 6.0);
            prev = cur;
        }
        CHECK(prev == doctest::Approx(p * p / 6.0).epsilon(1e-10));
    }
    SUBCASE("no peakon for k > 0") {
        CHECK_THROWS_AS(single_peakon_speed(kInfiniteEll, 1.0, 1.0), NoPeakonError);
    }
}

TEST_CASE("particle system right-hand sides") {
    SUBCASE("single particle moves at the closed-form speed") {
        PeakonEnsemble e;
        e.model = Model::mCH;
        e.positions = {0.0};
        e.amplitudes = {2.0 * std::sqrt(3.0)};
        auto dx = mch_rhs(e);
        REQUIRE(dx.size() == 1);
        CHECK(dx[0] == doctest::Approx(2.0).epsilon(1e-14));
    }
    SUBCASE("two distant particles: leading term plus exponential coupling") {
        PeakonEnsemble e;
        e.model = Model::mCH;
        e.positions = {0.0, 10.0};
        e.amplitudes = {1.0, 1.0};
        auto dx = mch_rhs(e);
        CHECK(dx[0] == doctest::Approx(1.0 / 6.0 + 0.5 * std::exp(-10.0)).epsilon(1e-14));
        CHECK(dx[1] == doctest::Approx(1.0 / 6.0 + 0.5 * std::exp(-10.0)).epsilon(1e-14));
    }
    SUBCASE("middle particle feels the outer pair's cross term") {
        PeakonEnsemble e;
        e.model = Model::mCH;
        e.positions = {-5.0, 0.0, 5.0};
        e.amplitudes = {1.0, 1.0, 1.0};
        auto dx = mch_rhs(e);
        const double expect =
            1.0 / 6.0 + 0.5 * (std::exp(-5.0) + std::exp(-5.0)) + std::exp(-10.0);
        CHECK(dx[1] == doctest::Approx(expect).epsilon(1e-14));
    }
    SUBCASE("unordered positions rejected") {
        PeakonEnsemble e;
        e.model = Model::mCH;
        e.positions = {1.0, 0.0};
        e.amplitudes = {1.0, 1.0};
        CHECK_THROWS_AS(mch_rhs(e), OrderingError);
    }
    SUBCASE("two-particle system: dx/dt vs two-sided finite difference of travel") {
        // independent oracle: dx_i/dt = u^2(x_i) - (u_x(x_i+)^2 + u_x(x_i+) u_x(x_i-) + u_x(x_i-)^2)/3
        PeakonEnsemble e;
        e.model = Model::mCH;
        e.positions = {-0.7, 1.3};
        e.amplitudes = {2.0, -0.5};
        auto u = [&](double x) {
            double s = 0.0;
            for (std::size_t j = 0; j < e.size(); ++j)
                s += e.amplitudes[j] *
                     fundamental_solution(kInfiniteEll, x - e.positions[j]).g;
            return s;
        };
        auto ux = [&](double x, int side) {
            double s = 0.0;
            for (std::size_t j = 0; j < e.size(); ++j) {
                const GValue G = fundamental_solution(kInfiniteEll, x - e.positions[j]);
                s += e.amplitudes[j] * (side > 0 ? G.dright : G.dleft);
            }
            return s;
        };
        auto dx = mch_rhs(e);
        for (std::size_t i = 0; i < e.size(); ++i) {
            const double ui = u(e.positions[i]);
            const double up = ux(e.positions[i], +1), um = ux(e.positions[i], -1);
            const double expect = ui * ui - (up * up + up * um + um * um) / 3.0;
            CHECK(dx[i] == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("shallow-water particle system") {
    SUBCASE("single particle: speed p/2 on the line, amplitude frozen") {
        PeakonEnsemble e;
        e.model = Model::CH;
        e.positions = {0.3};
        e.amplitudes = {1.0};
        auto [dx, dp] = ch_rhs(e);
        CHECK(dx[0] == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(dp[0] == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("single particle on the circle: speed (p/2) coth(ell/2)") {
        PeakonEnsemble e;
        e.model = Model::CH;
        e.ell = 4.0;
        e.positions = {0.0};
        e.amplitudes = {2.0};
        auto [dx, dp] = ch_rhs(e);
        CHECK(dx[0] == doctest::Approx(1.0 / std::tanh(2.0)).epsilon(1e-14));
        CHECK(dp[0] == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("peakon-antipeakon pair is mirror-antisymmetric") {
        PeakonEnsemble e;
        e.model = Model::CH;
        e.positions = {-1.0, 1.0};
        e.amplitudes = {1.0, -1.0};
        auto [dx, dp] = ch_rhs(e);
        // u is odd, so the pair approaches head-on at equal speed
        CHECK(dx[0] == doctest::Approx(-dx[1]).epsilon(1e-14));
        CHECK(dx[0] == doctest::Approx(0.5 - 0.5 * std::exp(-2.0)).epsilon(1e-14));
        CHECK(dp[0] == doctest::Approx(-dp[1]).epsilon(1e-14));
    }
}

TEST_CASE("trajectories") {
    SUBCASE("single particle travels at speed 2") {
        PeakonEnsemble e;
        e.model = Model::mCH;
        e.positions = {0.0};
        e.amplitudes = {2.0 * std::sqrt(3.0)};
        Trajectory tr = evolve(e, 5.0);
        REQUIRE(!tr.t.empty());
        CHECK(tr.t.back() == doctest::Approx(5.0).epsilon(1e-12));
        CHECK(tr.x.back()[0] == doctest::Approx(10.0).epsilon(1e-8));
        // amplitudes are constants of motion, bit-identical
        for (const auto& row : tr.p) CHECK(row[0] == 2.0 * std::sqrt(3.0));
    }
    SUBCASE("faster left particle collides in finite time") {
        PeakonEnsemble e;
        e.model = Model::mCH;
        e.positions = {0.0, 5.0};
        e.amplitudes = {2.0, 1.0};
        Trajectory tr = evolve(e, 50.0);
        CHECK(tr.collided);
        CHECK(tr.collision_time > 0.0);
        CHECK(tr.collision_time < 50.0);
        CHECK(tr.collision_pair == std::pair<int, int>{0, 1});
        // ordering preserved strictly until the logged event
        for (const auto& row : tr.x) CHECK(row[0] < row[1]);
        // brute-force fixed-step oracle for the collision time
        {
            double t = 0.0;
            PeakonEnsemble w = e;
            const double dt = 1e-4;
            while (t < 50.0 && w.positions[1] - w.positions[0] > 1e-4) {
                auto k1 = mch_rhs(w);
                PeakonEnsemble mid = w;
                for (int i = 0; i < 2; ++i) mid.positions[i] += 0.5 * dt * k1[i];
                auto k2 = mch_rhs(mid);
                for (int i = 0; i < 2; ++i) w.positions[i] += dt * k2[i];
                t += dt;
            }
            CHECK(tr.collision_time == doctest::Approx(t).epsilon(1e-2));
        }
    }
    SUBCASE("conserved quadratic form along shallow-water flow") {
        PeakonEnsemble e;
        e.model = Model::CH;
        // faster particles ahead: the ensemble spreads, no collision
        e.positions = {-3.0, 0.5, 4.0};
        e.amplitudes = {0.4, 0.7, 1.0};
        EvolveOptions opt;
        opt.rel_tol = 1e-10;
        opt.abs_tol = 1e-12;
        Trajectory tr = evolve(e, 10.0, opt);
        REQUIRE(!tr.h0.empty());
        CHECK(!tr.collided);
        const double h0 = tr.h0.front();
        for (double v : tr.h0)
            CHECK(std::fabs(v - h0) <= 1e-8 * std::fabs(h0));
    }
    SUBCASE("translation invariance") {
        PeakonEnsemble e;
        e.model = Model::mCH;
        e.positions = {-1.0, 2.0};
        e.amplitudes = {1.0, 0.5};
        Trajectory a = evolve(e, 2.0);
        PeakonEnsemble shifted = e;
        for (auto& x : shifted.positions) x += 7.0;
        Trajectory b = evolve(shifted, 2.0);
        // compare the final states (step sequences may differ in round-off)
        for (std::size_t j = 0; j < e.size(); ++j)
            CHECK(b.x.back()[j] - a.x.back()[j] == doctest::Approx(7.0).epsilon(1e-9));
    }
    SUBCASE("single-particle velocity equals the closed-form speed, both models") {
        for (auto model : {Model::mCH, Model::CH}) {
            for (double ell : {kInfiniteEll, 6.0}) {
                PeakonEnsemble e;
                e.model = model;
                e.ell = ell;
                e.k = (model == Model::mCH) ? -0.5 : 0.0;
                e.positions = {0.1};
                e.amplitudes = {1.3};
                const double c_expect =
                    (model == Model::mCH)
                        ? single_peakon_speed(ell, e.k, 1.3)
                        : 0.5 * 1.3 * (std::isfinite(ell) ? 1.0 / std::tanh(ell / 2.0) : 1.0);
                Trajectory tr = evolve(e, 1.0);
                CHECK(tr.x.back()[0] - 0.1 == doctest::Approx(c_expect).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("energy functionals from samples") {
    const double ell = 4.0;
    const int n = 512;
    SUBCASE("zero profile") {
        std::vector<double> u(n, 0.0);
        auto rep = hamiltonians(u, ell, 0.0);
        CHECK(rep.h0 == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(rep.h1 == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("constant profile: a^2 ell and a^4 ell / 4") {
        const double a = 1.5;
        std::vector<double> u(n, a);
        auto rep = hamiltonians(u, ell, 0.0);
        CHECK(rep.h0 == doctest::Approx(a * a * ell).epsilon(1e-12));
        CHECK(rep.h1 == doctest::Approx(a * a * a * a * ell / 4.0).epsilon(1e-12));
    }
    SUBCASE("smooth profile against direct quadrature") {
        // u = sin(2 pi x / ell): H0 = int u^2 + u_x^2, H1 quartic integrand
        const double w = 2.0 * std::acos(-1.0) / ell;
        std::vector<double> u(n);
        for (int i = 0; i < n; ++i) u[i] = std::sin(w * (ell * i / n));
        auto rep = hamiltonians(u, ell, 0.5);
        const double i_u2 = ell / 2.0, i_ux2 = w * w * ell / 2.0;
        CHECK(rep.h0 == doctest::Approx(i_u2 + i_ux2).epsilon(1e-8));
        // H1 = 1/4 int (u^4 + 2u^2 u_x^2 - u_x^4/3 + 4k u^2)
        const double i_u4 = 3.0 * ell / 8.0;
        const double i_ux4 = w * w * w * w * 3.0 * ell / 8.0;
        const double i_u2ux2 = w * w * ell / 8.0;
        const double h1 =
            0.25 * (i_u4 + 2.0 * i_u2ux2 - i_ux4 / 3.0 + 4.0 * 0.5 * i_u2);
        CHECK(rep.h1 == doctest::Approx(h1).epsilon(1e-8));
    }
    SUBCASE("translation invariance of a traveling profile") {
        const double w = 2.0 * std::acos(-1.0) / ell;
        std::vector<double> u0(n), u1(n);
        for (int i = 0; i < n; ++i) {
            const double x = ell * i / n;
            u0[i] = 0.3 + std::sin(w * x);
            u1[i] = 0.3 + std::sin(w * (x - 1.234));
        }
        auto a = hamiltonians(u0, ell, 0.0);
        auto b = hamiltonians(u1, ell, 0.0);
        CHECK(a.h0 == doctest::Approx(b.h0).epsilon(1e-10));
        CHECK(a.h1 == doctest::Approx(b.h1).epsilon(1e-10));
    }
    SUBCASE("too few samples rejected") {
        std::vector<double> u(8, 1.0);
        CHECK_THROWS_AS(hamiltonians(u, ell, 0.0), ResolutionError);
    }
}

TEST_CASE("quadratic diagnostic matches hand evaluation") {
    PeakonEnsemble e;
    e.model = Model::CH;
    e.positions = {0.0, 2.0};
    e.amplitudes = {1.0, 3.0};
    // 1/2 sum_ij p_i p_j G(x_i - x_j)
    const double G0 = 0.5, G2 = 0.5 * std::exp(-2.0);
    CHECK(h0_quadratic(e) ==
          doctest::Approx(0.5 * (1.0 * G0 + 9.0 * G0 + 2.0 * 3.0 * G2)).epsilon(1e-14));
}
