#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "sofi/blinking.hpp"

using namespace sofi;

namespace {

EmitterModel random_markov(std::mt19937& gen) {
    std::uniform_real_distribution<double> alpha(0.05, 1.0), life(0.1, 5.0), pw(0.5, 20.0);
    return EmitterModel::markov(alpha(gen), life(gen), life(gen), pw(gen));
}

} // namespace

TEST_CASE("transition matrices are stochastic, stationary and a semigroup", "[blinking]") {
    std::mt19937 gen(7701);
    std::uniform_real_distribution<double> dt(0.0, 4.0);
    for (int rep = 0; rep < 50; ++rep) {
        const auto m = random_markov(gen);
        const double a = dt(gen), b = dt(gen);
        const auto ta = transition_matrix(a, m);
        const auto tb = transition_matrix(b, m);
        const auto tab = transition_matrix(a + b, m);
        for (int c = 0; c < 2; ++c) {
            REQUIRE(ta.col(c).sum() == Catch::Approx(1.0).margin(1e-13));
            REQUIRE(ta.col(c).minCoeff() >= -1e-15);
        }
        REQUIRE((ta * tb - tab).cwiseAbs().maxCoeff() < 1e-12);
        const auto st = stationary_state(m);
        const Eigen::Vector2d pi(st[0], st[1]);
        REQUIRE((ta * pi - pi).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("transition matrix limits: identity at dt=0, stationary at dt=inf", "[blinking]") {
    const auto m = EmitterModel::markov(0.8, 1.6, 0.4, 3.0);
    REQUIRE((transition_matrix(0.0, m) - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <
            1e-15);
    const auto st = stationary_state(m);
    REQUIRE(st[0] == Catch::Approx(0.2).epsilon(1e-14));  // off fraction 0.4/2.0
    REQUIRE(st[1] == Catch::Approx(0.8).epsilon(1e-14));
    const auto tinf = transition_matrix(1e9, m);
    for (int c = 0; c < 2; ++c) {
        REQUIRE(tinf(0, c) == Catch::Approx(st[0]).margin(1e-12));
        REQUIRE(tinf(1, c) == Catch::Approx(st[1]).margin(1e-12));
    }
    REQUIRE_THROWS_AS(transition_matrix(-0.1, m), std::invalid_argument);
}

TEST_CASE("brightness correlations: mean, exponential pair decay, sorted input", "[blinking]") {
    const auto m = EmitterModel::markov(0.7, 1.2, 0.8, 4.0);
    const double p = m.off_probability();
    const double g1 = p * m.q_off + (1.0 - p) * m.q_on;
    REQUIRE(brightness_correlation({0.0}, m) == Catch::Approx(m.mean_power * g1).epsilon(1e-14));

    // <P(0)P(t)> - <P>^2 decays like e^{-lambda t}
    const double lambda = 1.0 / m.tau_on + 1.0 / m.tau_off;
    const double mean = m.mean_power * g1;
    const double c0 = brightness_correlation({0.0, 0.5}, m) - mean * mean;
    const double c1 = brightness_correlation({0.0, 1.5}, m) - mean * mean;
    REQUIRE(c1 / c0 == Catch::Approx(std::exp(-lambda)).epsilon(1e-12));

    REQUIRE_THROWS_AS(brightness_correlation({1.0, 0.5}, m), std::invalid_argument);
    REQUIRE_THROWS_AS(brightness_correlation({}, m), std::invalid_argument);
    REQUIRE_THROWS_AS(brightness_correlation({0.0, 0.1, 0.2, 0.3, 0.4}, m),
                      std::invalid_argument);
}

namespace {

// fixed-order rule; the correlation is smooth on each ordered region, so
// nesting stays deterministic and machine-accurate
template <class F>
double gl64(F&& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 64>::integrate(std::forward<F>(f), a, b);
}

} // namespace

TEST_CASE("same-frame chi integrals match direct quadrature", "[blinking]") {
    const auto m = EmitterModel::markov(0.9, 0.7, 1.1, 2.5);
    const double tau = 0.8;
    const auto cs = chi_set(m, tau);

    REQUIRE(cs.chi1 == Catch::Approx(brightness_correlation({0.0}, m) * tau).epsilon(1e-13));

    // chi2 = int_0^tau int_0^tau <P(t1)P(t2)>, reduced to 2x the ordered region
    const double q2 =
        2.0 * gl64(
                  [&](double t2) {
                      return gl64(
                          [&](double t1) { return brightness_correlation({t1, t2}, m); }, 0.0,
                          t2);
                  },
                  0.0, tau);
    REQUIRE(cs.chi2_same() == Catch::Approx(q2).epsilon(1e-10));

    // chi3 over the cube = 3! x ordered region
    const double q3 =
        6.0 * gl64(
                  [&](double t3) {
                      return gl64(
                          [&](double t2) {
                              return gl64(
                                  [&](double t1) {
                                      return brightness_correlation({t1, t2, t3}, m);
                                  },
                                  0.0, t2);
                          },
                          0.0, t3);
                  },
                  0.0, tau);
    REQUIRE(cs.chi3_same() == Catch::Approx(q3).epsilon(1e-9));
}

TEST_CASE("lagged chi2 matches quadrature and decays geometrically", "[blinking]") {
    const auto m = EmitterModel::markov(0.85, 1.4, 0.9, 3.0);
    const double tau = 0.6;
    const auto cs = chi_set(m, tau, 6);

    // lag-2 frame pair by brute force: t1 in frame 1, t2 in frame 3
    const double q = gl64(
        [&](double t2) {
            return gl64([&](double t1) { return brightness_correlation({t1, t2}, m); }, 0.0,
                        tau);
        },
        2.0 * tau, 3.0 * tau);
    REQUIRE(cs.chi2[2] == Catch::Approx(q).epsilon(1e-10));

    for (int lag = 2; lag < 5; ++lag) {
        const double r = (cs.chi2[lag + 1 - 1] - cs.chi1 * cs.chi1) /
                         (cs.chi2[lag - 1] - cs.chi1 * cs.chi1);
        REQUIRE(r == Catch::Approx(cs.rho).epsilon(1e-10));
    }
}

TEST_CASE("closed tail sums equal the directly accumulated lag series", "[blinking]") {
    const auto m = EmitterModel::markov(0.75, 2.0, 1.5, 5.0);
    const double tau = 1.1;
    const int far = 2500;  // rho^far is far below double precision
    const auto cs = chi_set(m, tau, far);
    const double m1 = cs.chi1;

    double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
    const double chi3_inf = cs.chi3[far - 1], chi4_inf = cs.chi4[far - 1];
    for (int lag = 2; lag <= far; ++lag) {
        s1 += cs.chi2[lag - 1] - m1 * m1;
        s2 += cs.chi3[lag - 1] - chi3_inf;
        s3 += cs.chi4[lag - 1] - chi4_inf;
        s4 += cs.chi2[lag - 1] * cs.chi2[lag - 1] - m1 * m1 * m1 * m1;
    }
    REQUIRE(cs.s1 == Catch::Approx(s1).epsilon(1e-10));
    REQUIRE(cs.s2 == Catch::Approx(s2).epsilon(1e-10));
    REQUIRE(cs.s3 == Catch::Approx(s3).epsilon(1e-10));
    REQUIRE(cs.s4 == Catch::Approx(s4).epsilon(1e-10));
}

TEST_CASE("constant brightness kills every connected correlation", "[blinking]") {
    const auto m = EmitterModel::markov(0.0, 1.0, 1.0, 7.0);
    const auto cs = chi_set(m, 0.9, 4);
    const double m1 = cs.chi1;
    REQUIRE(cs.chi2_same() == Catch::Approx(m1 * m1).epsilon(1e-14));
    REQUIRE(cs.chi3_same() == Catch::Approx(m1 * m1 * m1).epsilon(1e-14));
    REQUIRE(cs.chi4_same() == Catch::Approx(m1 * m1 * m1 * m1).epsilon(1e-14));
    REQUIRE(cs.s1 == 0.0);
    REQUIRE(cs.s2 == 0.0);
    REQUIRE(cs.s3 == 0.0);
    REQUIRE(cs.s4 == 0.0);
}

TEST_CASE("bracket functions agree across the series/exact switch", "[blinking]") {
    // the switch sits at x = 0.5; both branches must agree in the overlap
    for (double x : {0.35, 0.45, 0.499, 0.6}) {
        const auto lo = detail::brackets(x * (1.0 - 1e-9));
        const auto hi = detail::brackets(x * (1.0 + 1e-9));
        REQUIRE(lo.j0b == Catch::Approx(hi.j0b).epsilon(1e-7));
        REQUIRE(lo.t4b == Catch::Approx(hi.t4b).epsilon(1e-6));
    }
    // the straddle is tight enough that any visible gap is series truncation
    const auto a = detail::brackets(0.5 - 5e-13);
    const auto b = detail::brackets(0.5 + 5e-13);
    REQUIRE(a.j0b == Catch::Approx(b.j0b).epsilon(1e-9));
    REQUIRE(a.p3b == Catch::Approx(b.p3b).epsilon(1e-9));
    REQUIRE(a.q3b == Catch::Approx(b.q3b).epsilon(1e-9));
    REQUIRE(a.p4b == Catch::Approx(b.p4b).epsilon(1e-9));
    REQUIRE(a.q4b == Catch::Approx(b.q4b).epsilon(1e-9));
    REQUIRE(a.t4b == Catch::Approx(b.t4b).epsilon(1e-9));
    REQUIRE(a.jfarb == Catch::Approx(b.jfarb).epsilon(1e-9));
}
