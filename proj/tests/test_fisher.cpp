#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "sofi/fisher.hpp"

using namespace sofi;

namespace {

GaussianSummary make_summary(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sig,
                             const Eigen::VectorXd& dmu) {
    GaussianSummary s;
    s.mu = mu;
    s.sigma1 = sig;
    s.dmu_dtheta = dmu;
    s.mean_photons_per_frame = 1.0;
    return s;
}

} // namespace

TEST_CASE("scalar summary reduces to g^2 / variance", "[fisher]") {
    const auto s = make_summary(Eigen::VectorXd::Constant(1, 5.0),
                                Eigen::MatrixXd::Constant(1, 1, 2.5),
                                Eigen::VectorXd::Constant(1, 0.3));
    REQUIRE(gaussian_fi(s) == Catch::Approx(0.3 * 0.3 / 2.5).epsilon(1e-14));
}

TEST_CASE("fisher information is invariant under invertible recombinations", "[fisher]") {
    std::mt19937 gen(99);
    std::normal_distribution<double> nd;
    const int n = 6;
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::MatrixXd r(n, n), t(n, n);
        Eigen::VectorXd dmu(n);
        for (int i = 0; i < n; ++i) {
            dmu(i) = nd(gen);
            for (int j = 0; j < n; ++j) {
                r(i, j) = nd(gen);
                t(i, j) = nd(gen);
            }
        }
        const Eigen::MatrixXd sig =
            r * r.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
        t += 3.0 * Eigen::MatrixXd::Identity(n, n);  // keep it comfortably invertible
        const auto base = make_summary(Eigen::VectorXd::Zero(n), sig, dmu);
        const auto mapped = make_summary(Eigen::VectorXd::Zero(n), t * sig * t.transpose(),
                                         t * dmu);
        REQUIRE(gaussian_fi(mapped) == Catch::Approx(gaussian_fi(base)).epsilon(1e-8));
    }
}

TEST_CASE("duplicated statistics add nothing", "[fisher]") {
    Eigen::MatrixXd sig(3, 3);
    sig << 2.0, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 1.0;
    Eigen::VectorXd dmu(3);
    dmu << 0.4, -0.2, 0.7;
    const double base = gaussian_fi(make_summary(Eigen::VectorXd::Zero(3), sig, dmu));

    Eigen::MatrixXd sig4 = Eigen::MatrixXd::Zero(4, 4);
    sig4.topLeftCorner(3, 3) = sig;
    sig4.block(3, 0, 1, 3) = sig.row(0);
    sig4.block(0, 3, 3, 1) = sig.col(0);
    sig4(3, 3) = sig(0, 0);
    Eigen::VectorXd dmu4(4);
    dmu4 << dmu(0), dmu(1), dmu(2), dmu(0);
    const double dup = gaussian_fi(make_summary(Eigen::VectorXd::Zero(4), sig4, dmu4));
    REQUIRE(dup == Catch::Approx(base).epsilon(1e-9));
}

TEST_CASE("exact standard-imaging information: series, scaling, limits", "[fisher]") {
    REQUIRE(si_fisher_exact(0.0) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(si_fisher_exact(0.1) == Catch::Approx(si_fisher_series(0.1)).epsilon(1e-6));
    REQUIRE(si_fisher_exact(0.4) == Catch::Approx(si_fisher_series(0.4)).epsilon(2e-3));
    // two fully resolved sources pin theta at a quarter of the single-source rate
    REQUIRE(si_fisher_exact(20.0) == Catch::Approx(0.25).epsilon(1e-9));
    // length-unit scaling
    const double sigma = 1.7;
    REQUIRE(si_fisher_exact(0.3, sigma) ==
            Catch::Approx(si_fisher_exact(0.3 / sigma) / (sigma * sigma)).epsilon(1e-10));
    REQUIRE_THROWS_AS(si_fisher_exact(-0.1), std::invalid_argument);
}

TEST_CASE("pixelated reference approaches the exact one on fine grids", "[fisher]") {
    const auto fine = DetectorGeometry::covering(0.05, 10.0);
    for (double th : {0.1, 0.3}) {
        REQUIRE(si_grid_fi_per_photon(fine, th) ==
                Catch::Approx(si_fisher_exact(th)).epsilon(2e-3));
    }
    // coarser pixels can only lose information
    const auto coarse = DetectorGeometry::covering(1.0, 10.0);
    REQUIRE(si_grid_fi_per_photon(coarse, 0.3) < si_fisher_exact(0.3));
}

TEST_CASE("resolution gain of plain imaging without blinking is unity", "[fisher]") {
    const auto geom = DetectorGeometry::covering(0.5);
    const auto rep = rgl(SchemeSpec::parse("M"), geom, EmitterModel::simplified(0.0, 0.5, 30.0));
    REQUIRE(rep.converged);
    REQUIRE(rep.zeta == Catch::Approx(1.0).margin(1e-6));
    REQUIRE(rep.residual < 1e-4);
}

TEST_CASE("pixel-free gain of the mean image approaches one on fine grids", "[fisher]") {
    const auto model = EmitterModel::simplified(0.0, 0.5, 30.0);
    const auto rep = rgl_pix(SchemeSpec::parse("M"), DetectorGeometry::covering(0.1), model);
    REQUIRE(rep.converged);
    REQUIRE(rep.zeta == Catch::Approx(1.0).margin(2e-3));
    // and on coarse pixels it reflects the pixelation loss
    const auto coarse = rgl_pix(SchemeSpec::parse("M"), DetectorGeometry::covering(1.5), model);
    REQUIRE(coarse.zeta < 0.995);
    REQUIRE(coarse.zeta > 0.7);
}

TEST_CASE("full-data ceiling: trivial points, growth, asymptote", "[fisher]") {
    REQUIRE(zeta_max(0.5, 0.0, 1000.0) == 1.0);
    REQUIRE(zeta_max(0.0, 0.9, 1000.0) == 1.0);
    REQUIRE(zeta_max(1.0, 0.9, 1000.0) == 1.0);
    double prev = 0.0;
    for (double nbar : {10.0, 100.0, 1000.0, 10000.0}) {
        const double z = zeta_max(0.5, 1.0, nbar);
        REQUIRE(z > prev);
        prev = z;
    }
    REQUIRE(zeta_max(0.5, 1.0, 1e4) ==
            Catch::Approx(zeta_max_asymptotic(0.5, 1.0, 1e4)).epsilon(5e-3));
    REQUIRE(zeta_max_g_factor(0.3, 0.9, 4000.0) ==
            Catch::Approx(0.3 * 0.7 * std::pow(0.9, 4) /
                          (std::pow(1.1, 3) * (1.0 - 0.3 * 0.9)))
                .epsilon(2e-2));
    REQUIRE_THROWS_AS(zeta_max(-0.1, 0.5, 10.0), std::invalid_argument);
    REQUIRE_THROWS_AS(zeta_max(0.5, 1.5, 10.0), std::invalid_argument);
    REQUIRE_THROWS_AS(zeta_max(0.5, 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("frame-time optimizer agrees with a dense grid scan", "[fisher]") {
    const auto scheme = SchemeSpec::parse("M_AC2");
    const auto geom = DetectorGeometry::covering(0.5);
    const auto model = EmitterModel::markov(1.0, 1.0, 1.0, 300.0);
    const auto res = optimal_frame_time(scheme, geom, model, 1e-2, 1e2);
    REQUIRE_FALSE(res.boundary);

    double best = 0.0;
    for (int i = 0; i <= 120; ++i) {
        const double tau = std::pow(10.0, -2.0 + 4.0 * i / 120.0);
        DetectorGeometry g(geom.pixel_size, geom.n_pixels, tau, 0.0);
        best = std::max(best, rgl(scheme, g, model).zeta);
    }
    REQUIRE(res.zeta_at_opt >= best - 1e-6);

    // an interval that excludes the peak pins the result to its edge
    const auto clipped = optimal_frame_time(scheme, geom, model, 10.0, 1000.0);
    REQUIRE(clipped.boundary);
    REQUIRE_THROWS_AS(optimal_frame_time(scheme, geom, model, 1e-5, 1.0),
                      std::invalid_argument);
}

TEST_CASE("information curves grow with separation in the unresolved regime", "[fisher]") {
    const auto geom = DetectorGeometry::covering(0.5);
    const auto model = EmitterModel::simplified(0.0, 0.5, 30.0);
    const std::vector<double> thetas = {0.05, 0.1, 0.2, 0.4, 0.8};
    const auto curve = fi_per_photon_curve(SchemeSpec::parse("M"), geom, model, thetas);
    REQUIRE(curve.thetas == thetas);
    for (std::size_t i = 1; i < thetas.size(); ++i)
        REQUIRE(curve.fi_per_photon[i] > curve.fi_per_photon[i - 1]);
    REQUIRE(curve.fi_per_photon[2] ==
            Catch::Approx(fi_per_photon(SchemeSpec::parse("M"), geom, model, 0.2))
                .epsilon(1e-14));
}

TEST_CASE("two-photon measurement doubles the small-separation information", "[fisher]") {
    // per frame (two photons): theta^2/2, i.e. theta^2/4 per photon versus
    // theta^2/8 for standard imaging
    REQUIRE(antibunching_fi(0.02) == Catch::Approx(0.02 * 0.02 / 2.0).epsilon(1e-3));
    const auto rep = antibunching_rgl();
    REQUIRE(rep.converged);
    REQUIRE(rep.zeta == Catch::Approx(std::pow(2.0, 0.25)).margin(1e-3));
    // sigma scaling carries through the pair density
    REQUIRE(antibunching_fi(0.3, 2.0) ==
            Catch::Approx(antibunching_fi(0.15) / 4.0).epsilon(1e-10));
}
