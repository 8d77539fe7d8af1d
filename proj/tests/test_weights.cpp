#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "sofi/fisher.hpp"

using namespace sofi;

namespace {

double snr(const Eigen::VectorXd& w, const Eigen::VectorXd& kap, const Eigen::MatrixXd& a) {
    return w.dot(kap) / std::sqrt(w.dot(a * w));
}

} // namespace

TEST_CASE("degenerate and symmetric weight systems", "[weights]") {
    REQUIRE(xc2_weights(Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Identity(1, 1))(0) == 1.0);

    // exchange-symmetric two-pair system has no reason to prefer either pair
    Eigen::VectorXd kap(2);
    kap << 0.7, 0.7;
    Eigen::MatrixXd a(2, 2);
    a << 2.0, 0.3, 0.3, 2.0;
    const auto w = xc2_weights(kap, a);
    REQUIRE(w(0) == 1.0);
    REQUIRE(w(1) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("solved weights beat uniform and single-pair readouts", "[weights]") {
    std::mt19937 gen(4242);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.2, 2.0);
    for (int rep = 0; rep < 100; ++rep) {
        const int k = 2 + rep % 5;
        Eigen::MatrixXd r(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) r(i, j) = nd(gen);
        const Eigen::MatrixXd a =
            r * r.transpose() + 0.05 * Eigen::MatrixXd::Identity(k, k);
        Eigen::VectorXd kap(k);
        for (int i = 0; i < k; ++i) kap(i) = ud(gen) * (nd(gen) > 0 ? 1.0 : -1.0);

        const auto w = xc2_weights(kap, a);
        // stationarity of the SNR under the w1 = 1 gauge
        const double scale = a.cwiseAbs().maxCoeff() / kap.cwiseAbs().minCoeff() *
                             std::max(1.0, w.cwiseAbs().maxCoeff());
        for (int m = 1; m < k; ++m) {
            double resid = 0.0;
            for (int i = 0; i < k; ++i)
                resid += w(i) * (a(m, i) / kap(m) - a(0, i) / kap(0));
            REQUIRE(std::abs(resid) < 1e-8 * scale);
        }
        const double sw = std::abs(snr(w, kap, a));
        REQUIRE(sw >= std::abs(snr(Eigen::VectorXd::Ones(k), kap, a)) - 1e-10);
        REQUIRE(sw >= std::abs(snr(Eigen::VectorXd::Unit(k, 0), kap, a)) - 1e-10);
    }
}

TEST_CASE("singular weight systems are reported, not silently patched", "[weights]") {
    Eigen::VectorXd kap(2);
    Eigen::MatrixXd a(2, 2);
    kap << 1.0, 0.0;  // vanishing pair covariance
    a << 1.0, 0.1, 0.1, 1.0;
    REQUIRE_THROWS_AS(xc2_weights(kap, a), IllConditionedWeightsError);

    kap << 1.0, 1.0;  // proportional rows make the reduced system singular
    a << 1.0, 1.0, 1.0, 1.0;
    REQUIRE_THROWS_AS(xc2_weights(kap, a), IllConditionedWeightsError);

    REQUIRE_THROWS_AS(xc2_weights(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3)),
                      IllConditionedWeightsError);
    REQUIRE_THROWS_AS(xc2_weights(Eigen::VectorXd::Ones(3), Eigen::MatrixXd::Identity(2, 2)),
                      std::invalid_argument);
}

TEST_CASE("uniform policy reproduces the plain centroid sums", "[weights]") {
    const DetectorGeometry geom(0.5, 24, 1.0, 0.5);
    const auto model = EmitterModel::simplified(0.8, 0.5, 50.0);
    const double theta = 0.3;
    const auto forced = simplified_summary(SchemeSpec::parse("M_XC2W"), geom, model, theta,
                                           WeightPolicy::uniform);
    const auto plain = simplified_summary(SchemeSpec::parse("M_XC2S"), geom, model, theta);
    REQUIRE((forced.mu - plain.mu).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE((forced.sigma1 - plain.sigma1).cwiseAbs().maxCoeff() <
            1e-12 * plain.sigma1.cwiseAbs().maxCoeff());
    REQUIRE(gaussian_fi(forced) == Catch::Approx(gaussian_fi(plain)).epsilon(1e-12));
}

TEST_CASE("snr weights sit between the plain sum and the full pair set", "[weights]") {
    const DetectorGeometry geom(0.5, 24);
    const auto model = EmitterModel::simplified(0.9, 0.5, 50.0);
    const double theta = 0.2, slack = 1.0 + 1e-9;
    const double fs = gaussian_fi(simplified_summary(SchemeSpec::parse("M_XC2S"), geom, model,
                                                     theta));
    const auto sw = simplified_summary(SchemeSpec::parse("M_XC2W"), geom, model, theta);
    REQUIRE(sw.uniform_weight_fallback == false);
    const double fw = gaussian_fi(sw);
    const double fx = gaussian_fi(simplified_summary(SchemeSpec::parse("M_XC2"), geom, model,
                                                     theta));
    REQUIRE(fw <= fx * slack);  // weighted sums are functions of the pair products
    REQUIRE(fs <= fx * slack);
}

TEST_CASE("no blinking signal forces the documented uniform fallback", "[weights]") {
    const DetectorGeometry geom(0.5, 24);
    const auto model = EmitterModel::simplified(0.0, 0.5, 50.0);
    const auto s = simplified_summary(SchemeSpec::parse("M_XC2W"), geom, model, 0.3);
    REQUIRE(s.uniform_weight_fallback == true);
    const auto plain = simplified_summary(SchemeSpec::parse("M_XC2S"), geom, model, 0.3);
    REQUIRE((s.mu - plain.mu).cwiseAbs().maxCoeff() < 1e-12);
}
