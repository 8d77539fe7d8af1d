#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "sofi/fisher.hpp"
#include "sofi/mc.hpp"

using namespace sofi;

namespace {

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_CASE("simulated batches are seed-deterministic", "[mc]") {
    const auto geom = DetectorGeometry::covering(1.0, 7.0);
    const auto model = EmitterModel::markov(0.9, 1.0, 1.5, 20.0);
    const auto a = simulate_frames(model, geom, 0.3, 500, 42);
    const auto b = simulate_frames(model, geom, 0.3, 500, 42);
    const auto c = simulate_frames(model, geom, 0.3, 500, 43);
    REQUIRE(a.counts == b.counts);
    REQUIRE(a.counts != c.counts);
    REQUIRE_THROWS_AS(simulate_frames(model, geom, 0.3, 0, 1), std::invalid_argument);
}

TEST_CASE("constant emitters produce plain shot noise", "[mc]") {
    const auto geom = DetectorGeometry::covering(1.0, 7.0);
    const auto model = EmitterModel::simplified(0.0, 0.5, 50.0);
    const long n = 200000;
    const auto batch = simulate_frames(model, geom, 0.2, n, 7);
    const int m = geom.n_pixels;
    for (int j = 0; j < m; ++j) {
        double s1 = 0.0, s2 = 0.0;
        for (long f = 0; f < n; ++f) {
            const double x = batch.at(f, j);
            s1 += x;
            s2 += x * x;
        }
        const double mean = s1 / n, var = s2 / n - mean * mean;
        if (mean > 5.0) REQUIRE(var / mean == Catch::Approx(1.0).margin(0.015));
    }
}

TEST_CASE("background photons land at the configured rate", "[mc]") {
    const DetectorGeometry geom(1.0, 14, 1.0, 3.0);
    const auto model = EmitterModel::simplified(0.5, 0.5, 10.0);
    const long n = 100000;
    const auto batch = simulate_frames(model, geom, 0.1, n, 11);
    // edge pixels see almost pure background
    double s = 0.0;
    for (long f = 0; f < n; ++f) s += batch.at(f, 0);
    const double mean = s / n;
    REQUIRE(std::abs(mean - 3.0) < 5.0 * std::sqrt(3.0 / n) + 0.01);
}

TEST_CASE("frame-to-frame brightness correlation decays at the switching rate", "[mc]") {
    // tau_on = tau_off = 4 frame times puts several correlation times in view
    const auto geom = DetectorGeometry::covering(1.0, 7.0);
    const auto model = EmitterModel::markov(1.0, 4.0, 4.0, 30.0);
    const long n = 400000;
    const auto batch = simulate_frames(model, geom, 0.0, n, 314);
    const int m = geom.n_pixels;

    std::vector<double> tot(n, 0.0);
    double mean = 0.0;
    for (long f = 0; f < n; ++f) {
        for (int j = 0; j < m; ++j) tot[f] += batch.at(f, j);
        mean += tot[f];
    }
    mean /= static_cast<double>(n);

    // lag covariances are exactly geometric from lag 2 on
    std::vector<double> cov(6, 0.0);
    for (int lag = 2; lag <= 5; ++lag) {
        double s = 0.0;
        for (long f = 0; f + lag < n; ++f) s += (tot[f] - mean) * (tot[f + lag] - mean);
        cov[lag] = s / static_cast<double>(n - lag);
        REQUIRE(cov[lag] > 0.0);
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int lag = 2; lag <= 5; ++lag) {
        sx += lag;
        sy += std::log(cov[lag]);
        sxx += lag * lag;
        sxy += lag * std::log(cov[lag]);
    }
    const double slope = (4.0 * sxy - sx * sy) / (4.0 * sxx - sx * sx);
    const double lambda_tau = (1.0 / model.tau_on + 1.0 / model.tau_off) * geom.frame_time;
    REQUIRE(slope == Catch::Approx(-lambda_tau).epsilon(0.05));
}

TEST_CASE("empirical summaries agree with the analytic ones", "[mc]") {
    const auto geom = DetectorGeometry::covering(1.0, 7.0);
    const auto scheme = SchemeSpec::parse("M_XC2S");
    const double theta = 0.3;
    struct Case {
        EmitterModel model;
        long block;
        std::uint64_t seed;
    };
    const Case cases[] = {{EmitterModel::simplified(0.9, 0.5, 40.0), 1, 501},
                          {EmitterModel::markov(0.9, 1.0, 1.0, 40.0), 200, 502}};
    for (const auto& tc : cases) {
        const auto batch = simulate_frames(tc.model, geom, theta, 150000, tc.seed);
        const auto emp = empirical_summary(batch, scheme, tc.block);
        const auto ana = scheme_summary(scheme, geom, tc.model, theta);
        const int n = static_cast<int>(ana.mu.size());
        REQUIRE(emp.mean.size() == n);

        double zm = 0.0, zc = 0.0;
        for (int i = 0; i < n; ++i)
            zm = std::max(zm, std::abs(emp.mean(i) - ana.mu(i)) /
                                  std::sqrt(ana.sigma1(i, i) / emp.n_frames));
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                if (std::abs(emp.sigma1(i, j)) + std::abs(ana.sigma1(i, j)) < 1e-4) continue;
                if (emp.sigma1_se(i, j) == 0.0) continue;
                zc = std::max(zc, std::abs(emp.sigma1(i, j) - ana.sigma1(i, j)) /
                                      emp.sigma1_se(i, j));
            }
        REQUIRE(zm < 5.0);
        REQUIRE(zc < 5.0);
    }
}

TEST_CASE("sample-mean centering shifts quadratic statistics by the exact identity",
          "[mc]") {
    const auto geom = DetectorGeometry::covering(1.0, 7.0);
    const auto model = EmitterModel::simplified(0.8, 0.5, 30.0);
    const auto scheme = SchemeSpec::parse("M_AC2");
    const auto batch = simulate_frames(model, geom, 0.2, 60000, 909);
    const auto frozen = empirical_summary(batch, scheme);
    const auto centered = empirical_summary(batch, scheme, 0, WeightPolicy::snr_optimal,
                                            PsfGaussian(), true);
    const auto ana = scheme_summary(scheme, geom, model, 0.2);
    const int m = geom.n_pixels;
    for (int j = 0; j < m; ++j) {
        // means are identical; the variance component drops by (xbar - mu)^2
        REQUIRE(centered.mean(j) == Catch::Approx(frozen.mean(j)).margin(1e-12));
        const double dbar = frozen.mean(j) - ana.mu(j);
        const double shift = centered.mean(m + j) - frozen.mean(m + j);
        REQUIRE(shift == Catch::Approx(-dbar * dbar).margin(1e-10));
        // and that drop is an O(1/M) effect in the first place
        REQUIRE(dbar * dbar < 25.0 * ana.sigma1(j, j) / static_cast<double>(batch.n_frames));
    }
}

TEST_CASE("temporal k-statistics reproduce the analytic per-pixel cumulants", "[mc]") {
    const auto geom = DetectorGeometry::covering(0.5, 6.0);
    const auto model = EmitterModel::simplified(1.0, 0.5, 60.0);
    const long n = 100000;
    const auto batch = simulate_frames(model, geom, 0.0, n, 2718);
    const auto k1 = cumulant_image_check(batch, 1);
    const auto k2 = cumulant_image_check(batch, 2);
    const auto ana = scheme_summary(SchemeSpec::parse("M"), geom, model, 0.0);
    const int m = geom.n_pixels;
    for (int j = 0; j < m; ++j) {
        if (ana.mu(j) < 1.0) continue;
        const double se1 = std::sqrt(ana.sigma1(j, j) / n);
        REQUIRE(std::abs(k1(j) - ana.mu(j)) < 5.0 * se1);
        // crude variance bound for the k2 estimator: 3 m4 / n
        const double nu = ana.mu(j);
        const double excess = ana.sigma1(j, j) - nu;
        const double se2 = std::sqrt(3.0 * (3.0 * ana.sigma1(j, j) * ana.sigma1(j, j) +
                                            excess * excess) / n);
        REQUIRE(std::abs(k2(j) - ana.sigma1(j, j)) < 5.0 * se2);
    }
    REQUIRE_THROWS_AS(cumulant_image_check(batch, 5), std::invalid_argument);
}

TEST_CASE("frame files round-trip exactly and reject corruption", "[mc]") {
    const auto geom = DetectorGeometry::covering(1.0, 7.0, 0.8, 0.4);
    const auto model = EmitterModel::markov(0.7, 1.2, 0.9, 15.0);
    const auto batch = simulate_frames(model, geom, 0.25, 1000, 77);
    const auto path = temp_path("sofi_mc_roundtrip.frames");
    dump_frames(batch, path);
    const auto back = load_frames(path);
    REQUIRE(back.counts == batch.counts);
    REQUIRE(back.theta == batch.theta);
    REQUIRE(back.seed == batch.seed);
    REQUIRE(back.n_frames == batch.n_frames);
    REQUIRE(back.model.kind == BlinkKind::markov);
    REQUIRE(back.model.q_on == Catch::Approx(batch.model.q_on).epsilon(1e-15));
    REQUIRE(back.model.tau_on == batch.model.tau_on);
    REQUIRE(back.geometry.pixel_size == batch.geometry.pixel_size);
    REQUIRE(back.geometry.background_mean == batch.geometry.background_mean);

    // truncated payload must not load silently
    const auto whole = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, whole - 16);
    REQUIRE_THROWS(load_frames(path));
    std::ofstream(path) << "not a frame file\n";
    REQUIRE_THROWS(load_frames(path));
    std::remove(path.c_str());
}

TEST_CASE("score oracle reproduces the standard-imaging law without blinking", "[mc]") {
    const auto model = EmitterModel::simplified(0.0, 0.5, 15.0);
    const double theta = 0.005;  // inside the small-angle validity window
    const auto res = score_fi_oracle(model, theta, 150000, 1234);
    REQUIRE(res.n_samples == 150000);
    REQUIRE_FALSE(res.low_precision);
    REQUIRE(res.mean_photons == Catch::Approx(15.0).epsilon(1e-12));
    const double target = si_fisher_exact(theta);
    REQUIRE(std::abs(res.fi_per_photon - target) < 4.0 * res.fi_stderr);
}

TEST_CASE("score oracle information scales like theta squared", "[mc]") {
    const auto model = EmitterModel::simplified(0.8, 0.5, 25.0);
    const auto lo = score_fi_oracle(model, 0.004, 120000, 555);
    const auto hi = score_fi_oracle(model, 0.008, 120000, 556);
    const double ratio = hi.fi_per_photon / lo.fi_per_photon;
    const double se = ratio * std::hypot(hi.fi_stderr / hi.fi_per_photon,
                                         lo.fi_stderr / lo.fi_per_photon);
    REQUIRE(std::abs(ratio - 4.0) < 4.0 * se);
}

TEST_CASE("oracle and summary preconditions are enforced", "[mc]") {
    const auto markov = EmitterModel::markov(0.5, 1.0, 1.0, 10.0);
    const auto simple = EmitterModel::simplified(0.5, 0.5, 10.0);
    REQUIRE_THROWS_AS(score_fi_oracle(markov, 0.01, 1000, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(score_fi_oracle(EmitterModel::simplified(0.5, 0.5, 500.0), 0.001, 1000, 1),
                      std::invalid_argument);  // nbar beyond the brute-force budget
    REQUIRE_THROWS_AS(score_fi_oracle(simple, 0.5, 1000, 1),
                      std::invalid_argument);  // theta outside the small-angle window
    REQUIRE_THROWS_AS(score_fi_oracle(simple, 0.01, 50, 1), std::invalid_argument);

    const auto geom = DetectorGeometry::covering(1.0, 7.0);
    const auto batch = simulate_frames(simple, geom, 0.1, 100, 5);
    REQUIRE_THROWS_AS(empirical_summary(batch, SchemeSpec::parse("M"), 50),
                      std::invalid_argument);  // only 2 blocks
    REQUIRE_THROWS_AS(empirical_summary(batch, SchemeSpec::parse("M"), -1),
                      std::invalid_argument);
}
