// Acceptance gate: one numbered check per release criterion, each printing a
// single PASS/FAIL line with the measured values and its pinned tolerance.
// Run with no arguments for the full gate, or pass criterion numbers.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "sofi/fisher.hpp"
#include "sofi/mc.hpp"

using namespace sofi;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

// 1. grid FI per photon of plain means at alpha=0 reproduces the
//    small-separation series theta^2/8 - theta^4/16 + theta^6/24
Outcome c1() {
    const auto geom = DetectorGeometry::covering(0.05);
    const auto model = EmitterModel::simplified(0.0, 0.5, 1.0);
    const double theta = 0.1;
    const double fi = fi_per_photon(SchemeSpec::parse("M"), geom, model, theta);
    const double ref = si_fisher_series(theta);
    const double rel = std::abs(fi / ref - 1.0);
    return {rel < 5e-3, fmt("fi/photon=%.8g series=%.8g rel=%.2e (tol 5e-3)", fi, ref, rel)};
}

// 2. AC2 ceiling: zeta in [1.17, 1.19] at nbar=1e5 and never above
//    2^(1/4)+1e-3 on a 20-point nbar grid
Outcome c2() {
    const auto geom = DetectorGeometry::covering(0.5);
    const auto ac2 = SchemeSpec::parse("AC2");
    const auto rep = rgl(ac2, geom, EmitterModel::simplified(1.0, 0.5, 1e5));
    bool pass = rep.converged && rep.zeta >= 1.17 && rep.zeta <= 1.19;
    const double cap = std::pow(2.0, 0.25) + 1e-3;
    double worst = 0.0, worst_nbar = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double nbar = std::pow(10.0, 6.0 * i / 19.0);
        const auto r = rgl(ac2, geom, EmitterModel::simplified(1.0, 0.5, nbar));
        if (r.zeta > worst) {
            worst = r.zeta;
            worst_nbar = nbar;
        }
        pass = pass && r.converged && r.zeta <= cap;
    }
    return {pass, fmt("zeta(1e5)=%.5f in [1.17,1.19], grid max=%.6f at nbar=%.3g (cap %.6f)",
                      rep.zeta, worst, worst_nbar, cap)};
}

// 3. AC2 crossover: zeta(AC2) crosses 1 at alpha = 0.83 +- 0.02
Outcome c3() {
    const auto geom = DetectorGeometry::covering(0.5);
    const auto ac2 = SchemeSpec::parse("AC2");
    auto f = [&](double alpha) {
        return rgl(ac2, geom, EmitterModel::simplified(alpha, 0.5, 1e5)).zeta - 1.0;
    };
    double lo = 0.6, hi = 0.95;
    double flo = f(lo), fhi = f(hi);
    if (!(flo < 0.0 && fhi > 0.0))
        return {false, fmt("no sign change: f(%.2f)=%.3g f(%.2f)=%.3g", lo, flo, hi, fhi)};
    for (int i = 0; i < 22; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    const double alpha_star = 0.5 * (lo + hi);
    return {std::abs(alpha_star - 0.83) <= 0.02,
            fmt("crossover alpha=%.4f (target 0.83 +- 0.02)", alpha_star)};
}

// 4. finite-nbar G factor is within 1% of its large-nbar limit at the
//    advertised operating points
Outcome c4() {
    auto dg = [](double alpha, double nbar) {
        const double p = 0.5;
        const double g = zeta_max_g_factor(p, alpha, nbar);
        const double a2 = 2.0 - alpha;
        const double ginf = p * (1.0 - p) * std::pow(alpha, 4) / (a2 * a2 * a2 * (1.0 - p * alpha));
        return std::abs(g / ginf - 1.0);
    };
    const double d1 = dg(0.2, 2500.0), d2 = dg(1.0, 50.0);
    return {d1 < 0.01 && d2 < 0.01,
            fmt("dG(0.2,2500)=%.3e dG(1,50)=%.3e (tol 1e-2)", d1, d2)};
}

// 5. zeta_max matches the asymptotic formula to 0.5% at nbar=1e4
Outcome c5() {
    const double z = zeta_max(0.5, 1.0, 1e4);
    const double za = zeta_max_asymptotic(0.5, 1.0, 1e4);
    const double rel = std::abs(z / za - 1.0);
    return {rel < 5e-3, fmt("zeta_max=%.8g asymptotic=%.8g rel=%.2e (tol 5e-3)", z, za, rel)};
}

// 6. full-data score oracle reproduces zeta_max within 2 standard errors
Outcome c6() {
    const auto model = EmitterModel::simplified(1.0, 0.5, 20.0);
    const double theta = 0.01;
    const auto res = score_fi_oracle(model, theta, 1000000, 20260815);
    const double fsi = si_fisher_exact(theta);
    const double zeta_hat = std::pow(res.fi_per_photon / fsi, 0.25);
    const double se = zeta_hat * res.fi_stderr / (4.0 * res.fi_per_photon);
    const double zm = zeta_max(0.5, 1.0, 20.0);
    const double z = std::abs(zeta_hat - zm) / se;
    return {z <= 2.0 && !res.low_precision,
            fmt("oracle zeta=%.5f +- %.5f vs zeta_max=%.5f, |z|=%.2f (tol 2)", zeta_hat, se, zm, z)};
}

// 7. frame-time limits in the markov model: both schemes collapse toward 1 at
//    extreme frame times and peak at an interior tau
Outcome c7() {
    const auto model = EmitterModel::markov(1.0, 1.0, 1.0, 300.0);
    bool pass = true;
    std::string det;
    for (const char* name : {"M_AC2", "M_XC2"}) {
        const auto scheme = SchemeSpec::parse(name);
        auto zeta_at = [&](double tau) {
            return rgl(scheme, DetectorGeometry::covering(0.5, 8.0, tau), model).zeta;
        };
        const double z_lo = zeta_at(1e-3), z_hi = zeta_at(1e3);
        double z_int = 0.0;
        for (double tau : {0.1, 0.3, 1.0, 3.0}) z_int = std::max(z_int, zeta_at(tau));
        const bool ok = z_lo < 1.05 && z_hi < 1.05 && z_int > z_lo && z_int > z_hi;
        pass = pass && ok;
        det += fmt("%s: z(1e-3)=%.4f z(1e3)=%.4f interior max=%.4f  ", name, z_lo, z_hi, z_int);
    }
    return {pass, det + "(caps 1.05)"};
}

// 8. scheme ordering chain up to the full-data ceiling on the two survey grids
Outcome c8() {
    const auto geom = DetectorGeometry::covering(0.5);
    const char* names[] = {"M", "M_AC2", "M_XC2S", "M_XC2W", "M_XC2"};
    double worst = 0.0;
    std::string worst_at = "none";
    auto check_point = [&](double alpha, double nbar) {
        double prev = 0.0;
        const auto model = EmitterModel::simplified(alpha, 0.5, nbar);
        for (const char* name : names) {
            const double z = rgl(SchemeSpec::parse(name), geom, model).zeta;
            const double gap = prev - z;  // positive = violation
            if (gap > worst) {
                worst = gap;
                worst_at = fmt("%s at alpha=%g nbar=%g", name, alpha, nbar);
            }
            prev = z;
        }
        const double gap = prev - zeta_max(0.5, alpha, nbar);
        if (gap > worst) {
            worst = gap;
            worst_at = fmt("zeta_max at alpha=%g nbar=%g", alpha, nbar);
        }
    };
    for (double alpha : {0.25, 0.5, 0.75, 1.0}) check_point(alpha, 500.0);
    for (double nbar : {10.0, 100.0, 1000.0, 10000.0}) check_point(1.0, nbar);
    return {worst <= 1e-3, fmt("worst ordering violation=%.2e (%s, slack 1e-3)", worst,
                               worst_at.c_str())};
}

// 9. background can only hurt: relative zeta shift <= 0 on the mu_B grid, and
//    plain means lose more than the cross-correlation scheme
Outcome c9() {
    double dz_m20 = 0.0, dz_xc20 = 0.0, worst = -1.0;
    bool pass = true;
    for (const char* name : {"M", "M_AC2", "M_XC2S", "M_XC2W", "M_XC2"}) {
        const auto scheme = SchemeSpec::parse(name);
        auto zeta_at = [&](double mu_b) {
            const auto geom = DetectorGeometry::covering(0.5, 8.0, 1.0, mu_b);
            return rgl(scheme, geom, EmitterModel::simplified(1.0, 0.5, 1000.0)).zeta;
        };
        const double z0 = zeta_at(0.0);
        for (double mu_b : {1.0, 5.0, 20.0}) {
            const double dz = (zeta_at(mu_b) - z0) / z0;
            pass = pass && dz <= 1e-9;
            worst = std::max(worst, dz);
            if (mu_b == 20.0) {
                if (std::string(name) == "M") dz_m20 = dz;
                if (std::string(name) == "M_XC2") dz_xc20 = dz;
            }
        }
    }
    pass = pass && std::abs(dz_m20) >= std::abs(dz_xc20);
    return {pass, fmt("max dzeta=%.2e (<=0), |dz(M)|=%.4f >= |dz(M+XC2)|=%.4f at mu_B=20", worst,
                      std::abs(dz_m20), std::abs(dz_xc20))};
}

// 10. anti-bunching: RGL = 2^(1/4) and F2 follows theta^2/(2 sigma^4)
Outcome c10() {
    const auto rep = antibunching_rgl();
    const double target = std::pow(2.0, 0.25);
    const double f2 = antibunching_fi(0.05);
    const double f2_ref = 0.05 * 0.05 / 2.0;
    const double rel = std::abs(f2 / f2_ref - 1.0);
    const bool pass = rep.converged && std::abs(rep.zeta - target) <= 1e-3 && rel < 0.01;
    return {pass, fmt("zeta=%.6f (target %.6f +- 1e-3), F2(0.05)=%.6g vs %.6g rel=%.2e (tol 1e-2)",
                      rep.zeta, target, f2, f2_ref, rel)};
}

// 11. Monte Carlo consistency of mean and per-frame covariance for both
//     blinking models.  Mean z uses the exact analytic standard error; the
//     covariance z uses the empirical block-spread error and is restricted to
//     entries carrying signal (magnitude >= 1e-5 photons^2 per frame); the
//     rest must agree to that same absolute floor.
Outcome c11() {
    const auto geom = DetectorGeometry::covering(0.5);
    const auto scheme = SchemeSpec::parse("M_XC2S");
    const double theta = 0.2;
    bool pass = true;
    std::string det;
    for (int kind = 0; kind < 2; ++kind) {
        const auto model = kind == 0 ? EmitterModel::simplified(0.9, 0.5, 100.0)
                                     : EmitterModel::markov(0.9, 1.0, 1.0, 100.0);
        const auto batch = simulate_frames(model, geom, theta, 1000000, 99 + kind);
        const auto emp = empirical_summary(batch, scheme, 200);
        const auto ana = scheme_summary(scheme, geom, model, theta);
        const int n = static_cast<int>(ana.mu.size());
        double zmean = 0.0, zcov = 0.0, floor_diff = 0.0;
        for (int i = 0; i < n; ++i)
            zmean = std::max(zmean, std::abs(emp.mean(i) - ana.mu(i)) /
                                        std::sqrt(ana.sigma1(i, i) / emp.n_frames));
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const double d = std::abs(emp.sigma1(i, j) - ana.sigma1(i, j));
                const double mag = std::abs(emp.sigma1(i, j)) + std::abs(ana.sigma1(i, j));
                if (mag >= 1e-5 && emp.sigma1_se(i, j) > 0.0)
                    zcov = std::max(zcov, d / emp.sigma1_se(i, j));
                else
                    floor_diff = std::max(floor_diff, d);
            }
        pass = pass && zmean < 5.0 && zcov < 5.0 && floor_diff <= 1e-5;
        det += fmt("%s: max|z| mean=%.2f cov=%.2f floor=%.1e  ",
                   kind == 0 ? "simplified" : "markov", zmean, zcov, floor_diff);
    }
    return {pass, det + "(tol z<5)"};
}

// 12. second-order cumulant image of a single emitter narrows to sigma/sqrt(2)
//     (two coincident emitters: independent blinkers, cumulants add, shape kept)
Outcome c12() {
    const auto geom = DetectorGeometry::covering(0.2);
    const auto model = EmitterModel::simplified(1.0, 0.5, 50.0);
    const auto batch = simulate_frames(model, geom, 0.0, 1000000, 4242);
    const auto k1 = cumulant_image_check(batch, 1);
    const auto k2 = cumulant_image_check(batch, 2);
    double s0 = 0.0, s2 = 0.0;
    for (int j = 0; j < geom.n_pixels; ++j) {
        const double x = geom.center(j);
        if (std::abs(x) > 3.0) continue;  // noise-only tail pixels
        const double c = k2(j) - k1(j);   // brightness-fluctuation part
        s0 += c;
        s2 += c * x * x;
    }
    const double width = std::sqrt(s2 / s0);
    const double target = 1.0 / std::sqrt(2.0);
    const double rel = std::abs(width / target - 1.0);
    return {rel < 0.02, fmt("width=%.5f target=%.5f rel=%.2e (tol 2e-2)", width, target, rel)};
}

using CriterionFn = Outcome (*)();
const CriterionFn kCriteria[] = {c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12};

} // namespace

int main(int argc, char** argv) {
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) {
        const int n = std::atoi(argv[i]);
        if (n < 1 || n > 12) {
            std::fprintf(stderr, "usage: %s [criterion 1..12 ...]\n", argv[0]);
            return 2;
        }
        which.push_back(n);
    }
    if (which.empty())
        for (int n = 1; n <= 12; ++n) which.push_back(n);

    int failures = 0;
    for (int n : which) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = kCriteria[n - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2d %s  %s  [%.1fs]\n", n, o.pass ? "PASS" : "FAIL",
                    o.detail.c_str(), dt);
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
