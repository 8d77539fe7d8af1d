#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sofi/mathutil.hpp"
#include "sofi/summary.hpp"

namespace sofi {

/// Fisher information of the whole measurement per frame,
/// F = (dmu/dtheta)^T Sigma1^{-1} (dmu/dtheta), via eigendecomposition of the
/// scale-normalized (correlation-form) covariance.  Normalizing before
/// thresholding keeps small-variance but informative components alive; the
/// threshold then only discards exactly redundant statistics, under which FI
/// is invariant.
inline double gaussian_fi(const GaussianSummary& s, double eigen_threshold = 1e-10) {
    const int n = static_cast<int>(s.mu.size());
    std::vector<int> keep;
    keep.reserve(n);
    for (int i = 0; i < n; ++i)
        if (s.sigma1(i, i) > 0.0) keep.push_back(i);
    if (keep.empty()) throw DegenerateSummaryError("summary has no usable components");

    const int m = static_cast<int>(keep.size());
    Eigen::VectorXd d(m), g(m);
    Eigen::MatrixXd c(m, m);
    for (int i = 0; i < m; ++i) d(i) = std::sqrt(s.sigma1(keep[i], keep[i]));
    for (int i = 0; i < m; ++i) {
        g(i) = s.dmu_dtheta(keep[i]) / d(i);
        for (int j = 0; j < m; ++j) c(i, j) = s.sigma1(keep[i], keep[j]) / (d(i) * d(j));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
    const Eigen::VectorXd& w = es.eigenvalues();
    const double lmax = w(m - 1);
    if (!(lmax > 0.0)) throw DegenerateSummaryError("covariance has no positive eigenvalues");
    const Eigen::VectorXd y = es.eigenvectors().transpose() * g;
    double fi = 0.0;
    for (int i = 0; i < m; ++i)
        if (w(i) > eigen_threshold * lmax) fi += y(i) * y(i) / w(i);
    return fi;
}

/// Standard-imaging reference on the same pixel grid: constant brightness,
/// no background, mean-only scheme, per detected photon.
inline double si_grid_fi_per_photon(const DetectorGeometry& geom, double theta,
                                    const PsfGaussian& psf = PsfGaussian()) {
    const SceneOverlaps ov = pixel_overlaps(geom, psf, theta);
    const auto act = detail::active_pixels(ov, 0.0);
    double fi = 0.0, mass = 0.0;
    for (int j : act) {
        const double m = 0.5 * (ov.u1[j] + ov.u2[j]);
        const double dm = 0.5 * (ov.du1_dtheta[j] + ov.du2_dtheta[j]);
        fi += dm * dm / m;
        mass += m;
    }
    return fi / mass;
}

inline GaussianSummary scheme_summary(const SchemeSpec& scheme, const DetectorGeometry& geom,
                                      const EmitterModel& model, double theta,
                                      WeightPolicy wp = WeightPolicy::snr_optimal,
                                      const PsfGaussian& psf = PsfGaussian()) {
    return model.kind == BlinkKind::simplified
               ? simplified_summary(scheme, geom, model, theta, wp, psf)
               : markov_summary(scheme, geom, model, theta, wp, psf);
}

inline double fi_per_photon(const SchemeSpec& scheme, const DetectorGeometry& geom,
                            const EmitterModel& model, double theta,
                            WeightPolicy wp = WeightPolicy::snr_optimal,
                            const PsfGaussian& psf = PsfGaussian()) {
    const GaussianSummary s = scheme_summary(scheme, geom, model, theta, wp, psf);
    return gaussian_fi(s) / s.mean_photons_per_frame;
}

struct FiCurve {
    std::vector<double> thetas;
    std::vector<double> fi_per_photon;
    SchemeSpec scheme;
    EmitterModel model;
    DetectorGeometry geometry;
};

inline FiCurve fi_per_photon_curve(const SchemeSpec& scheme, const DetectorGeometry& geom,
                                   const EmitterModel& model, const std::vector<double>& thetas,
                                   WeightPolicy wp = WeightPolicy::snr_optimal,
                                   const PsfGaussian& psf = PsfGaussian()) {
    FiCurve c{{}, {}, scheme, model, geom};
    c.thetas = thetas;
    c.fi_per_photon.reserve(thetas.size());
    for (double th : thetas)
        c.fi_per_photon.push_back(fi_per_photon(scheme, geom, model, th, wp, psf));
    return c;
}

/// Exact standard-imaging FI per photon for the two-source scene (continuous
/// detector): sigma^2 F = 1/4 - integral of
/// x^2 e^{-(theta-2x)^2 / 8 sigma^2} / (2 sigma^3 sqrt(2 pi) (e^{theta x / sigma^2} + 1)).
inline double si_fisher_exact(double theta, double sigma = 1.0) {
    if (theta < 0.0) throw std::invalid_argument("si_fisher_exact: theta must be >= 0");
    const double s2 = sigma * sigma;
    auto integrand = [&](double x) {
        const double z = theta * x / s2;
        const double w = z > 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
        const double e = std::exp(-(theta - 2.0 * x) * (theta - 2.0 * x) / (8.0 * s2));
        return x * x * e * w;
    };
    const double i = integrate(integrand, -10.0 * sigma, 10.0 * sigma, 1e-12);
    return (0.25 - i / (2.0 * sigma * s2 * std::sqrt(2.0 * kPi))) / s2;
}

/// Small-separation expansion of si_fisher_exact.
inline double si_fisher_series(double theta, double sigma = 1.0) {
    const double s2 = sigma * sigma, s4 = s2 * s2;
    const double t2 = theta * theta;
    return t2 / (8.0 * s4) - t2 * t2 / (16.0 * s4 * s2) + t2 * t2 * t2 / (24.0 * s4 * s4);
}

struct RglReport {
    enum class Kind { zeta, zeta_pix, zeta_max };
    double zeta = 0.0;
    Kind kind = Kind::zeta;
    std::array<double, 3> theta_grid_used{};
    double residual = 0.0;
    bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 3> kRglThetaGrid = {0.08, 0.04, 0.02};

/// theta -> 0 limit of an FI ratio that is smooth in theta^2: least-squares
/// fit of a + b theta^2 on the three-point grid, intercept to the 1/4 power.
inline RglReport extrapolate_ratio(const std::array<double, 3>& thetas,
                                   const std::array<double, 3>& ratios, RglReport::Kind kind) {
    Eigen::Matrix<double, 3, 2> a;
    Eigen::Vector3d r;
    for (int i = 0; i < 3; ++i) {
        a(i, 0) = 1.0;
        a(i, 1) = thetas[i] * thetas[i];
        r(i) = ratios[i];
    }
    const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(r);
    const Eigen::Vector3d fit = a * coef;
    RglReport rep;
    rep.kind = kind;
    rep.theta_grid_used = thetas;
    rep.residual = (fit - r).cwiseAbs().maxCoeff() / std::abs(coef(0));
    rep.converged = rep.residual < 1e-4 && coef(0) > 0.0;
    rep.zeta = coef(0) > 0.0 ? std::pow(coef(0), 0.25) : 0.0;
    return rep;
}

template <typename FiFn, typename RefFn>
RglReport rgl_generic(FiFn&& fi, RefFn&& ref, double sigma, RglReport::Kind kind) {
    std::array<double, 3> thetas{}, ratios{};
    for (int i = 0; i < 3; ++i) {
        const double th = kRglThetaGrid[i] * sigma;
        thetas[i] = th;
        ratios[i] = fi(th) / ref(th);
    }
    return extrapolate_ratio(thetas, ratios, kind);
}

} // namespace detail

/// Resolution gain limit of a scheme: fourth root of the theta->0 limit of
/// F(theta) / F_SI(theta), both per photon and on the same pixel grid.
inline RglReport rgl(const SchemeSpec& scheme, const DetectorGeometry& geom,
                     const EmitterModel& model, WeightPolicy wp = WeightPolicy::snr_optimal,
                     const PsfGaussian& psf = PsfGaussian()) {
    return detail::rgl_generic(
        [&](double th) { return fi_per_photon(scheme, geom, model, th, wp, psf); },
        [&](double th) { return si_grid_fi_per_photon(geom, th, psf); }, psf.sigma,
        RglReport::Kind::zeta);
}

/// Pixel-free variant: denominator is the ideal-detector limit theta^2/8 sigma^4.
inline RglReport rgl_pix(const SchemeSpec& scheme, const DetectorGeometry& geom,
                         const EmitterModel& model, WeightPolicy wp = WeightPolicy::snr_optimal,
                         const PsfGaussian& psf = PsfGaussian()) {
    const double s4 = std::pow(psf.sigma, 4);
    return detail::rgl_generic(
        [&](double th) { return fi_per_photon(scheme, geom, model, th, wp, psf); },
        [&](double th) { return th * th / (8.0 * s4); }, psf.sigma, RglReport::Kind::zeta_pix);
}

/// G factor of the full-data RGL ceiling: the expectation S over the photon
/// count n of the reciprocal mixture weight, assembled in log space so that
/// it stays finite for any nbar.
inline double zeta_max_g_factor(double p, double alpha, double nbar) {
    if (!(nbar > 0.0)) throw std::invalid_argument("zeta_max: nbar must be > 0");
    if (p <= 0.0 || p >= 1.0 || alpha == 0.0) return 0.0;
    const double a = alpha / (2.0 - alpha);
    const double b = p * p * (1.0 - a) * (1.0 - a);
    const double c = 2.0 * p * (1.0 - p);
    const double d = (1.0 - p) * (1.0 - p) * (1.0 + a) * (1.0 + a);
    // Poisson weights below 1e-14 of the peak are negligible in S
    const long lo = std::max(0L, static_cast<long>(nbar - 9.0 * std::sqrt(nbar) - 40.0));
    const long hi = static_cast<long>(nbar + 9.0 * std::sqrt(nbar) + 40.0) + 1;
    const double lognb = std::log(nbar);
    const double logc = std::log(c), logd = std::log(d);
    const double logb = b > 0.0 ? std::log(b) : 0.0;
    double s = 0.0;
    for (long n = lo; n <= hi; ++n) {
        const double lp = n * lognb - nbar - std::lgamma(static_cast<double>(n) + 1.0);
        double terms[3];
        int nt = 0;
        if (b > 0.0 && a < 1.0) terms[nt++] = logb + a * nbar + n * std::log1p(-a);
        terms[nt++] = logc;
        terms[nt++] = logd - a * nbar + n * std::log1p(a);
        double mx = terms[0];
        for (int i = 1; i < nt; ++i) mx = std::max(mx, terms[i]);
        double acc = 0.0;
        for (int i = 0; i < nt; ++i) acc += std::exp(terms[i] - mx);
        s += std::exp(lp - mx - std::log(acc));
    }
    const double a2 = 2.0 - alpha;
    return 2.0 * p * p * (1.0 - p) * (1.0 - p) * std::pow(alpha, 4) * s /
           (a2 * a2 * a2 * (1.0 - p * alpha));
}

/// RGL of the unreduced (full-data) measurement in the independent-frame model.
inline double zeta_max(double p, double alpha, double nbar) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("zeta_max: p must be in [0,1]");
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("zeta_max: alpha in [0,1]");
    if (p <= 0.0 || p >= 1.0 || alpha == 0.0) return 1.0;
    return std::pow(1.0 + zeta_max_g_factor(p, alpha, nbar) * nbar, 0.25);
}

/// Large-nbar limit of zeta_max.
inline double zeta_max_asymptotic(double p, double alpha, double nbar) {
    const double a2 = 2.0 - alpha;
    const double g = p * (1.0 - p) * std::pow(alpha, 4) / (a2 * a2 * a2 * (1.0 - p * alpha));
    return std::pow(1.0 + g * nbar, 0.25);
}

struct FrameTimeResult {
    double tau_opt = 0.0;
    double zeta_at_opt = 0.0;
    bool boundary = false;  // maximizer stuck at a search bound
};

/// Maximizes zeta over the frame time: coarse log grid (9 points per decade)
/// then golden-section refinement in log tau down to 1% bracket width.
inline FrameTimeResult optimal_frame_time(const SchemeSpec& scheme, const DetectorGeometry& geom,
                                          const EmitterModel& model, double tau_lo, double tau_hi,
                                          WeightPolicy wp = WeightPolicy::snr_optimal,
                                          const PsfGaussian& psf = PsfGaussian()) {
    if (!(tau_lo >= 1e-3 && tau_hi <= 1e3 && tau_lo < tau_hi))
        throw std::invalid_argument("optimal_frame_time: bounds must satisfy 1e-3 <= lo < hi <= 1e3");
    auto zeta_at = [&](double tau) {
        DetectorGeometry g(geom.pixel_size, geom.n_pixels, tau, geom.background_mean);
        return rgl(scheme, g, model, wp, psf).zeta;
    };
    const double llo = std::log(tau_lo), lhi = std::log(tau_hi);
    const int n = std::max(2, static_cast<int>(std::ceil(9.0 * (lhi - llo) / std::log(10.0))) + 1);
    int best = 0;
    double best_z = -1.0;
    std::vector<double> ls(n);
    for (int i = 0; i < n; ++i) {
        ls[i] = llo + (lhi - llo) * i / (n - 1);
        const double z = zeta_at(std::exp(ls[i]));
        if (z > best_z) {
            best_z = z;
            best = i;
        }
    }
    FrameTimeResult res;
    res.boundary = (best == 0 || best == n - 1);
    double a = ls[std::max(0, best - 1)], b = ls[std::min(n - 1, best + 1)];
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = zeta_at(std::exp(x1)), f2 = zeta_at(std::exp(x2));
    while (b - a > std::log(1.01)) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = zeta_at(std::exp(x2));
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = zeta_at(std::exp(x1));
        }
    }
    const double lx = 0.5 * (a + b);
    res.tau_opt = std::exp(lx);
    res.zeta_at_opt = zeta_at(res.tau_opt);
    if (res.zeta_at_opt < best_z) {
        res.tau_opt = std::exp(ls[best]);
        res.zeta_at_opt = best_z;
    }
    return res;
}

/// Frame FI of the two-photon anti-bunched measurement: each frame yields two
/// photons whose joint position density is the symmetrized product of the two
/// source PSFs.
inline double antibunching_fi(double theta, double sigma = 1.0) {
    if (theta < 0.0) throw std::invalid_argument("antibunching_fi: theta must be >= 0");
    auto u = [&](double x) { return gaussian_psf_value(x, sigma); };
    auto du = [&](double x) { return -x / (sigma * sigma) * gaussian_psf_value(x, sigma); };
    auto p = [&](double x1, double x2) {
        return 0.5 * (u(x1 + 0.5 * theta) * u(x2 - 0.5 * theta) +
                      u(x2 + 0.5 * theta) * u(x1 - 0.5 * theta));
    };
    auto dp = [&](double x1, double x2) {
        return 0.25 * (du(x1 + 0.5 * theta) * u(x2 - 0.5 * theta) -
                       u(x1 + 0.5 * theta) * du(x2 - 0.5 * theta) +
                       du(x2 + 0.5 * theta) * u(x1 - 0.5 * theta) -
                       u(x2 + 0.5 * theta) * du(x1 - 0.5 * theta));
    };
    const double lim = 8.0 * sigma + theta;
    auto outer = [&](double x1) {
        auto inner = [&](double x2) {
            const double pv = p(x1, x2);
            if (pv < 1e-290) return 0.0;
            const double dv = dp(x1, x2);
            return dv * dv / pv;
        };
        return integrate(inner, -lim, lim, 1e-13);
    };
    return integrate(outer, -lim, lim, 1e-11);
}

/// RGL of the anti-bunched measurement (per photon, ideal-detector baseline).
inline RglReport antibunching_rgl(double sigma = 1.0) {
    const double s4 = std::pow(sigma, 4);
    return detail::rgl_generic([&](double th) { return 0.5 * antibunching_fi(th, sigma); },
                               [&](double th) { return th * th / (8.0 * s4); }, sigma,
                               RglReport::Kind::zeta);
}

} // namespace sofi
