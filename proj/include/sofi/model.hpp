#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "sofi/errors.hpp"
#include "sofi/mathutil.hpp"

namespace sofi {

/// Gaussian point spread function; sigma is the internal length unit.
struct PsfGaussian {
    double sigma = 1.0;

    explicit PsfGaussian(double sigma_ = 1.0) : sigma(sigma_) {
        if (!(sigma > 0.0)) throw std::invalid_argument("PsfGaussian: sigma must be > 0");
    }
};

/// PSF density at position x.
inline double gaussian_psf_value(double x, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_psf_value: sigma must be > 0");
    return normal_pdf(x / sigma) / sigma;
}

/// One-dimensional pixel grid, symmetric about x = 0 with a pixel edge at 0,
/// so pixel j mirrors onto pixel n_pixels - 1 - j.
struct DetectorGeometry {
    double pixel_size = 0.5;   // in units of sigma
    int n_pixels = 32;         // even
    double frame_time = 1.0;   // in units of tau_0
    double background_mean = 0.0;  // photons per pixel per frame

    DetectorGeometry(double pixel_size_, int n_pixels_, double frame_time_ = 1.0,
                     double background_mean_ = 0.0)
        : pixel_size(pixel_size_), n_pixels(n_pixels_), frame_time(frame_time_),
          background_mean(background_mean_) {
        if (!(pixel_size > 0.0))
            throw std::invalid_argument("DetectorGeometry: pixel_size must be > 0");
        if (n_pixels < 2 || n_pixels % 2 != 0)
            throw std::invalid_argument("DetectorGeometry: n_pixels must be even and >= 2");
        if (!(frame_time > 0.0))
            throw std::invalid_argument("DetectorGeometry: frame_time must be > 0");
        if (background_mean < 0.0)
            throw std::invalid_argument("DetectorGeometry: background_mean must be >= 0");
    }

    /// Smallest even grid of pitch dx covering +-half_extent (default +-8 sigma).
    static DetectorGeometry covering(double dx, double half_extent = 8.0,
                                     double frame_time = 1.0, double background_mean = 0.0) {
        int m = static_cast<int>(std::ceil(2.0 * half_extent / dx));
        if (m % 2 != 0) ++m;
        return DetectorGeometry(dx, m, frame_time, background_mean);
    }

    double center(int j) const { return (j - 0.5 * n_pixels + 0.5) * pixel_size; }
    double left_edge(int j) const { return (j - 0.5 * n_pixels) * pixel_size; }
    double right_edge(int j) const { return (j - 0.5 * n_pixels + 1.0) * pixel_size; }
    double half_extent() const { return 0.5 * n_pixels * pixel_size; }
};

/// Pixel-integrated PSF masses for the two sources at -theta/2 and +theta/2,
/// together with their exact theta-derivatives.
struct SceneOverlaps {
    Eigen::VectorXd u1, u2;              // masses per pixel, one vector per source
    Eigen::VectorXd du1_dtheta, du2_dtheta;
};

/// Integrates the PSF over every pixel for both source positions.  The mass
/// integrals are differences of the Gaussian CDF; the derivatives are the
/// half-difference of PSF values at the pixel edges (chain rule on +-theta/2).
inline SceneOverlaps pixel_overlaps(const DetectorGeometry& geom, const PsfGaussian& psf,
                                    double theta) {
    if (theta < 0.0) throw std::invalid_argument("pixel_overlaps: theta must be >= 0");
    const int m = geom.n_pixels;
    const double s = psf.sigma;
    SceneOverlaps ov;
    ov.u1.resize(m); ov.u2.resize(m);
    ov.du1_dtheta.resize(m); ov.du2_dtheta.resize(m);
    for (int j = 0; j < m; ++j) {
        const double lo = geom.left_edge(j), hi = geom.right_edge(j);
        ov.u1[j] = normal_cdf((hi + 0.5 * theta) / s) - normal_cdf((lo + 0.5 * theta) / s);
        ov.u2[j] = normal_cdf((hi - 0.5 * theta) / s) - normal_cdf((lo - 0.5 * theta) / s);
        ov.du1_dtheta[j] = 0.5 * (gaussian_psf_value(hi + 0.5 * theta, s) -
                                  gaussian_psf_value(lo + 0.5 * theta, s));
        ov.du2_dtheta[j] = -0.5 * (gaussian_psf_value(hi - 0.5 * theta, s) -
                                   gaussian_psf_value(lo - 0.5 * theta, s));
    }
    const double mass1 = ov.u1.sum(), mass2 = ov.u2.sum();
    const double worst = std::min(mass1, mass2);
    if (worst < 1.0 - 1e-8)
        throw CoverageError("pixel grid does not cover the scene (captured mass " +
                                std::to_string(worst) + ")", worst);
    return ov;
}

} // namespace sofi
