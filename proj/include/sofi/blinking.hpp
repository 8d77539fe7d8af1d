#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "sofi/emitter.hpp"

namespace sofi {

/// Two-state transition matrix over [off, on]: T(dt)[b][a] = P(b at t+dt | a at t).
/// Closed form from the generator spectrum {0, -lambda}, lambda = 1/tau_on + 1/tau_off.
inline Eigen::Matrix2d transition_matrix(double dt, const EmitterModel& model) {
    if (model.kind != BlinkKind::markov)
        throw std::invalid_argument("transition_matrix: markov kind required");
    if (dt < 0.0) throw std::invalid_argument("transition_matrix: dt must be >= 0");
    const double lambda = 1.0 / model.tau_on + 1.0 / model.tau_off;
    const double p_off = model.tau_off / (model.tau_on + model.tau_off);
    Eigen::Matrix2d pi;
    pi << p_off, p_off, 1.0 - p_off, 1.0 - p_off;
    return pi + std::exp(-lambda * dt) * (Eigen::Matrix2d::Identity() - pi);
}

inline std::array<double, 2> stationary_state(const EmitterModel& model) {
    if (model.kind != BlinkKind::markov)
        throw std::invalid_argument("stationary_state: markov kind required");
    const double s = model.tau_on + model.tau_off;
    return {model.tau_off / s, model.tau_on / s};
}

/// Stationary multi-time brightness correlation <P(t1)...P(tr)>, r <= 4.
/// Chain of per-step matrices: start from the stationary state weighted by the
/// brightness vector, then alternate transition and brightness factors.
inline double brightness_correlation(const std::vector<double>& times,
                                     const EmitterModel& model) {
    if (model.kind != BlinkKind::markov)
        throw std::invalid_argument("brightness_correlation: markov kind required");
    if (times.empty() || times.size() > 4)
        throw std::invalid_argument("brightness_correlation: need 1..4 times");
    if (!std::is_sorted(times.begin(), times.end()))
        throw std::invalid_argument("brightness_correlation: times must be sorted");
    const auto st = stationary_state(model);
    const Eigen::Vector2d q(model.q_off * model.mean_power, model.q_on * model.mean_power);
    Eigen::Vector2d v = Eigen::Vector2d(st[0], st[1]).cwiseProduct(q);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const Eigen::Matrix2d t = transition_matrix(times[i] - times[i - 1], model);
        v = q.cwiseProduct(t * v);
    }
    return v.sum();
}

namespace detail {

/// Connected-correlation coefficients of the stationary two-level process:
/// mean M, variance V and the two coefficients that multiply the exponential
/// link products in the 3- and 4-point functions.
struct CorrCoeffs {
    double lambda, mean, var, c3, c4;
};

inline CorrCoeffs corr_coeffs(const EmitterModel& model) {
    const double lambda = 1.0 / model.tau_on + 1.0 / model.tau_off;
    const double p = model.off_probability();
    const double pw = model.mean_power;
    std::array<double, 5> g;
    for (int k = 0; k <= 4; ++k)
        g[k] = p * std::pow(model.q_off, k) + (1.0 - p) * std::pow(model.q_on, k);
    CorrCoeffs c;
    c.lambda = lambda;
    c.mean = pw * g[1];
    c.var = pw * pw * (g[2] - g[1] * g[1]);
    c.c3 = std::pow(pw, 3) * (g[3] - 2.0 * g[1] * g[2] + std::pow(g[1], 3));
    c.c4 = std::pow(pw, 4) *
           (g[4] - 2.0 * g[1] * g[3] - g[2] * g[2] + 3.0 * g[1] * g[1] * g[2] -
            std::pow(g[1], 4));
    return c;
}

/// Bracket functions appearing in the frame integrals of the correlation
/// functions.  Near x=0 every bracket is a high-order difference of
/// exponentials, so a Taylor branch takes over below x=0.5 (both branches
/// agree with a 50-digit reference to better than 5e-12 relative).
struct Brackets {
    double j0b, p3b, q3b, p4b, q4b, t4b, jfarb;
};

inline double horner_asc(const double* c, int n, double x) {
    double acc = 0.0;
    for (int i = n - 1; i >= 0; --i) acc = acc * x + c[i];
    return acc;
}

inline Brackets brackets(double x) {
    Brackets b;
    if (x < 0.5) {
        static const double cj0[] = {0, 0, 1.0 / 2, -1.0 / 6, 1.0 / 24, -1.0 / 120,
                                     1.0 / 720, -1.0 / 5040, 1.0 / 40320, -1.0 / 362880,
                                     1.0 / 3628800, -1.0 / 39916800, 1.0 / 479001600,
                                     -1.0 / 6227020800};
        static const double cp3[] = {0, 0, 0, 1.0 / 3, -1.0 / 12, 1.0 / 60, -1.0 / 360,
                                     1.0 / 2520, -1.0 / 20160, 1.0 / 181440, -1.0 / 1814400,
                                     1.0 / 19958400, -1.0 / 239500800, 1.0 / 3113510400};
        static const double cq3[] = {0, 0, 0, 1.0 / 6, -1.0 / 12, 1.0 / 40, -1.0 / 180,
                                     1.0 / 1008, -1.0 / 6720, 1.0 / 51840, -1.0 / 453600,
                                     1.0 / 4435200, -1.0 / 47900160, 1.0 / 566092800};
        static const double cp4[] = {0, 0, 0, 0, 1.0 / 4, -1.0 / 20, 1.0 / 120, -1.0 / 840,
                                     1.0 / 6720, -1.0 / 60480, 1.0 / 604800, -1.0 / 6652800,
                                     1.0 / 79833600, -1.0 / 1037836800};
        static const double cq4[] = {0, 0, 0, 0, 1.0 / 12, -1.0 / 30, 1.0 / 120, -1.0 / 630,
                                     1.0 / 4032, -1.0 / 30240, 1.0 / 259200, -1.0 / 2494800,
                                     1.0 / 26611200, -1.0 / 311351040};
        static const double ct4[] = {0, 0, 0, 0, 1.0 / 12, -1.0 / 20, 1.0 / 60, -1.0 / 252,
                                     1.0 / 1344, -1.0 / 8640, 1.0 / 64800, -1.0 / 554400,
                                     1.0 / 5322240, -1.0 / 56609280};
        static const double cjf[] = {0, 0, 1.0 / 2, -1.0 / 3, 1.0 / 8, -1.0 / 30, 1.0 / 144,
                                     -1.0 / 840, 1.0 / 5760, -1.0 / 45360, 1.0 / 403200,
                                     -1.0 / 3991680, 1.0 / 43545600, -1.0 / 518918400};
        b.j0b = horner_asc(cj0, 14, x);
        b.p3b = horner_asc(cp3, 14, x);
        b.q3b = horner_asc(cq3, 14, x);
        b.p4b = horner_asc(cp4, 14, x);
        b.q4b = horner_asc(cq4, 14, x);
        b.t4b = horner_asc(ct4, 14, x);
        b.jfarb = horner_asc(cjf, 14, x);
    } else {
        const double r = std::exp(-x);
        b.j0b = x - 1.0 + r;
        b.p3b = x * x - 2.0 * x + 2.0 - 2.0 * r;
        b.q3b = x * (1.0 + r) - 2.0 * (1.0 - r);
        b.p4b = x * x * x - 3.0 * x * x + 6.0 * x - 6.0 + 6.0 * r;
        b.q4b = x * x - 4.0 * x - 2.0 * x * r + 6.0 - 6.0 * r;
        b.t4b = x * x * r + 2.0 * x + 4.0 * x * r - 6.0 + 6.0 * r;
        b.jfarb = 1.0 - r * (1.0 + x);
    }
    return b;
}

} // namespace detail

/// Frame integrals of the brightness correlations.  chi1 is the mean photon
/// mass per frame; chiK[m-1] integrates the K-point correlation with the first
/// K-1 times in frame 1 and the last in frame m.  The inter-frame dependence
/// is purely geometric in rho = e^{-lambda*tau}, which yields the closed tail
/// sums s1..s4 of the connected parts over all lags m >= 2.
struct ChiSet {
    double chi1 = 0.0;
    std::vector<double> chi2, chi3, chi4;  // index m-1, m = 1 same frame
    double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
    double lambda = 0.0, tau = 0.0, rho = 0.0;

    double chi2_same() const { return chi2[0]; }
    double chi3_same() const { return chi3[0]; }
    double chi4_same() const { return chi4[0]; }
};

inline ChiSet chi_set(const EmitterModel& model, double tau, int max_lag = 1) {
    if (model.kind != BlinkKind::markov)
        throw std::invalid_argument("chi_set: markov kind required");
    if (!(tau > 0.0)) throw std::invalid_argument("chi_set: tau must be > 0");
    if (max_lag < 1) throw std::invalid_argument("chi_set: max_lag must be >= 1");

    const auto cc = detail::corr_coeffs(model);
    const double lam = cc.lambda, mn = cc.mean, var = cc.var, c3 = cc.c3, c4 = cc.c4;
    const double x = lam * tau;
    const auto b = detail::brackets(x);
    const double l2 = lam * lam, l3 = l2 * lam, l4 = l2 * l2;
    const double j0 = 2.0 * b.j0b / l2, jfar = 2.0 * b.jfarb / l2;
    const double rho = std::exp(-x);
    const double one_m_rho = -std::expm1(-x);

    ChiSet cs;
    cs.lambda = lam;
    cs.tau = tau;
    cs.rho = rho;
    cs.chi1 = mn * tau;
    const double m1 = cs.chi1;

    cs.chi2.resize(max_lag);
    cs.chi3.resize(max_lag);
    cs.chi4.resize(max_lag);
    cs.chi2[0] = m1 * m1 + var * j0;
    cs.chi3[0] = m1 * m1 * m1 + mn * var * 6.0 * b.p3b / l3 + c3 * 6.0 * b.q3b / l3;
    cs.chi4[0] = m1 * m1 * m1 * m1 + mn * mn * var * 12.0 * b.p4b / l4 +
                 mn * c3 * 24.0 * b.q4b / l4 + var * var * 12.0 * b.q4b / l4 +
                 c4 * 12.0 * b.t4b / l4;

    // lag-dependent connected amplitudes (geometric in rho^{m-2} for m >= 2)
    const double a2 = var * one_m_rho * one_m_rho / l2;
    const double a3 = (mn * var * j0 + c3 * jfar) * one_m_rho / lam;
    const double a4 = mn * mn * var * j0 * j0 + 2.0 * mn * c3 * j0 * jfar + c4 * jfar * jfar;
    double rp = 1.0;
    for (int m = 2; m <= max_lag; ++m) {
        cs.chi2[m - 1] = m1 * m1 + a2 * rp;
        cs.chi3[m - 1] = m1 * m1 * m1 + mn * var * j0 * tau + a3 * rp;
        cs.chi4[m - 1] = m1 * m1 * m1 * m1 + 2.0 * mn * mn * var * j0 * tau * tau +
                         var * var * j0 * j0 + a4 * rp;
        rp *= rho;
    }

    if (var == 0.0) {
        cs.s1 = cs.s2 = cs.s3 = cs.s4 = 0.0;
        return cs;
    }
    cs.s1 = var * one_m_rho / l2;
    cs.s2 = (mn * var * j0 + c3 * jfar) / lam;
    cs.s3 = a4 / one_m_rho;
    cs.s4 = 2.0 * m1 * m1 * a2 / one_m_rho + a2 * a2 / (1.0 - rho * rho);
    return cs;
}

} // namespace sofi
