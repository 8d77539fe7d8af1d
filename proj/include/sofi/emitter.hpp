#pragma once

#include <cmath>
#include <stdexcept>

namespace sofi {

enum class BlinkKind { simplified, markov };

/// Two-level blinking emitter.  Brightness levels are q_off*P and q_on*P with
/// q_on + q_off = 1, so alpha = 1 - q_off/q_on measures the fluctuation
/// strength (alpha=0 constant, alpha=1 fully dark off state).  The simplified
/// kind redraws the state independently every frame with off-probability p;
/// the markov kind switches continuously with lifetimes tau_on, tau_off.
struct EmitterModel {
    BlinkKind kind = BlinkKind::simplified;
    double q_on = 0.5, q_off = 0.5;
    double mean_power = 1.0;      // pbar, photons per tau_0 at unit PSF mass
    double p_off = 0.5;           // simplified kind
    double tau_on = 1.0, tau_off = 1.0;  // markov kind

    static EmitterModel simplified(double alpha, double p_off, double mean_power) {
        EmitterModel m;
        m.kind = BlinkKind::simplified;
        m.set_alpha(alpha);
        m.p_off = p_off;
        m.mean_power = mean_power;
        if (p_off < 0.0 || p_off > 1.0)
            throw std::invalid_argument("EmitterModel: p_off must be in [0,1]");
        m.validate();
        return m;
    }

    static EmitterModel markov(double alpha, double tau_on, double tau_off,
                               double mean_power) {
        EmitterModel m;
        m.kind = BlinkKind::markov;
        m.set_alpha(alpha);
        m.tau_on = tau_on;
        m.tau_off = tau_off;
        m.mean_power = mean_power;
        if (!(tau_on > 0.0) || !(tau_off > 0.0))
            throw std::invalid_argument("EmitterModel: lifetimes must be > 0");
        m.validate();
        return m;
    }

    void set_alpha(double alpha) {
        if (alpha < 0.0 || alpha > 1.0)
            throw std::invalid_argument("EmitterModel: alpha must be in [0,1]");
        q_on = 1.0 / (2.0 - alpha);
        q_off = (1.0 - alpha) / (2.0 - alpha);
    }

    double alpha() const { return 1.0 - q_off / q_on; }

    /// Probability of the off state (stationary one for the markov kind).
    double off_probability() const {
        if (kind == BlinkKind::simplified) return p_off;
        return tau_off / (tau_on + tau_off);
    }

    /// Mean emitted photons per frame per emitter at unit PSF mass.
    double mean_photons_per_frame(double frame_time) const {
        const double p = off_probability();
        return mean_power * frame_time * (p * q_off + (1.0 - p) * q_on);
    }

    void validate() const {
        if (std::abs(q_on + q_off - 1.0) > 1e-12)
            throw std::invalid_argument("EmitterModel: q_on + q_off must equal 1");
        if (q_off < 0.0 || q_off > q_on)
            throw std::invalid_argument("EmitterModel: need 0 <= q_off <= q_on");
        if (!(mean_power > 0.0))
            throw std::invalid_argument("EmitterModel: mean_power must be > 0");
    }
};

} // namespace sofi
