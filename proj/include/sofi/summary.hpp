#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sofi/blinking.hpp"
#include "sofi/emitter.hpp"
#include "sofi/errors.hpp"
#include "sofi/mathutil.hpp"
#include "sofi/model.hpp"
#include "sofi/scheme.hpp"

namespace sofi {

/// Asymptotic Gaussian description of the per-frame statistic vector:
/// mean, per-frame covariance (M_fr times the covariance of the average,
/// inter-frame correlations included) and the theta-derivative of the mean.
struct GaussianSummary {
    Eigen::VectorXd mu;
    Eigen::VectorXd dmu_dtheta;
    Eigen::MatrixXd sigma1;
    double mean_photons_per_frame = 0.0;   // detected source photons, background excluded
    bool uniform_weight_fallback = false;  // set when SNR weights were unavailable
};

enum class WeightPolicy { snr_optimal, uniform };

namespace detail {

constexpr int kBinomMax = 9;

inline const std::array<std::array<double, kBinomMax + 1>, kBinomMax + 1>& binom_table() {
    static const auto t = [] {
        std::array<std::array<double, kBinomMax + 1>, kBinomMax + 1> b{};
        for (int n = 0; n <= kBinomMax; ++n) {
            b[n][0] = 1.0;
            for (int k = 1; k <= n; ++k)
                b[n][k] = (k == n) ? 1.0 : b[n - 1][k - 1] + b[n - 1][k];
        }
        return b;
    }();
    return t;
}

inline double binom(int n, int k) { return binom_table()[n][k]; }

/// Product of count powers n_{j1}^{k1}..., canonical form: pixels strictly
/// ascending, powers >= 1, at most four distinct pixels (degree <= 8 total).
struct Monomial {
    std::array<std::pair<int, int>, 4> f{};
    int nf = 0;

    static Monomial one() { return {}; }
    static Monomial pixel(int j, int k = 1) {
        Monomial m;
        m.f[0] = {j, k};
        m.nf = 1;
        return m;
    }

    Monomial times(const Monomial& o) const {
        Monomial r;
        int i = 0, j = 0;
        while (i < nf || j < o.nf) {
            std::pair<int, int> next;
            if (j >= o.nf || (i < nf && f[i].first < o.f[j].first)) {
                next = f[i++];
            } else if (i >= nf || o.f[j].first < f[i].first) {
                next = o.f[j++];
            } else {
                next = {f[i].first, f[i].second + o.f[j].second};
                ++i;
                ++j;
            }
            if (r.nf == 4) throw UnsupportedSchemeError("monomial spans more than 4 pixels");
            r.f[r.nf++] = next;
        }
        return r;
    }

    int degree() const {
        int d = 0;
        for (int i = 0; i < nf; ++i) d += f[i].second;
        return d;
    }

    std::uint64_t key() const {
        std::uint64_t k = 0;
        for (int i = 0; i < nf; ++i)
            k = (k << 16) | (static_cast<std::uint64_t>(f[i].first) << 4) |
                static_cast<std::uint64_t>(f[i].second);
        return k;
    }
};

struct Term {
    double coef;
    Monomial mono;
};
using Lincomb = std::vector<Term>;

/// Pixels that can ever see a photon; the rest are dropped so that the
/// covariance stays invertible.  A positive background keeps every pixel.
inline std::vector<int> active_pixels(const SceneOverlaps& ov, double mu_b) {
    std::vector<int> act;
    const int m = static_cast<int>(ov.u1.size());
    act.reserve(m);
    for (int j = 0; j < m; ++j)
        if (mu_b > 0.0 || ov.u1[j] + ov.u2[j] >= 1e-14) act.push_back(j);
    return act;
}

/// (n_j - mu_j)^k as a lincomb of raw monomials; mu_j enters as a frozen constant.
inline void append_centered_power(Lincomb& out, int j, int k, double mu_j) {
    for (int i = 0; i <= k; ++i) {
        const double c = binom(k, i) * std::pow(-mu_j, k - i);
        out.push_back({c, i > 0 ? Monomial::pixel(j, i) : Monomial::one()});
    }
}

inline void append_centered_pair(Lincomb& out, int a, int b, double mu_a, double mu_b) {
    out.push_back({1.0, Monomial::pixel(a).times(Monomial::pixel(b))});
    out.push_back({-mu_b, Monomial::pixel(a)});
    out.push_back({-mu_a, Monomial::pixel(b)});
    out.push_back({mu_a * mu_b, Monomial::one()});
}

/// Component lincombs for a scheme over the active pixels, plus the pair
/// groups of the cross-pixel schemes (one group per component; empty for
/// means and auto-powers).  Cumulant estimators enter through their
/// linearizations: centered powers and centered pair products.
struct ComponentSet {
    std::vector<Lincomb> comps;
    std::vector<std::vector<std::pair<int, int>>> groups;
    // per-component evaluation tag, shared by the analytic and empirical paths
    struct Info {
        int kind;  // 0 raw count, 1 centered power, 2 centered pair group
        int pixel;
        int power;
    };
    std::vector<Info> info;
};

inline ComponentSet build_components(const SchemeSpec& scheme, const std::vector<int>& act,
                                     const std::vector<double>& mu) {
    ComponentSet cs;
    auto add_means = [&] {
        for (int j : act) {
            cs.comps.push_back({{1.0, Monomial::pixel(j)}});
            cs.groups.emplace_back();
            cs.info.push_back({0, j, 1});
        }
    };
    auto add_powers = [&](int k) {
        for (int j : act) {
            Lincomb c;
            append_centered_power(c, j, k, mu[j]);
            cs.comps.push_back(std::move(c));
            cs.groups.emplace_back();
            cs.info.push_back({1, j, k});
        }
    };
    switch (scheme.kind) {
        case SchemeKind::M:
            add_means();
            break;
        case SchemeKind::AC2:
            add_powers(2);
            break;
        case SchemeKind::M_ACK:
            add_means();
            for (int k = 2; k <= scheme.order; ++k) add_powers(k);
            break;
        case SchemeKind::M_XC2:
            add_means();
            for (std::size_t ia = 0; ia < act.size(); ++ia)
                for (std::size_t ib = ia; ib < act.size(); ++ib) {
                    const int a = act[ia], b = act[ib];
                    Lincomb c;
                    append_centered_pair(c, a, b, mu[a], mu[b]);
                    cs.comps.push_back(std::move(c));
                    cs.groups.push_back({{a, b}});
                    cs.info.push_back({2, -1, 2});
                }
            break;
        case SchemeKind::M_XC2S:
        case SchemeKind::M_XC2W: {
            add_means();
            std::map<int, std::vector<std::pair<int, int>>> by_centroid;
            for (std::size_t ia = 0; ia < act.size(); ++ia)
                for (std::size_t ib = ia; ib < act.size(); ++ib)
                    by_centroid[act[ia] + act[ib]].push_back({act[ia], act[ib]});
            for (auto& [sum, pairs] : by_centroid) {
                Lincomb c;
                for (auto [a, b] : pairs) append_centered_pair(c, a, b, mu[a], mu[b]);
                cs.comps.push_back(std::move(c));
                cs.groups.push_back(pairs);
                cs.info.push_back({2, -1, 2});
            }
            break;
        }
    }
    return cs;
}

} // namespace detail

/// SNR-optimal weights for a centroid group: maximizes w.k / sqrt(w.A.w)
/// subject to w1 = 1, via the stationarity system
/// sum_i w_i (A_mi/k_m - A_1i/k_1) = 0 for m = 2..k.
inline Eigen::VectorXd xc2_weights(const Eigen::VectorXd& kappas, const Eigen::MatrixXd& a) {
    const int k = static_cast<int>(kappas.size());
    if (k < 1 || a.rows() != k || a.cols() != k)
        throw std::invalid_argument("xc2_weights: shape mismatch");
    if (k == 1) return Eigen::VectorXd::Ones(1);
    const double kmax = kappas.cwiseAbs().maxCoeff();
    if (!(kmax > 0.0) || !kappas.allFinite() || !a.allFinite())
        throw IllConditionedWeightsError("xc2_weights: degenerate pair covariances");
    for (int i = 0; i < k; ++i)
        if (std::abs(kappas[i]) < 1e-12 * kmax)
            throw IllConditionedWeightsError("xc2_weights: vanishing pair covariance");

    Eigen::MatrixXd b(k - 1, k - 1);
    Eigen::VectorXd rhs(k - 1);
    for (int m = 1; m < k; ++m) {
        for (int i = 1; i < k; ++i) b(m - 1, i - 1) = a(m, i) / kappas[m] - a(0, i) / kappas[0];
        rhs(m - 1) = -(a(m, 0) / kappas[m] - a(0, 0) / kappas[0]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
    if (!lu.isInvertible())
        throw IllConditionedWeightsError("xc2_weights: singular weight system");
    Eigen::VectorXd w(k);
    w(0) = 1.0;
    w.tail(k - 1) = lu.solve(rhs);
    if (!w.allFinite()) throw IllConditionedWeightsError("xc2_weights: non-finite solution");
    return w;
}

namespace detail {

/// Independent-frame engine: expectations of count monomials conditioned on
/// the four per-frame brightness configurations, combined with weights
/// p^2, p(1-p), (1-p)p, (1-p)^2.  Conditional counts are Poisson with mean
/// (q1 U_{j,1} + q2 U_{j,2}) Pbar tau + mu_B, so raw monomial expectations
/// factor over pixels into Poisson raw moments.
class SimplifiedEngine {
public:
    static constexpr int kMaxPow = 8;

    SimplifiedEngine(const DetectorGeometry& geom, const EmitterModel& model, double theta,
                     const PsfGaussian& psf = PsfGaussian())
        : ov_(pixel_overlaps(geom, psf, theta)) {
        if (model.kind != BlinkKind::simplified)
            throw std::invalid_argument("SimplifiedEngine: simplified kind required");
        act_ = active_pixels(ov_, geom.background_mean);
        const double nbar = model.mean_power * geom.frame_time;
        const double p = model.p_off;
        const double qs[4][2] = {{model.q_off, model.q_off},
                                 {model.q_off, model.q_on},
                                 {model.q_on, model.q_off},
                                 {model.q_on, model.q_on}};
        wcfg_ = {p * p, p * (1.0 - p), (1.0 - p) * p, (1.0 - p) * (1.0 - p)};
        const int m = geom.n_pixels;
        for (int c = 0; c < 4; ++c) {
            mom_[c].assign(m * (kMaxPow + 1), 0.0);
            dmom_[c].assign(m * (kMaxPow + 1), 0.0);
            for (int j : act_) {
                const double nu = (qs[c][0] * ov_.u1[j] + qs[c][1] * ov_.u2[j]) * nbar +
                                  geom.background_mean;
                const double dnu = (qs[c][0] * ov_.du1_dtheta[j] + qs[c][1] * ov_.du2_dtheta[j]) *
                                   nbar;
                for (int k = 0; k <= kMaxPow; ++k) {
                    mom_[c][j * (kMaxPow + 1) + k] = poisson_raw_moment(k, nu);
                    dmom_[c][j * (kMaxPow + 1) + k] = poisson_raw_moment_dnu(k, nu) * dnu;
                }
            }
        }
        const double g1 = p * model.q_off + (1.0 - p) * model.q_on;
        mean_source_ = g1 * nbar * (ov_.u1.sum() + ov_.u2.sum());
    }

    const std::vector<int>& act() const { return act_; }
    const SceneOverlaps& overlaps() const { return ov_; }
    double mean_source_photons() const { return mean_source_; }

    double mono_e(const Monomial& m) const {
        double e = 0.0;
        for (int c = 0; c < 4; ++c) {
            double prod = 1.0;
            for (int i = 0; i < m.nf; ++i)
                prod *= mom_[c][m.f[i].first * (kMaxPow + 1) + m.f[i].second];
            e += wcfg_[c] * prod;
        }
        return e;
    }

    double mono_de(const Monomial& m) const {
        double de = 0.0;
        for (int c = 0; c < 4; ++c) {
            double s = 0.0;
            for (int i = 0; i < m.nf; ++i) {
                double prod = dmom_[c][m.f[i].first * (kMaxPow + 1) + m.f[i].second];
                for (int i2 = 0; i2 < m.nf; ++i2)
                    if (i2 != i) prod *= mom_[c][m.f[i2].first * (kMaxPow + 1) + m.f[i2].second];
                s += prod;
            }
            de += wcfg_[c] * s;
        }
        return de;
    }

    double cross_lincomb(const Lincomb&, const Lincomb&) const { return 0.0; }

private:
    SceneOverlaps ov_;
    std::vector<int> act_;
    std::array<double, 4> wcfg_{};
    std::array<std::vector<double>, 4> mom_, dmom_;
    double mean_source_ = 0.0;
};

/// Markov engine: raw count monomials reduce, via the law of total cumulance
/// over the per-frame brightness integrals I1, I2, to polynomials whose
/// expectations are products of the frame integrals chi_k, with inter-frame
/// covariance entering only through the geometric tail sums s1..s4.
class MarkovEngine {
public:
    static constexpr int kMaxPow = 4;

    MarkovEngine(const DetectorGeometry& geom, const EmitterModel& model, double theta,
                 const PsfGaussian& psf = PsfGaussian())
        : ov_(pixel_overlaps(geom, psf, theta)), mu_b_(geom.background_mean),
          cs_(chi_set(model, geom.frame_time)) {
        act_ = active_pixels(ov_, mu_b_);
        const int m = geom.n_pixels;
        fp_.resize(m);
        dfp_.resize(m);
        for (int j : act_)
            for (int k = 0; k <= kMaxPow; ++k) {
                fp_[j][k] = factor_poly(j, k, false);
                dfp_[j][k] = factor_poly(j, k, true);
            }
        mean_source_ = cs_.chi1 * (ov_.u1.sum() + ov_.u2.sum());
    }

    const std::vector<int>& act() const { return act_; }
    const SceneOverlaps& overlaps() const { return ov_; }
    double mean_source_photons() const { return mean_source_; }

    double mono_e(const Monomial& m) const {
        double e = 0.0;
        for (const auto& t : expand(m, -1)) e += t.c * chi_same(t.e1a) * chi_same(t.e2a);
        return e;
    }

    double mono_de(const Monomial& m) const {
        double de = 0.0;
        for (int df = 0; df < m.nf; ++df)
            for (const auto& t : expand(m, df)) de += t.c * chi_same(t.e1a) * chi_same(t.e2a);
        return de;
    }

    /// Sum over lags m >= 2 of cov(component a at frame 1, component b at frame m).
    double cross_lincomb(const Lincomb& la, const Lincomb& lb) const {
        double tot = 0.0;
        for (const auto& ta : la)
            for (const auto& tb : lb) tot += ta.coef * tb.coef * cross_pair(ta.mono, tb.mono);
        return tot;
    }

private:
    struct FTerm {
        double c;
        int a, b;  // exponents of the per-frame brightness integrals I1, I2
    };
    struct XTerm {
        double c;
        int e1a, e1b, e2a, e2b;  // (emitter, frame) exponents
    };

    double chi_same(int k) const {
        switch (k) {
            case 0: return 1.0;
            case 1: return cs_.chi1;
            case 2: return cs_.chi2_same();
            case 3: return cs_.chi3_same();
            case 4: return cs_.chi4_same();
        }
        throw UnsupportedSchemeError("markov engine: count degree above 4");
    }

    /// Conditional raw moment E[n_j^k | I1, I2] expanded into terms
    /// c * I1^a I2^b through the Poisson-moment polynomial in
    /// nu_j = U_{j,1} I1 + U_{j,2} I2 + mu_B.  The deriv flag differentiates
    /// the U-dependent coefficient with respect to theta.
    std::vector<FTerm> factor_poly(int j, int k, bool deriv) const {
        if (k == 0) return {{1.0, 0, 0}};
        const double u1 = ov_.u1[j], u2 = ov_.u2[j];
        const double du1 = ov_.du1_dtheta[j], du2 = ov_.du2_dtheta[j];
        const auto& st = stirling2_table();
        std::vector<FTerm> out;
        for (int i = 1; i <= k; ++i) {
            const double s = st[k][i];
            if (s == 0.0) continue;
            for (int a = 0; a <= i; ++a)
                for (int b = 0; b <= i - a; ++b) {
                    const int cexp = i - a - b;
                    if (cexp > 0 && mu_b_ == 0.0) continue;
                    const double mult =
                        s * binom(i, a) * binom(i - a, b) * std::pow(mu_b_, cexp);
                    if (!deriv) {
                        out.push_back({mult * std::pow(u1, a) * std::pow(u2, b), a, b});
                    } else {
                        double d = 0.0;
                        if (a > 0) d += a * std::pow(u1, a - 1) * du1 * std::pow(u2, b);
                        if (b > 0) d += b * std::pow(u2, b - 1) * du2 * std::pow(u1, a);
                        if (d != 0.0) out.push_back({mult * d, a, b});
                    }
                }
        }
        return out;
    }

    /// Expands a monomial at one frame into (I1, I2)-exponent terms; dfactor
    /// selects the factor whose coefficient is differentiated (product rule).
    std::vector<XTerm> expand(const Monomial& m, int dfactor, bool frame_b = false) const {
        std::vector<XTerm> terms{{1.0, 0, 0, 0, 0}}, next;
        for (int idx = 0; idx < m.nf; ++idx) {
            const auto& fp = (idx == dfactor ? dfp_ : fp_)[m.f[idx].first][m.f[idx].second];
            next.clear();
            next.reserve(terms.size() * fp.size());
            for (const auto& t : terms)
                for (const auto& f : fp) {
                    if (!frame_b)
                        next.push_back({t.c * f.c, t.e1a + f.a, t.e1b, t.e2a + f.b, t.e2b});
                    else
                        next.push_back({t.c * f.c, t.e1a, t.e1b + f.a, t.e2a, t.e2b + f.b});
                }
            terms.swap(next);
        }
        return terms;
    }

    /// Lag sum of the connected two-frame factor for one emitter; -1 marks a
    /// lag-independent factor (no connected part).
    double conn(int ea, int eb, bool& has) const {
        has = true;
        if (ea == 0 || eb == 0) {
            has = false;
            return 0.0;
        }
        if (ea == 1 && eb == 1) return cs_.s1;
        if ((ea == 2 && eb == 1) || (ea == 1 && eb == 2)) return cs_.s2;
        if (ea == 2 && eb == 2) return cs_.s3;
        throw UnsupportedSchemeError("markov engine: cross degree above 2 per frame");
    }

    double cross_pair(const Monomial& ma, const Monomial& mb) const {
        const auto ta = expand(ma, -1, false);
        const auto tb = expand(mb, -1, true);
        double tot = 0.0;
        for (const auto& a : ta)
            for (const auto& b : tb) {
                const double c = a.c * b.c;
                const int e1a = a.e1a, e2a = a.e2a, e1b = b.e1b, e2b = b.e2b;
                bool h1 = false, h2 = false;
                const double s1 = conn(e1a, e1b, h1);
                const double s2 = conn(e2a, e2b, h2);
                if (!h1 && !h2) continue;
                if (h1 && h2) {
                    // both emitters lag-linked: only (1,1)x(1,1) occurs, whose
                    // lag sum of chi2(m)^2 - chi1^4 is s4
                    tot += c * cs_.s4;
                } else if (h1) {
                    tot += c * s1 * chi_same(e2a) * chi_same(e2b);
                } else {
                    tot += c * s2 * chi_same(e1a) * chi_same(e1b);
                }
            }
        return tot;
    }

    SceneOverlaps ov_;
    double mu_b_;
    ChiSet cs_;
    std::vector<int> act_;
    std::vector<std::array<std::vector<FTerm>, kMaxPow + 1>> fp_, dfp_;
    double mean_source_ = 0.0;
};

/// Weight vectors for the centroid groups of a weighted cross scheme; empty
/// vectors mark components that take no weights.  Falls back to uniform
/// weights, and reports it, when the SNR system is ill conditioned (exactly
/// degenerate pair covariances, e.g. with blinking switched off).
template <class Engine>
std::vector<Eigen::VectorXd> group_weights(const Engine& eng, const SchemeSpec& scheme,
                                           const ComponentSet& cset,
                                           const std::vector<double>& pixel_means, WeightPolicy wp,
                                           bool& fallback) {
    std::vector<Eigen::VectorXd> ws(cset.comps.size());
    fallback = false;
    if (scheme.kind != SchemeKind::M_XC2W) return ws;
    for (std::size_t ci = 0; ci < cset.comps.size(); ++ci) {
        const auto& pairs = cset.groups[ci];
        const int k = static_cast<int>(pairs.size());
        if (k < 2) continue;
        if (wp == WeightPolicy::uniform) {
            ws[ci] = Eigen::VectorXd::Ones(k);
            continue;
        }
        Eigen::VectorXd kap_full(k);
        for (int i = 0; i < k; ++i) {
            const auto [a, b] = pairs[i];
            kap_full(i) = eng.mono_e(Monomial::pixel(a).times(Monomial::pixel(b))) -
                          pixel_means[a] * pixel_means[b];
        }
        // pairs with no covariance signal get weight zero (their SNR optimum);
        // keeping them would make the stationarity system singular
        const double kmax = kap_full.cwiseAbs().maxCoeff();
        std::vector<int> live;
        for (int i = 0; i < k; ++i)
            if (std::abs(kap_full(i)) >= 1e-8 * kmax) live.push_back(i);
        const int kl = static_cast<int>(live.size());
        if (!(kmax > 0.0) || kl == 0) {
            ws[ci] = Eigen::VectorXd::Ones(k);
            fallback = true;
            continue;
        }
        ws[ci] = Eigen::VectorXd::Zero(k);
        if (kl == 1) {
            ws[ci](live[0]) = 1.0;
            continue;
        }
        std::vector<Lincomb> cl(kl);
        Eigen::VectorXd kap(kl);
        Eigen::MatrixXd amat(kl, kl);
        for (int i = 0; i < kl; ++i) {
            const auto [a, b] = pairs[live[i]];
            append_centered_pair(cl[i], a, b, pixel_means[a], pixel_means[b]);
            kap(i) = kap_full(live[i]);
        }
        for (int i = 0; i < kl; ++i)
            for (int j = i; j < kl; ++j) {
                double e = 0.0;
                for (const auto& ta : cl[i])
                    for (const auto& tb : cl[j])
                        e += ta.coef * tb.coef * eng.mono_e(ta.mono.times(tb.mono));
                e -= kap(i) * kap(j);
                e += eng.cross_lincomb(cl[i], cl[j]) + eng.cross_lincomb(cl[j], cl[i]);
                amat(i, j) = amat(j, i) = e;
            }
        try {
            const Eigen::VectorXd wl = xc2_weights(kap, amat);
            for (int i = 0; i < kl; ++i) ws[ci](live[i]) = wl(i);
        } catch (const IllConditionedWeightsError&) {
            ws[ci] = Eigen::VectorXd::Ones(k);
            fallback = true;
        }
    }
    return ws;
}

template <class Engine>
GaussianSummary assemble_summary(const Engine& eng, const SchemeSpec& scheme,
                                 const std::vector<double>& pixel_means, WeightPolicy wp,
                                 bool& fallback) {
    const auto& act = eng.act();
    ComponentSet cset = build_components(scheme, act, pixel_means);

    const auto ws = group_weights(eng, scheme, cset, pixel_means, wp, fallback);
    for (std::size_t ci = 0; ci < cset.comps.size(); ++ci) {
        if (ws[ci].size() == 0) continue;
        const auto& pairs = cset.groups[ci];
        Lincomb weighted;
        for (int i = 0; i < static_cast<int>(pairs.size()); ++i) {
            const auto [a, b] = pairs[i];
            Lincomb cl;
            append_centered_pair(cl, a, b, pixel_means[a], pixel_means[b]);
            for (auto& t : cl) weighted.push_back({ws[ci](i) * t.coef, t.mono});
        }
        cset.comps[ci] = std::move(weighted);
    }

    const int n = static_cast<int>(cset.comps.size());
    GaussianSummary s;
    s.mu.resize(n);
    s.dmu_dtheta.resize(n);
    s.sigma1.resize(n, n);
    for (int i = 0; i < n; ++i) {
        double m = 0.0, dm = 0.0;
        for (const auto& t : cset.comps[i]) {
            m += t.coef * eng.mono_e(t.mono);
            dm += t.coef * eng.mono_de(t.mono);
        }
        s.mu(i) = m;
        s.dmu_dtheta(i) = dm;
    }
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double e = 0.0;
            for (const auto& ta : cset.comps[i])
                for (const auto& tb : cset.comps[j])
                    e += ta.coef * tb.coef * eng.mono_e(ta.mono.times(tb.mono));
            e -= s.mu(i) * s.mu(j);
            e += eng.cross_lincomb(cset.comps[i], cset.comps[j]) +
                 eng.cross_lincomb(cset.comps[j], cset.comps[i]);
            s.sigma1(i, j) = s.sigma1(j, i) = e;
        }
    s.mean_photons_per_frame = eng.mean_source_photons();
    return s;
}

template <class Engine>
GaussianSummary engine_summary(const Engine& eng, const SchemeSpec& scheme, WeightPolicy wp) {
    std::vector<double> pmu(eng.overlaps().u1.size(), 0.0);
    for (int j : eng.act()) pmu[j] = eng.mono_e(Monomial::pixel(j));
    bool fallback = false;
    GaussianSummary s = assemble_summary(eng, scheme, pmu, wp, fallback);
    s.uniform_weight_fallback = fallback;
    return s;
}

} // namespace detail

inline GaussianSummary simplified_summary(const SchemeSpec& scheme, const DetectorGeometry& geom,
                                          const EmitterModel& model, double theta,
                                          WeightPolicy wp = WeightPolicy::snr_optimal,
                                          const PsfGaussian& psf = PsfGaussian()) {
    detail::SimplifiedEngine eng(geom, model, theta, psf);
    return detail::engine_summary(eng, scheme, wp);
}

inline GaussianSummary markov_summary(const SchemeSpec& scheme, const DetectorGeometry& geom,
                                      const EmitterModel& model, double theta,
                                      WeightPolicy wp = WeightPolicy::snr_optimal,
                                      const PsfGaussian& psf = PsfGaussian()) {
    if (scheme.count_degree() > 2)
        throw UnsupportedSchemeError("markov model supports count degree <= 2 only");
    detail::MarkovEngine eng(geom, model, theta, psf);
    return detail::engine_summary(eng, scheme, wp);
}

} // namespace sofi
