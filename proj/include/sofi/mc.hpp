#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "sofi/emitter.hpp"
#include "sofi/errors.hpp"
#include "sofi/model.hpp"
#include "sofi/rng.hpp"
#include "sofi/summary.hpp"

namespace sofi {

/// A simulated acquisition: per-frame photon counts plus the exact inputs
/// that produced them, so a dumped batch can be re-analyzed stand-alone.
struct FrameBatch {
    EmitterModel model;
    DetectorGeometry geometry;
    double theta;
    std::uint64_t seed;
    long n_frames;
    std::vector<std::int32_t> counts;  // frame-major, n_frames x n_pixels

    FrameBatch(const EmitterModel& model_, const DetectorGeometry& geometry_, double theta_,
               std::uint64_t seed_, long n_frames_)
        : model(model_), geometry(geometry_), theta(theta_), seed(seed_), n_frames(n_frames_) {}

    std::int32_t at(long frame, int pixel) const {
        return counts[static_cast<std::size_t>(frame) * geometry.n_pixels + pixel];
    }
};

namespace detail {

/// Walks the two-state chain in continuous time across frame boundaries and
/// returns the brightness integral of each frame in photons:
/// Pbar (q_off tau + (q_on - q_off) T_on) with T_on the on-state occupation.
/// The chain starts in its stationary law, so every frame is stationary.
inline void occupation_integrals(const EmitterModel& model, double tau, long n_frames,
                                 CounterRng rng, std::vector<double>& out) {
    const double p_off = model.tau_off / (model.tau_on + model.tau_off);
    int on = rng.uniform() < p_off ? 0 : 1;
    double hold = rng.exponential(1.0 / (on ? model.tau_on : model.tau_off));
    for (long f = 0; f < n_frames; ++f) {
        double left = tau, t_on = 0.0;
        while (hold < left) {
            if (on) t_on += hold;
            left -= hold;
            on ^= 1;
            hold = rng.exponential(1.0 / (on ? model.tau_on : model.tau_off));
        }
        if (on) t_on += left;
        hold -= left;
        out[f] = model.mean_power * (model.q_off * tau + (model.q_on - model.q_off) * t_on);
    }
}

} // namespace detail

/// Frame simulation.  Counts are Poisson given the per-frame brightness
/// integrals; stream 0 drives the counts, streams 1 and 2 the two emitters,
/// so the same seed yields the same brightness history on any grid.
inline FrameBatch simulate_frames(const EmitterModel& model, const DetectorGeometry& geom,
                                  double theta, long n_frames, std::uint64_t seed,
                                  const PsfGaussian& psf = PsfGaussian()) {
    model.validate();
    if (n_frames < 1) throw std::invalid_argument("simulate_frames: n_frames must be >= 1");
    const SceneOverlaps ov = pixel_overlaps(geom, psf, theta);
    const int m = geom.n_pixels;

    FrameBatch batch(model, geom, theta, seed, n_frames);
    batch.counts.assign(static_cast<std::size_t>(n_frames) * m, 0);

    std::vector<double> i1(n_frames), i2(n_frames);
    if (model.kind == BlinkKind::simplified) {
        CounterRng rs(seed, 1);
        const double nbar = model.mean_power * geom.frame_time;
        for (long f = 0; f < n_frames; ++f) {
            i1[f] = (rs.uniform() < model.p_off ? model.q_off : model.q_on) * nbar;
            i2[f] = (rs.uniform() < model.p_off ? model.q_off : model.q_on) * nbar;
        }
    } else {
        detail::occupation_integrals(model, geom.frame_time, n_frames, CounterRng(seed, 1), i1);
        detail::occupation_integrals(model, geom.frame_time, n_frames, CounterRng(seed, 2), i2);
    }

    CounterRng rc(seed, 0);
    const double mu_b = geom.background_mean;
    for (long f = 0; f < n_frames; ++f) {
        std::int32_t* row = batch.counts.data() + static_cast<std::size_t>(f) * m;
        for (int j = 0; j < m; ++j) {
            const double nu = ov.u1[j] * i1[f] + ov.u2[j] * i2[f] + mu_b;
            row[j] = nu > 0.0 ? static_cast<std::int32_t>(rc.poisson(nu)) : 0;
        }
    }
    return batch;
}

/// Empirical counterpart of the Gaussian summary.  Component values use the
/// same frozen centers and group weights as the analytic side, so the two are
/// directly comparable entry by entry.  sigma1 comes from batch means: with
/// block_size b and B blocks, sigma1 = b Cov(block averages), which absorbs
/// inter-frame correlation once b spans many correlation times.  sigma1_se is
/// the standard error of the mean of the per-block outer products; being a
/// moment estimate it needs no Gaussianity and self-normalizes even for
/// entries driven by rare spikes.
struct EmpiricalSummary {
    Eigen::VectorXd mean;
    Eigen::VectorXd mean_se;
    Eigen::MatrixXd sigma1;
    Eigen::MatrixXd sigma1_se;
    long n_frames = 0;
    long block_size = 1;
    long n_blocks = 0;
    bool uniform_weight_fallback = false;
};

namespace detail {

struct EvalPlan {
    std::vector<int> act;
    std::vector<double> pmu;
    ComponentSet cset;
    std::vector<Eigen::VectorXd> weights;
    bool fallback = false;
};

template <class Engine>
EvalPlan plan_from_engine(const Engine& eng, const SchemeSpec& scheme, WeightPolicy wp) {
    EvalPlan plan;
    plan.act = eng.act();
    plan.pmu.assign(eng.overlaps().u1.size(), 0.0);
    for (int j : plan.act) plan.pmu[j] = eng.mono_e(Monomial::pixel(j));
    plan.cset = build_components(scheme, plan.act, plan.pmu);
    plan.weights = group_weights(eng, scheme, plan.cset, plan.pmu, wp, plan.fallback);
    return plan;
}

inline EvalPlan make_eval_plan(const FrameBatch& batch, const SchemeSpec& scheme, WeightPolicy wp,
                               const PsfGaussian& psf) {
    if (batch.model.kind == BlinkKind::simplified) {
        SimplifiedEngine eng(batch.geometry, batch.model, batch.theta, psf);
        return plan_from_engine(eng, scheme, wp);
    }
    if (scheme.count_degree() > 2)
        throw UnsupportedSchemeError("markov model supports count degree <= 2 only");
    MarkovEngine eng(batch.geometry, batch.model, batch.theta, psf);
    return plan_from_engine(eng, scheme, wp);
}

inline void eval_components(const EvalPlan& plan, const std::int32_t* row,
                            std::vector<double>& centered, double* v) {
    for (int j : plan.act) centered[j] = row[j] - plan.pmu[j];
    for (std::size_t ci = 0; ci < plan.cset.info.size(); ++ci) {
        const auto& in = plan.cset.info[ci];
        double val;
        if (in.kind == 0) {
            val = row[in.pixel];
        } else if (in.kind == 1) {
            val = centered[in.pixel];
            for (int r = 1; r < in.power; ++r) val *= centered[in.pixel];
        } else {
            const auto& pairs = plan.cset.groups[ci];
            const auto& w = plan.weights[ci];
            val = 0.0;
            for (std::size_t i = 0; i < pairs.size(); ++i)
                val += (w.size() ? w(static_cast<int>(i)) : 1.0) *
                       centered[pairs[i].first] * centered[pairs[i].second];
        }
        v[ci] = val;
    }
}

} // namespace detail

/// block_size 0 picks a default: 1 for the independent-frame model, 200 for
/// the Markov model (many correlation times at the frame times of interest).
/// center_on_sample_means switches the statistic centers from analytic pixel
/// means to the empirical ones, which biases quadratic components at O(1/M_fr).
inline EmpiricalSummary empirical_summary(const FrameBatch& batch, const SchemeSpec& scheme,
                                          long block_size = 0,
                                          WeightPolicy wp = WeightPolicy::snr_optimal,
                                          const PsfGaussian& psf = PsfGaussian(),
                                          bool center_on_sample_means = false) {
    if (block_size == 0)
        block_size = batch.model.kind == BlinkKind::simplified ? 1 : 200;
    if (block_size < 1) throw std::invalid_argument("empirical_summary: block_size must be >= 1");
    const long n_blocks = batch.n_frames / block_size;
    if (n_blocks < 30)
        throw std::invalid_argument("empirical_summary: need at least 30 blocks");

    detail::EvalPlan plan = detail::make_eval_plan(batch, scheme, wp, psf);
    const int m = batch.geometry.n_pixels;
    if (center_on_sample_means) {
        std::vector<double> smu(m, 0.0);
        const long used = n_blocks * block_size;
        for (long f = 0; f < used; ++f) {
            const std::int32_t* row = batch.counts.data() + static_cast<std::size_t>(f) * m;
            for (int j : plan.act) smu[j] += row[j];
        }
        for (int j : plan.act) plan.pmu[j] = smu[j] / static_cast<double>(used);
    }

    const int n = static_cast<int>(plan.cset.comps.size());
    const long used = n_blocks * block_size;
    std::vector<double> centered(m, 0.0), v(n);
    Eigen::MatrixXd bmeans = Eigen::MatrixXd::Zero(n_blocks, n);
    for (long f = 0; f < used; ++f) {
        detail::eval_components(plan, batch.counts.data() + static_cast<std::size_t>(f) * m,
                                centered, v.data());
        const long blk = f / block_size;
        for (int i = 0; i < n; ++i) bmeans(blk, i) += v[i];
    }
    bmeans /= static_cast<double>(block_size);

    EmpiricalSummary es;
    es.n_frames = used;
    es.block_size = block_size;
    es.n_blocks = n_blocks;
    es.uniform_weight_fallback = plan.fallback;
    es.mean = bmeans.colwise().mean().transpose();
    bmeans.rowwise() -= es.mean.transpose();

    // sigma1 = (b/(B-1)) sum_k d_k d_k^T; its per-entry SE from the spread of
    // the block outer products Y_kij = b B/(B-1) d_ki d_kj around sigma1_ij
    const double bb = static_cast<double>(n_blocks), bs = static_cast<double>(block_size);
    es.sigma1 = (bs / (bb - 1.0)) * bmeans.transpose() * bmeans;
    es.sigma1_se.resize(n, n);
    Eigen::VectorXd yk(n_blocks);
    const double yscale = bs * bb / (bb - 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            yk = yscale * bmeans.col(i).cwiseProduct(bmeans.col(j));
            const double var_y =
                (yk.array() - es.sigma1(i, j)).square().sum() / ((bb - 1.0) * bb);
            es.sigma1_se(i, j) = es.sigma1_se(j, i) = std::sqrt(var_y);
        }
    es.mean_se.resize(n);
    for (int i = 0; i < n; ++i)
        es.mean_se(i) = std::sqrt(std::max(0.0, es.sigma1(i, i)) / static_cast<double>(used));
    return es;
}

/// Per-pixel temporal k-statistic image (unbiased cumulant estimators of the
/// counts), order 1 to 4.  Two passes keep the central sums cancellation-free.
inline Eigen::VectorXd cumulant_image_check(const FrameBatch& batch, int order) {
    if (order < 1 || order > 4)
        throw std::invalid_argument("cumulant_image_check: order must be 1..4");
    const int m = batch.geometry.n_pixels;
    const double n = static_cast<double>(batch.n_frames);
    if (batch.n_frames < 4)
        throw std::invalid_argument("cumulant_image_check: need at least 4 frames");

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
    for (long f = 0; f < batch.n_frames; ++f)
        for (int j = 0; j < m; ++j) mean(j) += batch.at(f, j);
    mean /= n;
    if (order == 1) return mean;

    Eigen::VectorXd m2 = Eigen::VectorXd::Zero(m), m3 = Eigen::VectorXd::Zero(m),
                    m4 = Eigen::VectorXd::Zero(m);
    for (long f = 0; f < batch.n_frames; ++f)
        for (int j = 0; j < m; ++j) {
            const double d = batch.at(f, j) - mean(j);
            const double d2 = d * d;
            m2(j) += d2;
            m3(j) += d2 * d;
            m4(j) += d2 * d2;
        }
    m2 /= n;
    m3 /= n;
    m4 /= n;

    Eigen::VectorXd out(m);
    if (order == 2) {
        out = n / (n - 1.0) * m2;
    } else if (order == 3) {
        out = n * n / ((n - 1.0) * (n - 2.0)) * m3;
    } else {
        for (int j = 0; j < m; ++j)
            out(j) = n * n * ((n + 1.0) * m4(j) - 3.0 * (n - 1.0) * m2(j) * m2(j)) /
                     ((n - 1.0) * (n - 2.0) * (n - 3.0));
    }
    return out;
}

/// Brute-force information oracle for the independent-frame model: simulates
/// full photon records (counts and positions, no pixel grid), evaluates the
/// exact per-frame log likelihood as a four-configuration mixture, and
/// estimates the Fisher information from the variance of the central
/// difference score.  O(n_samples nbar) work, so it is held to small nbar.
struct ScoreOracleResult {
    double fi_per_photon = 0.0;
    double fi_stderr = 0.0;
    double mean_photons = 0.0;
    long n_samples = 0;
    bool low_precision = false;  // relative stderr above 20 percent
};

inline ScoreOracleResult score_fi_oracle(const EmitterModel& model, double theta, long n_samples,
                                         std::uint64_t seed, const PsfGaussian& psf = PsfGaussian()) {
    model.validate();
    if (model.kind != BlinkKind::simplified)
        throw std::invalid_argument("score_fi_oracle: independent-frame model required");
    const double nbar = model.mean_power;  // one unit frame per sample
    if (!(nbar <= 200.0))
        throw std::invalid_argument("score_fi_oracle: nbar must be <= 200");
    if (!(theta > 0.0) || theta > 0.1 / std::sqrt(nbar))
        throw std::invalid_argument("score_fi_oracle: theta must be in (0, 0.1/sqrt(nbar)]");
    if (n_samples < 100) throw std::invalid_argument("score_fi_oracle: need >= 100 samples");

    const double sigma = psf.sigma;
    const double p = model.p_off;
    const double qs[4][2] = {{model.q_off, model.q_off},
                             {model.q_off, model.q_on},
                             {model.q_on, model.q_off},
                             {model.q_on, model.q_on}};
    const double wc[4] = {p * p, p * (1.0 - p), (1.0 - p) * p, (1.0 - p) * (1.0 - p)};
    const double dstep = theta / 20.0;
    const double lognorm = std::log(sigma * std::sqrt(2.0 * kPi));

    // log p(frame | th) = logsumexp_c [ log w_c - L_c + N log L_c
    //                                   + sum_i log f_c(x_i) ],  L_c = (q1+q2) nbar
    auto loglik = [&](const std::vector<double>& xs, long nph, double th) {
        double best = -std::numeric_limits<double>::infinity();
        double lc[4];
        for (int c = 0; c < 4; ++c) {
            const double q1 = qs[c][0], q2 = qs[c][1], qt = q1 + q2;
            if (wc[c] == 0.0 || (qt == 0.0 && nph > 0)) {
                lc[c] = -std::numeric_limits<double>::infinity();
                continue;
            }
            double l = std::log(wc[c]) - qt * nbar;
            if (nph > 0) {
                l += nph * std::log(qt * nbar);
                for (long i = 0; i < nph; ++i) {
                    const double z1 = (xs[i] + th / 2.0) / sigma;
                    const double z2 = (xs[i] - th / 2.0) / sigma;
                    double a = q1 > 0.0 ? std::log(q1 / qt) - 0.5 * z1 * z1 - lognorm
                                        : -std::numeric_limits<double>::infinity();
                    double b = q2 > 0.0 ? std::log(q2 / qt) - 0.5 * z2 * z2 - lognorm
                                        : -std::numeric_limits<double>::infinity();
                    if (a < b) std::swap(a, b);
                    l += a + std::log1p(std::exp(b - a));
                }
            }
            lc[c] = l;
            best = std::max(best, l);
        }
        double s = 0.0;
        for (int c = 0; c < 4; ++c)
            if (lc[c] > -std::numeric_limits<double>::infinity()) s += std::exp(lc[c] - best);
        return best + std::log(s);
    };

    CounterRng rng(seed, 7);
    std::vector<double> xs;
    double sum1 = 0.0, sum2 = 0.0, sum4 = 0.0;
    for (long s = 0; s < n_samples; ++s) {
        const double u = rng.uniform();
        int cfg = u < wc[0] ? 0 : (u < wc[0] + wc[1] ? 1 : (u < wc[0] + wc[1] + wc[2] ? 2 : 3));
        xs.clear();
        for (int e = 0; e < 2; ++e) {
            const double q = qs[cfg][e];
            const long nph = q > 0.0 ? rng.poisson(q * nbar) : 0;
            const double center = (e == 0 ? -theta / 2.0 : theta / 2.0);
            for (long i = 0; i < nph; ++i) xs.push_back(center + sigma * rng.normal());
        }
        const long nph = static_cast<long>(xs.size());
        const double score =
            (loglik(xs, nph, theta + dstep) - loglik(xs, nph, theta - dstep)) / (2.0 * dstep);
        sum1 += score;
        sum2 += score * score;
        sum4 += score * score * score * score;
    }

    const double ns = static_cast<double>(n_samples);
    const double mean_score = sum1 / ns;
    const double var_score = sum2 / ns - mean_score * mean_score;
    const double m4 = sum4 / ns;  // score mean is ~0, raw moments suffice
    const double var_of_var = std::max(0.0, m4 - var_score * var_score) / ns;

    const double g1 = p * model.q_off + (1.0 - p) * model.q_on;
    ScoreOracleResult res;
    res.mean_photons = 2.0 * g1 * nbar;
    res.fi_per_photon = var_score / res.mean_photons;
    res.fi_stderr = std::sqrt(var_of_var) / res.mean_photons;
    res.n_samples = n_samples;
    res.low_precision = res.fi_stderr > 0.2 * res.fi_per_photon;
    return res;
}

static_assert(std::endian::native == std::endian::little,
              "frame dumps are little-endian; big-endian hosts are unsupported");

/// One JSON header line, then raw little-endian int32 counts.
inline void dump_frames(const FrameBatch& batch, const std::string& path) {
    nlohmann::json h;
    h["magic"] = "sofi-frames-v1";
    h["n_frames"] = batch.n_frames;
    h["n_pixels"] = batch.geometry.n_pixels;
    h["seed"] = batch.seed;
    h["theta"] = batch.theta;
    h["model"] = {{"kind", batch.model.kind == BlinkKind::simplified ? "simplified" : "markov"},
                  {"q_on", batch.model.q_on},
                  {"q_off", batch.model.q_off},
                  {"mean_power", batch.model.mean_power},
                  {"p_off", batch.model.p_off},
                  {"tau_on", batch.model.tau_on},
                  {"tau_off", batch.model.tau_off}};
    h["geometry"] = {{"pixel_size", batch.geometry.pixel_size},
                     {"n_pixels", batch.geometry.n_pixels},
                     {"frame_time", batch.geometry.frame_time},
                     {"background_mean", batch.geometry.background_mean}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("dump_frames: cannot open " + path);
    out << h.dump() << '\n';
    out.write(reinterpret_cast<const char*>(batch.counts.data()),
              static_cast<std::streamsize>(batch.counts.size() * sizeof(std::int32_t)));
    if (!out) throw std::runtime_error("dump_frames: write failed for " + path);
}

inline FrameBatch load_frames(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_frames: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_frames: missing header");
    nlohmann::json h = nlohmann::json::parse(line);
    if (h.value("magic", "") != std::string("sofi-frames-v1"))
        throw std::runtime_error("load_frames: bad magic in " + path);

    EmitterModel model;
    const auto& jm = h.at("model");
    model.kind = jm.at("kind").get<std::string>() == "markov" ? BlinkKind::markov
                                                              : BlinkKind::simplified;
    model.q_on = jm.at("q_on").get<double>();
    model.q_off = jm.at("q_off").get<double>();
    model.mean_power = jm.at("mean_power").get<double>();
    model.p_off = jm.at("p_off").get<double>();
    model.tau_on = jm.at("tau_on").get<double>();
    model.tau_off = jm.at("tau_off").get<double>();
    const auto& jg = h.at("geometry");
    const DetectorGeometry geom(jg.at("pixel_size").get<double>(), jg.at("n_pixels").get<int>(),
                                jg.at("frame_time").get<double>(),
                                jg.at("background_mean").get<double>());
    FrameBatch b(model, geom, h.at("theta").get<double>(), h.at("seed").get<std::uint64_t>(),
                 h.at("n_frames").get<long>());

    const std::size_t n = static_cast<std::size_t>(b.n_frames) * b.geometry.n_pixels;
    b.counts.resize(n);
    in.read(reinterpret_cast<char*>(b.counts.data()),
            static_cast<std::streamsize>(n * sizeof(std::int32_t)));
    if (in.gcount() != static_cast<std::streamsize>(n * sizeof(std::int32_t)))
        throw std::runtime_error("load_frames: truncated counts in " + path);
    return b;
}

} // namespace sofi
