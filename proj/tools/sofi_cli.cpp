// Command-line front end: figure-style sweeps, single-point queries, and the
// Monte Carlo validation suite, with reproducible CSV/JSON output.
#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "sofi/errors.hpp"
#include "sofi/fisher.hpp"
#include "sofi/io.hpp"
#include "sofi/mc.hpp"

namespace {

using namespace sofi;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitValidation = 3;

struct Options {
    std::string command;
    std::string model;  // "", "simplified", "markov"
    double alpha = 1.0;
    double p = 0.5;
    std::optional<double> pbar;
    std::optional<double> nbar;  // sets pbar = nbar / tau
    double tau_on = 1.0, tau_off = 1.0;
    double dx = 0.5;
    double extent = 8.0;
    double tau = 1.0;
    double mu_b = 0.0;
    double theta = 0.2;
    std::string schemes = "M";
    std::string axis;
    std::string range;
    std::string quantity = "auto";  // sweep: auto | zeta | zeta_pix | fi
    double tau_lo = 1e-3, tau_hi = 1e3;
    std::string weights = "snr";
    std::string output;  // empty = stdout
    std::string format = "csv";
    unsigned threads = std::thread::hardware_concurrency();
    std::uint64_t seed = 12345;
    long frames = 500000;  // validate
};

std::string model_or_default(const Options& o) {
    if (!o.model.empty()) return o.model;
    if (o.command == "tau-opt" || (o.command == "sweep" && o.axis == "tau")) return "markov";
    return "simplified";
}

double resolved_pbar(const Options& o, double tau) {
    if (o.pbar && o.nbar)
        throw std::invalid_argument("give either pbar or nbar, not both");
    if (o.nbar) return *o.nbar / tau;
    return o.pbar.value_or(100.0);
}

EmitterModel make_model(const Options& o, const std::string& kind, double alpha, double p,
                        double pbar) {
    return kind == "markov" ? EmitterModel::markov(alpha, o.tau_on, o.tau_off, pbar)
                            : EmitterModel::simplified(alpha, p, pbar);
}

WeightPolicy weight_policy(const Options& o) {
    if (o.weights == "snr") return WeightPolicy::snr_optimal;
    if (o.weights == "uniform") return WeightPolicy::uniform;
    throw std::invalid_argument("weights: must be snr or uniform");
}

std::vector<std::string> split_schemes(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(tok);
    if (out.empty()) throw std::invalid_argument("schemes: empty list");
    return out;
}

std::string flag_string(bool converged, bool fallback) {
    std::string f = converged ? "converged" : "unconverged";
    if (fallback) f += "+uniform-weights";
    return f;
}

void push_param(io::Table& t, const std::string& k, const std::string& v) {
    t.params.emplace_back(k, v);
}
void push_param(io::Table& t, const std::string& k, double v) {
    t.params.emplace_back(k, io::fmt_double(v));
}

void echo_common(io::Table& t, const Options& o, const std::string& kind) {
    push_param(t, "command", o.command);
    push_param(t, "model", kind);
    push_param(t, "alpha", o.alpha);
    if (kind == "simplified") push_param(t, "p", o.p);
    if (kind == "markov") {
        push_param(t, "tau_on", o.tau_on);
        push_param(t, "tau_off", o.tau_off);
    }
    if (o.nbar)
        push_param(t, "nbar", *o.nbar);
    else
        push_param(t, "pbar", resolved_pbar(o, o.tau));
    push_param(t, "dx", o.dx);
    push_param(t, "extent", o.extent);
    push_param(t, "tau", o.tau);
    push_param(t, "mu_B", o.mu_b);
    push_param(t, "weights", o.weights);
}

void emit(const io::Table& t, const Options& o) {
    if (o.format != "csv" && o.format != "json")
        throw std::invalid_argument("format: must be csv or json");
    std::string path = o.output;
    if (!path.empty() && path != "-") {
        const char* dir = std::getenv("SOFI_OUTPUT_DIR");
        std::filesystem::path p(path);
        if (dir && *dir && p.is_relative()) p = std::filesystem::path(dir) / p;
        std::ofstream out(p);
        if (!out) throw std::runtime_error("cannot open output file " + p.string());
        o.format == "csv" ? io::write_csv(out, t) : io::write_json(out, t);
        return;
    }
    o.format == "csv" ? io::write_csv(std::cout, t) : io::write_json(std::cout, t);
}

// ---- commands -------------------------------------------------------------

int cmd_fi_curve(const Options& o) {
    const std::string kind = model_or_default(o);
    const auto grid = io::parse_range(o.range.empty() ? "0.02:1:log25" : o.range);
    const auto schemes = split_schemes(o.schemes);
    const auto geom = DetectorGeometry::covering(o.dx, o.extent, o.tau, o.mu_b);
    const auto model = make_model(o, kind, o.alpha, o.p, resolved_pbar(o, o.tau));
    const auto wp = weight_policy(o);

    io::Table t;
    t.tool = "sofi fi-curve v1";
    echo_common(t, o, kind);
    push_param(t, "range", o.range.empty() ? "0.02:1:log25" : o.range);
    push_param(t, "schemes", o.schemes);
    t.columns = {"theta", "scheme", "fi_per_photon", "residual", "flag"};

    const long npts = static_cast<long>(grid.values.size());
    const long nsch = static_cast<long>(schemes.size());
    t.rows.resize(npts * nsch);
    io::parallel_for(o.threads, npts * nsch, [&](long i) {
        const double th = grid.values[i / nsch];
        const auto scheme = SchemeSpec::parse(schemes[i % nsch]);
        const auto s = scheme_summary(scheme, geom, model, th, wp);
        const double fi = gaussian_fi(s) / s.mean_photons_per_frame;
        t.rows[i] = {io::fmt_double(th), scheme.name(), io::fmt_double(fi), "",
                     flag_string(true, s.uniform_weight_fallback)};
    });
    emit(t, o);
    return kExitOk;
}

int cmd_rgl(const Options& o) {
    const std::string kind = model_or_default(o);
    const auto schemes = split_schemes(o.schemes);
    const auto geom = DetectorGeometry::covering(o.dx, o.extent, o.tau, o.mu_b);
    const auto model = make_model(o, kind, o.alpha, o.p, resolved_pbar(o, o.tau));
    const auto wp = weight_policy(o);

    io::Table t;
    t.tool = "sofi rgl v1";
    echo_common(t, o, kind);
    push_param(t, "schemes", o.schemes);
    t.columns = {"scheme", "zeta", "residual", "flag"};
    t.rows.resize(schemes.size());
    io::parallel_for(o.threads, static_cast<long>(schemes.size()), [&](long i) {
        const auto scheme = SchemeSpec::parse(schemes[i]);
        const auto rep = rgl(scheme, geom, model, wp);
        const auto s = scheme_summary(scheme, geom, model, detail::kRglThetaGrid[0], wp);
        t.rows[i] = {scheme.name(), io::fmt_double(rep.zeta), io::fmt_double(rep.residual),
                     flag_string(rep.converged, s.uniform_weight_fallback)};
    });
    emit(t, o);
    return kExitOk;
}

int cmd_zeta_max(const Options& o) {
    const double nbar = o.nbar.value_or(o.pbar.value_or(1000.0) * o.tau);
    const double z = zeta_max(o.p, o.alpha, nbar);
    io::Table t;
    t.tool = "sofi zeta-max v1";
    push_param(t, "command", o.command);
    push_param(t, "p", o.p);
    push_param(t, "alpha", o.alpha);
    push_param(t, "nbar", nbar);
    t.columns = {"p", "alpha", "nbar", "zeta_max"};
    t.rows = {{io::fmt_double(o.p), io::fmt_double(o.alpha), io::fmt_double(nbar),
               io::fmt_double(z)}};
    emit(t, o);
    return kExitOk;
}

int cmd_sweep(const Options& o) {
    static const std::vector<std::string> axes = {"theta", "tau", "pbar", "alpha",
                                                  "dx",    "p",   "mu_B"};
    if (std::find(axes.begin(), axes.end(), o.axis) == axes.end())
        throw std::invalid_argument("axis: must be one of theta|tau|pbar|alpha|dx|p|mu_B");
    if (o.range.empty()) throw std::invalid_argument("range: required for sweep");
    const std::string kind = model_or_default(o);
    if (o.axis == "p" && kind == "markov")
        throw std::invalid_argument("axis p: only meaningful for the simplified model");
    const auto grid = io::parse_range(o.range);
    const auto schemes = split_schemes(o.schemes);
    const auto wp = weight_policy(o);

    std::string quantity = o.quantity;
    if (quantity == "auto")
        quantity = o.axis == "theta" ? "fi" : (o.axis == "dx" ? "zeta_pix" : "zeta");
    if (quantity != "fi" && quantity != "zeta" && quantity != "zeta_pix")
        throw std::invalid_argument("quantity: must be auto|fi|zeta|zeta_pix");

    io::Table t;
    t.tool = "sofi sweep v1";
    echo_common(t, o, kind);
    // the swept parameter lives in the rows, not the fixed-parameter header
    std::erase_if(t.params, [&](const auto& kv) {
        return kv.first == o.axis || (o.axis == "pbar" && kv.first == "nbar");
    });
    if (quantity == "fi" && o.axis != "theta") push_param(t, "theta", o.theta);
    push_param(t, "axis", o.axis);
    push_param(t, "range", o.range);
    push_param(t, "schemes", o.schemes);
    push_param(t, "quantity", quantity);
    t.columns = {o.axis, "scheme", quantity, "residual", "flag"};

    const long npts = static_cast<long>(grid.values.size());
    const long nsch = static_cast<long>(schemes.size());
    t.rows.resize(npts * nsch);
    io::parallel_for(o.threads, npts * nsch, [&](long i) {
        const double v = grid.values[i / nsch];
        const std::string& sname = schemes[i % nsch];

        double theta = o.theta, tau = o.tau, dx = o.dx, mu_b = o.mu_b;
        double alpha = o.alpha, p = o.p;
        if (o.axis == "theta") theta = v;
        if (o.axis == "tau") tau = v;
        if (o.axis == "dx") dx = v;
        if (o.axis == "mu_B") mu_b = v;
        if (o.axis == "alpha") alpha = v;
        if (o.axis == "p") p = v;
        double pbar = o.axis == "pbar" ? v : resolved_pbar(o, tau);

        if (sname == "ZETA_MAX" || sname == "zeta_max") {
            if (kind == "markov")
                throw std::invalid_argument("ZETA_MAX: defined for the simplified model only");
            const double z = zeta_max(p, alpha, pbar * tau);
            t.rows[i] = {io::fmt_double(v), "ZETA_MAX", io::fmt_double(z), "", "converged"};
            return;
        }
        const auto geom = DetectorGeometry::covering(dx, o.extent, tau, mu_b);
        const auto model = make_model(o, kind, alpha, p, pbar);
        const auto scheme = SchemeSpec::parse(sname);
        if (quantity == "fi") {
            const auto s = scheme_summary(scheme, geom, model, theta, wp);
            const double fi = gaussian_fi(s) / s.mean_photons_per_frame;
            t.rows[i] = {io::fmt_double(v), scheme.name(), io::fmt_double(fi), "",
                         flag_string(true, s.uniform_weight_fallback)};
            return;
        }
        const auto rep = quantity == "zeta" ? rgl(scheme, geom, model, wp)
                                            : rgl_pix(scheme, geom, model, wp);
        const auto s = scheme_summary(scheme, geom, model, detail::kRglThetaGrid[0], wp);
        t.rows[i] = {io::fmt_double(v), scheme.name(), io::fmt_double(rep.zeta),
                     io::fmt_double(rep.residual),
                     flag_string(rep.converged, s.uniform_weight_fallback)};
    });
    emit(t, o);
    return kExitOk;
}

int cmd_tau_opt(const Options& o) {
    const std::string kind = model_or_default(o);
    const auto schemes = split_schemes(o.schemes);
    const auto wp = weight_policy(o);

    io::Table t;
    t.tool = "sofi tau-opt v1";
    echo_common(t, o, kind);
    push_param(t, "schemes", o.schemes);
    push_param(t, "tau_lo", o.tau_lo);
    push_param(t, "tau_hi", o.tau_hi);
    t.columns = {"scheme", "tau_opt", "zeta", "flag"};
    t.rows.resize(schemes.size());
    io::parallel_for(o.threads, static_cast<long>(schemes.size()), [&](long i) {
        const auto scheme = SchemeSpec::parse(schemes[i]);
        const auto geom = DetectorGeometry::covering(o.dx, o.extent, 1.0, o.mu_b);
        const auto model = make_model(o, kind, o.alpha, o.p, resolved_pbar(o, 1.0));
        const auto res = optimal_frame_time(scheme, geom, model, o.tau_lo, o.tau_hi, wp);
        t.rows[i] = {scheme.name(), io::fmt_double(res.tau_opt), io::fmt_double(res.zeta_at_opt),
                     res.boundary ? "boundary" : "interior"};
    });
    emit(t, o);
    return kExitOk;
}

int cmd_antibunching(const Options& o) {
    const auto grid = io::parse_range(o.range.empty() ? "0.02:2:log25" : o.range);
    io::Table t;
    t.tool = "sofi antibunching v1";
    push_param(t, "command", o.command);
    push_param(t, "range", o.range.empty() ? "0.02:2:log25" : o.range);
    t.columns = {"quantity", "theta", "value", "residual", "flag"};
    const auto rep = antibunching_rgl();
    t.rows.push_back({"zeta", "", io::fmt_double(rep.zeta), io::fmt_double(rep.residual),
                      flag_string(rep.converged, false)});
    const long n = static_cast<long>(grid.values.size());
    std::vector<std::vector<std::string>> rows(n);
    io::parallel_for(o.threads, n, [&](long i) {
        const double th = grid.values[i];
        rows[i] = {"f2", io::fmt_double(th), io::fmt_double(antibunching_fi(th)), "", "converged"};
    });
    for (auto& r : rows) t.rows.push_back(std::move(r));
    emit(t, o);
    return kExitOk;
}

// Monte Carlo validation suite: sampler moments, score oracle against the
// exact standard-imaging law, and empirical-vs-analytic summary consistency
// for both blinking models.  Nonzero exit on any failed tolerance.
int cmd_validate(const Options& o) {
    io::Table t;
    t.tool = "sofi validate v1";
    push_param(t, "command", o.command);
    push_param(t, "seed", io::fmt_double(static_cast<double>(o.seed)));
    push_param(t, "frames", io::fmt_double(static_cast<double>(o.frames)));
    t.columns = {"check", "observed", "bound", "status"};
    bool all_ok = true;
    auto record = [&](const std::string& name, double observed, double bound, bool ok) {
        t.rows.push_back({name, io::fmt_double(observed), io::fmt_double(bound),
                          ok ? "pass" : "FAIL"});
        all_ok = all_ok && ok;
    };

    for (double mu : {5.0, 50.0}) {
        CounterRng r(o.seed, 17);
        const long n = 500000;
        double s1 = 0, s2 = 0;
        for (long i = 0; i < n; ++i) {
            const double x = static_cast<double>(r.poisson(mu));
            s1 += x;
            s2 += x * x;
        }
        const double m = s1 / n, v = s2 / n - m * m;
        const double zm = std::abs(m - mu) / std::sqrt(mu / n);
        const double zv = std::abs(v - mu) / std::sqrt((mu + 2 * mu * mu) / n);
        record("poisson-mean-" + io::fmt_double(mu), zm, 5.0, zm < 5.0);
        record("poisson-var-" + io::fmt_double(mu), zv, 5.0, zv < 5.0);
    }

    {
        const auto m0 = EmitterModel::simplified(0.0, 0.5, 20.0);
        const auto res = score_fi_oracle(m0, 0.02, 200000, o.seed);
        const double z = std::abs(res.fi_per_photon - si_fisher_exact(0.02)) / res.fi_stderr;
        record("oracle-si-limit", z, 5.0, z < 5.0 && !res.low_precision);
    }

    for (int kind = 0; kind < 2; ++kind) {
        const auto geom = DetectorGeometry::covering(1.0);
        const auto model = kind == 0 ? EmitterModel::simplified(0.9, 0.5, 50.0)
                                     : EmitterModel::markov(0.9, 1.0, 1.0, 50.0);
        const auto scheme = SchemeSpec::parse("M_XC2S");
        const auto batch = simulate_frames(model, geom, 0.3, o.frames, o.seed + kind);
        const auto emp = empirical_summary(batch, scheme, 200);
        const auto ana = scheme_summary(scheme, geom, model, 0.3);
        const int n = static_cast<int>(ana.mu.size());
        double zmean = 0, zcov = 0;
        for (int i = 0; i < n; ++i)
            zmean = std::max(zmean, std::abs(emp.mean(i) - ana.mu(i)) /
                                        std::sqrt(ana.sigma1(i, i) / emp.n_frames));
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const double mag = std::abs(emp.sigma1(i, j)) + std::abs(ana.sigma1(i, j));
                if (mag < 1e-4 || emp.sigma1_se(i, j) == 0.0) continue;
                zcov = std::max(zcov, std::abs(emp.sigma1(i, j) - ana.sigma1(i, j)) /
                                          emp.sigma1_se(i, j));
            }
        const char* nm = kind == 0 ? "simplified" : "markov";
        record(std::string("summary-mean-") + nm, zmean, 5.0, zmean < 5.0);
        record(std::string("summary-cov-") + nm, zcov, 5.0, zcov < 5.0);
    }

    emit(t, o);
    return all_ok ? kExitOk : kExitValidation;
}

// ---- option wiring ---------------------------------------------------------

const std::vector<std::string> kKnownKeys = {
    "command", "model",    "alpha",   "p",       "pbar",     "nbar",   "tau-on", "tau-off",
    "dx",      "extent",   "tau",     "mu-b",    "theta",    "scheme", "schemes", "axis",
    "range",   "quantity", "tau-lo",  "tau-hi",  "weights",  "output", "format", "threads",
    "seed",    "frames"};

void add_common(CLI::App* sub, Options& o, const std::map<std::string, std::string>& cfg) {
    auto dget = [&cfg](const std::string& key, double hard) {
        const auto it = cfg.find(key);
        return it == cfg.end() ? hard : std::stod(it->second);
    };
    auto sget = [&cfg](const std::string& key, const std::string& hard) {
        const auto it = cfg.find(key);
        return it == cfg.end() ? hard : it->second;
    };
    o.model = sget("model", o.model);
    o.alpha = dget("alpha", o.alpha);
    o.p = dget("p", o.p);
    if (cfg.count("pbar")) o.pbar = std::stod(cfg.at("pbar"));
    if (cfg.count("nbar")) o.nbar = std::stod(cfg.at("nbar"));
    o.tau_on = dget("tau-on", o.tau_on);
    o.tau_off = dget("tau-off", o.tau_off);
    o.dx = dget("dx", o.dx);
    o.extent = dget("extent", o.extent);
    o.tau = dget("tau", o.tau);
    o.mu_b = dget("mu-b", o.mu_b);
    o.theta = dget("theta", o.theta);
    o.schemes = sget("schemes", sget("scheme", o.schemes));
    o.axis = sget("axis", o.axis);
    o.range = sget("range", o.range);
    o.quantity = sget("quantity", o.quantity);
    o.tau_lo = dget("tau-lo", o.tau_lo);
    o.tau_hi = dget("tau-hi", o.tau_hi);
    o.weights = sget("weights", o.weights);
    o.output = sget("output", o.output);
    o.format = sget("format", o.format);
    o.threads = static_cast<unsigned>(dget("threads", o.threads));
    o.seed = static_cast<std::uint64_t>(dget("seed", static_cast<double>(o.seed)));
    o.frames = static_cast<long>(dget("frames", static_cast<double>(o.frames)));

    sub->add_option("--model", o.model, "blinking model: simplified|markov");
    sub->add_option("--alpha", o.alpha, "fluctuation strength in [0,1]");
    sub->add_option("--p", o.p, "off-state probability (simplified model)");
    sub->add_option("--pbar", [&o](const std::vector<std::string>& v) {
        o.pbar = std::stod(v[0]);
        return true;
    }, "mean emitter power, photons per tau0");
    sub->add_option("--nbar", [&o](const std::vector<std::string>& v) {
        o.nbar = std::stod(v[0]);
        return true;
    }, "photons per frame; sets pbar = nbar/tau");
    sub->add_option("--tau-on", o.tau_on, "markov on-state dwell time");
    sub->add_option("--tau-off", o.tau_off, "markov off-state dwell time");
    sub->add_option("--dx", o.dx, "pixel size in sigma units");
    sub->add_option("--extent", o.extent, "detector half extent in sigma units");
    sub->add_option("--tau", o.tau, "frame time in tau0 units");
    sub->add_option("--mu-b", o.mu_b, "background mean per pixel per frame");
    sub->add_option("--theta", o.theta, "emitter separation in sigma units");
    sub->add_option("--scheme,--schemes", o.schemes, "comma-separated scheme list");
    sub->add_option("--axis", o.axis, "sweep axis: theta|tau|pbar|alpha|dx|p|mu_B");
    sub->add_option("--range", o.range, "grid spec lo:hi:lin<N> or lo:hi:log<N>");
    sub->add_option("--quantity", o.quantity, "sweep quantity: auto|fi|zeta|zeta_pix");
    sub->add_option("--tau-lo", o.tau_lo, "frame-time search lower bound");
    sub->add_option("--tau-hi", o.tau_hi, "frame-time search upper bound");
    sub->add_option("--weights", o.weights, "cross-cumulant weights: snr|uniform");
    sub->add_option("--output", o.output, "output path ('' or '-' = stdout)");
    sub->add_option("--format", o.format, "output format: csv|json");
    sub->add_option("--threads", o.threads, "worker threads for sweep points");
    sub->add_option("--seed", o.seed, "random seed (validate)");
    sub->add_option("--frames", o.frames, "frames per validation batch");
    sub->add_option("--config", "flat key=value config file (flags override)")
        ->expected(1);
}

} // namespace

int main(int argc, char** argv) {
    // pre-scan for --config so file values become defaults that flags override
    std::map<std::string, std::string> cfg;
    try {
        for (int i = 1; i < argc; ++i) {
            const std::string a = argv[i];
            if (a == "--config" && i + 1 < argc) {
                cfg = io::read_config(argv[i + 1]);
            } else if (a.rfind("--config=", 0) == 0) {
                cfg = io::read_config(a.substr(9));
            }
        }
        for (const auto& [k, v] : cfg)
            if (std::find(kKnownKeys.begin(), kKnownKeys.end(), k) == kKnownKeys.end())
                throw std::invalid_argument("config: unknown key '" + k + "'");
    } catch (const std::exception& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    CLI::App app{"Fisher-information and resolution-gain calculator for "
                 "fluctuation-based super-resolution imaging"};
    app.require_subcommand(0, 1);

    Options o;
    const std::vector<std::string> commands = {"fi-curve", "rgl",      "zeta-max",    "sweep",
                                               "tau-opt",  "validate", "antibunching"};
    std::map<std::string, CLI::App*> subs;
    for (const auto& c : commands) {
        subs[c] = app.add_subcommand(c);
        add_common(subs[c], o, cfg);
    }
    add_common(&app, o, cfg);  // bare `sofi --config file` with command= in the file

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    std::string command;
    for (const auto& c : commands)
        if (subs[c]->parsed()) command = c;
    if (command.empty()) {
        const auto it = cfg.find("command");
        if (it != cfg.end() &&
            std::find(commands.begin(), commands.end(), it->second) != commands.end()) {
            command = it->second;
        } else {
            std::cerr << "usage error: no command given (see --help)\n";
            return kExitUsage;
        }
    }
    o.command = command;

    try {
        if (command == "fi-curve") return cmd_fi_curve(o);
        if (command == "rgl") return cmd_rgl(o);
        if (command == "zeta-max") return cmd_zeta_max(o);
        if (command == "sweep") return cmd_sweep(o);
        if (command == "tau-opt") return cmd_tau_opt(o);
        if (command == "antibunching") return cmd_antibunching(o);
        if (command == "validate") return cmd_validate(o);
        std::cerr << "usage error: unknown command " << command << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UnsupportedSchemeError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const CoverageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
