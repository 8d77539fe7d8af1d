#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace sofi::io {

/// Grid spec "lo:hi:lin25" or "lo:hi:log25"; at most 10^4 points.
struct Grid {
    std::vector<double> values;
    bool log_spaced = false;
};

inline Grid parse_range(const std::string& spec) {
    const auto c1 = spec.find(':');
    const auto c2 = spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw std::invalid_argument("range: expected lo:hi:lin<N> or lo:hi:log<N>, got '" + spec +
                                    "'");
    double lo, hi;
    try {
        lo = std::stod(spec.substr(0, c1));
        hi = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
    } catch (const std::exception&) {
        throw std::invalid_argument("range: bad bounds in '" + spec + "'");
    }
    const std::string tail = spec.substr(c2 + 1);
    Grid g;
    if (tail.rfind("log", 0) == 0)
        g.log_spaced = true;
    else if (tail.rfind("lin", 0) != 0)
        throw std::invalid_argument("range: grid kind must be lin or log in '" + spec + "'");
    long n;
    try {
        n = std::stol(tail.substr(3));
    } catch (const std::exception&) {
        throw std::invalid_argument("range: bad point count in '" + spec + "'");
    }
    if (n < 1 || n > 10000)
        throw std::invalid_argument("range: point count must be in [1, 10000]");
    if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
        throw std::invalid_argument("range: bounds must be finite with hi >= lo");
    if (g.log_spaced && lo <= 0.0)
        throw std::invalid_argument("range: log grid needs lo > 0");
    g.values.resize(n);
    if (n == 1) {
        g.values[0] = lo;
        return g;
    }
    for (long i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        g.values[i] = g.log_spaced ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
    }
    return g;
}

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

/// One result table: resolved parameters (for the provenance header), a fixed
/// column list, and rows of already-formatted cells.
struct Table {
    std::string tool;  // e.g. "sofi sweep v1"
    std::vector<std::pair<std::string, std::string>> params;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

inline void write_csv(std::ostream& os, const Table& t) {
    os << "# " << t.tool << "\n";
    for (const auto& [k, v] : t.params) os << "# param " << k << "=" << v << "\n";
    os << "# columns: ";
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        os << (i ? "," : "") << t.columns[i];
    os << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << "\n";
    }
}

inline void write_json(std::ostream& os, const Table& t) {
    auto esc = [](const std::string& s) {
        std::string o;
        for (char c : s) {
            if (c == '"' || c == '\\') o += '\\';
            o += c;
        }
        return o;
    };
    os << "{\n  \"tool\": \"" << esc(t.tool) << "\",\n  \"params\": {";
    for (std::size_t i = 0; i < t.params.size(); ++i)
        os << (i ? ", " : "") << "\"" << esc(t.params[i].first) << "\": \""
           << esc(t.params[i].second) << "\"";
    os << "},\n  \"columns\": [";
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        os << (i ? ", " : "") << "\"" << esc(t.columns[i]) << "\"";
    os << "],\n  \"rows\": [\n";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        os << "    [";
        for (std::size_t i = 0; i < t.rows[r].size(); ++i)
            os << (i ? ", " : "") << "\"" << esc(t.rows[r][i]) << "\"";
        os << "]" << (r + 1 < t.rows.size() ? "," : "") << "\n";
    }
    os << "  ]\n}\n";
}

/// Flat key=value config; '#' starts a comment, blank lines ignored.
inline std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = strip(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        " is not key=value");
        const std::string key = strip(line.substr(0, eq)), val = strip(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config: empty key at line " + std::to_string(lineno));
        kv[key] = val;
    }
    return kv;
}

/// Index-parallel map with deterministic result order; rethrows the first
/// worker exception.
template <class F>
void parallel_for(unsigned n_threads, long n, F&& body) {
    if (n_threads <= 1 || n <= 1) {
        for (long i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&] {
        for (;;) {
            const long i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned nt = std::min<unsigned>(n_threads, static_cast<unsigned>(n));
    pool.reserve(nt);
    for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

} // namespace sofi::io
