#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "sofi/errors.hpp"
#include "sofi/model.hpp"

namespace sofi {

/// Estimation schemes: which per-frame statistics the estimator may use.
///   M       per-pixel means n_i
///   AC2     per-pixel second auto-cumulants only
///   M_ACK   means plus auto-cumulants of order 2..K (K=1 degenerates to M)
///   M_XC2   means plus all pair products n_i n_j, i <= j
///   M_XC2S  like M_XC2 but pair covariances summed per centroid
///   M_XC2W  centroid sums with SNR-optimal weights
enum class SchemeKind { M, AC2, M_ACK, M_XC2, M_XC2S, M_XC2W };

struct SchemeSpec {
    SchemeKind kind = SchemeKind::M;
    int order = 1;  // K for M_ACK

    SchemeSpec() = default;
    SchemeSpec(SchemeKind k, int K = 1) : kind(k), order(K) {
        if (kind == SchemeKind::M_ACK) {
            if (order < 1 || order > 4)
                throw UnsupportedSchemeError("M_ACK order must be in 1..4");
        } else {
            order = (kind == SchemeKind::M) ? 1 : 2;
        }
    }

    /// Highest power of a single pixel count appearing in any component.
    int count_degree() const {
        switch (kind) {
            case SchemeKind::M: return 1;
            case SchemeKind::M_ACK: return order;
            default: return 2;
        }
    }

    bool has_means() const { return kind != SchemeKind::AC2; }

    std::string name() const {
        switch (kind) {
            case SchemeKind::M: return "M";
            case SchemeKind::AC2: return "AC2";
            case SchemeKind::M_ACK:
                return order == 1 ? "M" : order == 2 ? "M+AC2" : "M+ACK" + std::to_string(order);
            case SchemeKind::M_XC2: return "M+XC2";
            case SchemeKind::M_XC2S: return "M+XC2S";
            case SchemeKind::M_XC2W: return "M+XC2W";
        }
        return "?";
    }

    static SchemeSpec parse(const std::string& text) {
        std::string s;
        for (char c : text)
            if (!std::isspace(static_cast<unsigned char>(c)))
                s.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        std::replace(s.begin(), s.end(), '+', '_');
        // strip M_ACK(3) style parentheses
        std::string t;
        for (char c : s)
            if (c != '(' && c != ')') t.push_back(c);
        if (t == "M") return SchemeSpec(SchemeKind::M);
        if (t == "AC2") return SchemeSpec(SchemeKind::AC2);
        if (t == "M_AC2" || t == "M_ACK2") return SchemeSpec(SchemeKind::M_ACK, 2);
        if (t == "M_ACK3") return SchemeSpec(SchemeKind::M_ACK, 3);
        if (t == "M_ACK4") return SchemeSpec(SchemeKind::M_ACK, 4);
        if (t == "M_XC2") return SchemeSpec(SchemeKind::M_XC2);
        if (t == "M_XC2S") return SchemeSpec(SchemeKind::M_XC2S);
        if (t == "M_XC2W") return SchemeSpec(SchemeKind::M_XC2W);
        throw UnsupportedSchemeError("unknown scheme '" + text + "'");
    }
};

/// Structural description of one statistic component (no model values).
struct ComponentDescriptor {
    enum class Type { mean, auto_power, pair_product, centroid_sum };
    Type type = Type::mean;
    int pixel_a = -1, pixel_b = -1;  // pair_product has pixel_a <= pixel_b
    int power = 1;                   // auto_power order
    double centroid = 0.0;           // centroid_sum: l in {1, 3/2, ..., M_pix}, 1-based
};

/// Enumerates the statistic vector for a scheme over the full pixel grid.
inline std::vector<ComponentDescriptor> statistic_components(const SchemeSpec& scheme,
                                                             const DetectorGeometry& geom) {
    const int m = geom.n_pixels;
    std::vector<ComponentDescriptor> out;
    auto add_means = [&] {
        for (int j = 0; j < m; ++j) {
            ComponentDescriptor d;
            d.type = ComponentDescriptor::Type::mean;
            d.pixel_a = j;
            out.push_back(d);
        }
    };
    auto add_powers = [&](int k) {
        for (int j = 0; j < m; ++j) {
            ComponentDescriptor d;
            d.type = ComponentDescriptor::Type::auto_power;
            d.pixel_a = j;
            d.power = k;
            out.push_back(d);
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
            for (int a = 0; a < m; ++a)
                for (int b = a; b < m; ++b) {
                    ComponentDescriptor d;
                    d.type = ComponentDescriptor::Type::pair_product;
                    d.pixel_a = a;
                    d.pixel_b = b;
                    out.push_back(d);
                }
            break;
        case SchemeKind::M_XC2S:
        case SchemeKind::M_XC2W:
            add_means();
            for (int twice_l = 2; twice_l <= 2 * m; ++twice_l) {
                ComponentDescriptor d;
                d.type = ComponentDescriptor::Type::centroid_sum;
                d.centroid = 0.5 * twice_l;  // 1-based pixel coordinates
                out.push_back(d);
            }
            break;
    }
    return out;
}

} // namespace sofi
