#include "radonlab/poly_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace radonlab {

namespace {

int multiindex_order(const std::vector<int>& alpha) {
    int s = 0;
    for (int a : alpha) s += a;
    return s;
}

bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

long long checked_i64(__int128 v, const char* what) {
    if (v > std::numeric_limits<long long>::max() || v < std::numeric_limits<long long>::min())
        throw std::overflow_error(std::string("integer overflow in ") + what);
    return static_cast<long long>(v);
}

__int128 checked_mul(__int128 a, __int128 b, const char* what) {
    // operands stay within +-2^63 before the check, so the product fits i128
    const __int128 p = a * b;
    if (a != 0 && p / a != b) throw std::overflow_error(std::string("integer overflow in ") + what);
    if (p > std::numeric_limits<long long>::max() || p < std::numeric_limits<long long>::min())
        throw std::overflow_error(std::string("integer overflow in ") + what);
    return p;
}

}  // namespace

PolynomialMap::PolynomialMap(int dim_domain, int dim_range, std::vector<Term> terms)
    : d_(dim_domain), n_(dim_range), terms_(std::move(terms)) {
    if (d_ <= 0 || n_ <= 0) throw std::invalid_argument("PolynomialMap: dimensions must be positive");
    for (auto& t : terms_) {
        if (static_cast<int>(t.alpha.size()) != d_)
            throw std::invalid_argument("PolynomialMap: multiindex length != d");
        if (static_cast<int>(t.coeff.size()) != n_)
            throw std::invalid_argument("PolynomialMap: coefficient length != n");
        for (int a : t.alpha)
            if (a < 0) throw std::invalid_argument("PolynomialMap: negative multiindex entry");
        if (multiindex_order(t.alpha) == 0)
            throw std::invalid_argument("PolynomialMap: constant term violates P(0)=0");
    }
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& a, const Term& b) { return lex_less(a.alpha, b.alpha); });
    for (std::size_t i = 1; i < terms_.size(); ++i)
        if (terms_[i - 1].alpha == terms_[i].alpha)
            throw std::invalid_argument("PolynomialMap: duplicate multiindex");

    degrees_.assign(n_, 0);
    sharp_degree_ = 0;
    for (const auto& t : terms_) {
        bool used = false;
        for (int i = 0; i < n_; ++i) {
            if (t.coeff[i] != 0) {
                degrees_[i] = std::max(degrees_[i], multiindex_order(t.alpha));
                used = true;
            }
        }
        if (used)
            for (int a : t.alpha) sharp_degree_ = std::max(sharp_degree_, a);
    }
    for (int i = 0; i < n_; ++i)
        if (degrees_[i] == 0)
            throw std::invalid_argument("PolynomialMap: component " + std::to_string(i) +
                                        " is identically zero");
    degree_ = *std::max_element(degrees_.begin(), degrees_.end());
}

long long PolynomialMap::region_exponent() const {
    long long sum = 0;
    for (int di : degrees_) sum += di;
    return (1 + static_cast<long long>(degree_)) * sum;
}

std::vector<long long> evaluate(const PolynomialMap& map, std::span<const long long> point) {
    if (static_cast<int>(point.size()) != map.dim_domain())
        throw std::invalid_argument("evaluate: point dimension != d");
    std::vector<__int128> acc(map.dim_range(), 0);
    for (const auto& term : map.terms()) {
        __int128 mono = 1;
        for (int k = 0; k < map.dim_domain(); ++k)
            for (int e = 0; e < term.alpha[k]; ++e) mono = checked_mul(mono, point[k], "evaluate");
        for (int i = 0; i < map.dim_range(); ++i) {
            if (term.coeff[i] == 0) continue;
            acc[i] += checked_mul(mono, term.coeff[i], "evaluate");
            checked_i64(acc[i], "evaluate");
        }
    }
    std::vector<long long> out(map.dim_range());
    for (int i = 0; i < map.dim_range(); ++i) out[i] = checked_i64(acc[i], "evaluate");
    return out;
}

std::vector<double> evaluate_real(const PolynomialMap& map, std::span<const double> point) {
    if (static_cast<int>(point.size()) != map.dim_domain())
        throw std::invalid_argument("evaluate_real: point dimension != d");
    std::vector<double> acc(map.dim_range(), 0.0);
    for (const auto& term : map.terms()) {
        double mono = 1.0;
        for (int k = 0; k < map.dim_domain(); ++k)
            for (int e = 0; e < term.alpha[k]; ++e) mono *= point[k];
        for (int i = 0; i < map.dim_range(); ++i)
            acc[i] += mono * static_cast<double>(term.coeff[i]);
    }
    return acc;
}

ConditionCReport check_condition_c(const PolynomialMap& map) {
    ConditionCReport report;
    report.witnesses.assign(map.dim_range(), std::nullopt);
    report.satisfied = true;
    for (int i = 0; i < map.dim_range(); ++i) {
        // terms are lex-sorted, so the first match is the lex-minimal witness
        for (const auto& term : map.terms()) {
            if (multiindex_order(term.alpha) != map.degrees()[i]) continue;
            bool is_unit = term.coeff[i] == 1;
            for (int l = 0; is_unit && l < map.dim_range(); ++l)
                if (l != i && term.coeff[l] != 0) is_unit = false;
            if (is_unit) {
                report.witnesses[i] = term.alpha;
                break;
            }
        }
        if (!report.witnesses[i]) report.satisfied = false;
    }
    return report;
}

CoercivityProbeResult probe_condition_l(const PolynomialMap& map, double beta, double l0,
                                        double radius, double grid_step) {
    if (beta <= 0) throw std::invalid_argument("probe_condition_l: beta must be positive");
    if (l0 <= 0) throw std::invalid_argument("probe_condition_l: l0 must be positive");
    if (radius < l0) throw std::invalid_argument("probe_condition_l: radius must be >= l0");
    if (grid_step <= 0) throw std::invalid_argument("probe_condition_l: grid_step must be positive");

    CoercivityProbeResult result;
    const int d = map.dim_domain();
    const long long per_axis = static_cast<long long>(std::floor(radius / grid_step));
    std::vector<long long> idx(d, -per_axis);
    std::vector<double> t(d);
    for (;;) {
        double norm2 = 0;
        for (int k = 0; k < d; ++k) {
            t[k] = static_cast<double>(idx[k]) * grid_step;
            norm2 += t[k] * t[k];
        }
        const double norm = std::sqrt(norm2);
        if (norm >= l0 && norm <= radius) {
            ++result.points_checked;
            const std::vector<double> value = evaluate_real(map, t);
            double vnorm2 = 0;
            for (double v : value) vnorm2 += v * v;
            if (std::sqrt(vnorm2) < std::pow(norm, beta)) {
                result.counterexample_found = true;
                result.counterexample = t;
                return result;
            }
        }
        int axis = d - 1;
        while (axis >= 0) {
            if (++idx[axis] <= per_axis) break;
            idx[axis] = -per_axis;
            --axis;
        }
        if (axis < 0) break;
    }
    return result;
}

double rho(std::span<const int> degrees, std::span<const long long> x) {
    if (degrees.size() != x.size()) throw std::invalid_argument("rho: dimension mismatch");
    double best = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = std::abs(static_cast<double>(x[i]));
        best = std::max(best, std::pow(xi, 1.0 / static_cast<double>(degrees[i])));
    }
    return best;
}

PCube::PCube(std::vector<int> degrees, std::vector<long long> lo, std::vector<long long> hi,
             double sidelength)
    : degrees_(std::move(degrees)), lo_(std::move(lo)), hi_(std::move(hi)), sidelength_(sidelength) {
    if (degrees_.size() != lo_.size() || lo_.size() != hi_.size() || lo_.empty())
        throw std::invalid_argument("PCube: inconsistent dimensions");
    if (sidelength_ <= 0) throw std::invalid_argument("PCube: sidelength must be positive");
    for (std::size_t i = 0; i < lo_.size(); ++i) {
        if (hi_[i] < lo_[i]) throw std::invalid_argument("PCube: empty side interval");
        const double card = static_cast<double>(hi_[i] - lo_[i] + 1);
        const double per_axis = std::pow(card, 1.0 / degrees_[i]);
        if (per_axis > 2.0 * sidelength_ || per_axis < 0.5 * sidelength_)
            throw std::invalid_argument("PCube: side cardinality off by more than factor 2 from ell^D_i");
    }
}

PCube PCube::centered(std::vector<int> degrees, std::vector<long long> center, double sidelength) {
    if (degrees.size() != center.size())
        throw std::invalid_argument("PCube::centered: dimension mismatch");
    if (sidelength <= 0) throw std::invalid_argument("PCube::centered: sidelength must be positive");
    std::vector<long long> lo(center.size()), hi(center.size());
    for (std::size_t i = 0; i < center.size(); ++i) {
        const double target = std::pow(sidelength, static_cast<double>(degrees[i]));
        if (target > 9.0e18) throw std::overflow_error("PCube::centered: side cardinality overflow");
        const long long card = std::max<long long>(1, std::llround(target));
        lo[i] = center[i] - (card - 1) / 2;
        hi[i] = lo[i] + card - 1;
    }
    return PCube(std::move(degrees), std::move(lo), std::move(hi), sidelength);
}

std::vector<long long> PCube::center() const {
    std::vector<long long> c(lo_.size());
    for (std::size_t i = 0; i < lo_.size(); ++i) {
        const long long s = lo_[i] + hi_[i];
        c[i] = s >= 0 ? s / 2 : -((-s + 1) / 2);  // floor midpoint
    }
    return c;
}

std::vector<long long> PCube::half_extents() const {
    const auto c = center();
    std::vector<long long> h(lo_.size());
    for (std::size_t i = 0; i < lo_.size(); ++i)
        h[i] = std::max(c[i] - lo_[i], hi_[i] - c[i]);
    return h;
}

long long PCube::volume() const {
    __int128 v = 1;
    for (std::size_t i = 0; i < lo_.size(); ++i) v *= (hi_[i] - lo_[i] + 1);
    return checked_i64(v, "PCube::volume");
}

bool PCube::contains(std::span<const long long> x) const {
    if (x.size() != lo_.size()) throw std::invalid_argument("PCube::contains: dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
    return true;
}

PCube dilate(const PCube& cube, int nu) {
    if (nu < 1) throw std::invalid_argument("dilate: nu must be >= 1");
    PCube current = cube;
    for (int step = 0; step < nu; ++step) {
        const double ell2 = 2.0 * current.sidelength();
        std::vector<long long> lo = current.lo();
        std::vector<long long> hi = current.hi();
        for (int i = 0; i < current.dim(); ++i) {
            const double target = std::pow(ell2, static_cast<double>(current.degrees()[i]));
            if (target > 9.0e18) throw std::overflow_error("dilate: side cardinality overflow");
            const long long want = static_cast<long long>(std::ceil(target - 1e-9));
            const long long have = hi[i] - lo[i] + 1;
            if (want > have) {
                const long long extra = want - have;
                lo[i] -= extra / 2;
                hi[i] += extra - extra / 2;
            }
        }
        current = PCube(current.degrees(), std::move(lo), std::move(hi), ell2);
    }
    return current;
}

std::string PolynomialMap::to_json() const {
    nlohmann::json j;
    j["d"] = d_;
    j["n"] = n_;
    j["coeffs"] = nlohmann::json::array();
    for (const auto& t : terms_) {
        nlohmann::json entry;
        entry["alpha"] = t.alpha;
        entry["c"] = t.coeff;
        j["coeffs"].push_back(entry);
    }
    return j.dump();
}

PolynomialMap PolynomialMap::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (!j.contains("d") || !j.contains("n") || !j.contains("coeffs"))
        throw std::invalid_argument("PolynomialMap JSON: requires d, n, coeffs");
    std::vector<Term> terms;
    for (const auto& entry : j.at("coeffs")) {
        Term t;
        for (const auto& a : entry.at("alpha")) {
            if (!a.is_number_integer()) throw std::invalid_argument("PolynomialMap JSON: alpha must be integral");
            t.alpha.push_back(a.get<int>());
        }
        for (const auto& c : entry.at("c")) {
            if (!c.is_number_integer()) throw std::invalid_argument("PolynomialMap JSON: c must be integral");
            t.coeff.push_back(c.get<long long>());
        }
        terms.push_back(std::move(t));
    }
    return PolynomialMap(j.at("d").get<int>(), j.at("n").get<int>(), std::move(terms));
}

}  // namespace radonlab
