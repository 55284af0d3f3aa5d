#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "radonlab/rng.hpp"

namespace radonlab {

inline double median_of(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty sample");
    const std::size_t m = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + m, v.end());
    double hi = v[m];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + m - 1, v.begin() + m);
    return 0.5 * (v[m - 1] + hi);
}

inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("least_squares_slope: need >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0) throw std::invalid_argument("least_squares_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

// Median of pairwise slopes; robust against the occasional wild row.
inline double theil_sen_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("theil_sen_slope: need >= 2 paired points");
    std::vector<double> slopes;
    slopes.reserve(x.size() * (x.size() - 1) / 2);
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j)
            if (x[j] != x[i]) slopes.push_back((y[j] - y[i]) / (x[j] - x[i]));
    if (slopes.empty()) throw std::invalid_argument("theil_sen_slope: all abscissae equal");
    return median_of(std::move(slopes));
}

struct SlopeBand {
    double slope = 0.0;
    double lo95 = 0.0;
    double hi95 = 0.0;
};

// Percentile bootstrap of the Theil-Sen slope.
inline SlopeBand bootstrap_slope_band(const std::vector<double>& x, const std::vector<double>& y,
                                      int resamples, std::uint64_t seed) {
    SlopeBand band;
    band.slope = theil_sen_slope(x, y);
    Rng rng(seed);
    std::vector<double> bx(x.size()), by(y.size()), slopes;
    slopes.reserve(static_cast<std::size_t>(resamples));
    for (int b = 0; b < resamples; ++b) {
        bool usable = false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const std::size_t k = static_cast<std::size_t>(rng.next_below(x.size()));
            bx[i] = x[k];
            by[i] = y[k];
            if (bx[i] != bx[0]) usable = true;
        }
        if (!usable) continue;  // degenerate resample, skip
        slopes.push_back(theil_sen_slope(bx, by));
    }
    if (slopes.empty()) {
        band.lo95 = band.hi95 = band.slope;
        return band;
    }
    std::sort(slopes.begin(), slopes.end());
    const auto pick = [&](double p) {
        const double pos = p * static_cast<double>(slopes.size() - 1);
        const std::size_t i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        return i + 1 < slopes.size() ? slopes[i] * (1 - frac) + slopes[i + 1] * frac : slopes[i];
    };
    band.lo95 = pick(0.025);
    band.hi95 = pick(0.975);
    return band;
}

}  // namespace radonlab
