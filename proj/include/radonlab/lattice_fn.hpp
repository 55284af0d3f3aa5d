#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "radonlab/poly_map.hpp"

namespace radonlab {

using cplx = std::complex<double>;

// Compensated accumulator; sums here can run over 10^6+ terms and the decay
// fits chase factors of 2^{-eps j} that naive roundoff could swamp.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

struct KahanCSum {
    KahanSum re, im;
    void add(cplx v) {
        re.add(v.real());
        im.add(v.imag());
    }
    cplx value() const { return {re.sum, im.sum}; }
};

// Product of integer intervals in Z^n.
struct Box {
    std::vector<long long> lo;
    std::vector<long long> hi;

    int dim() const { return static_cast<int>(lo.size()); }
    long long extent(int axis) const { return hi[axis] - lo[axis] + 1; }
    long long volume() const;
    bool contains(std::span<const long long> x) const;
    std::size_t index_of(std::span<const long long> x) const;  // row-major
    std::vector<long long> point_at(std::size_t index) const;
    static Box hull(const Box& a, const Box& b);
};

// Finitely supported f: Z^n -> C stored densely over its bounding box.
class LatticeFunction {
public:
    LatticeFunction() = default;
    explicit LatticeFunction(Box box);

    const Box& box() const { return box_; }
    int dim() const { return box_.dim(); }
    std::size_t size() const { return values_.size(); }

    cplx at(std::span<const long long> x) const;  // zero outside the box
    cplx& ref(std::span<const long long> x);      // must be inside
    cplx& operator[](std::size_t i) { return values_[i]; }
    const cplx& operator[](std::size_t i) const { return values_[i]; }
    const std::vector<cplx>& values() const { return values_; }
    std::vector<cplx>& values() { return values_; }

    static LatticeFunction delta(std::vector<long long> at, int dim_hint = 0);
    static LatticeFunction indicator(Box box);

    std::string to_json() const;
    static LatticeFunction from_json(const std::string& text);
    void write_binary(const std::string& path) const;
    static LatticeFunction read_binary(const std::string& path);

private:
    Box box_;
    std::vector<cplx> values_;
};

// <f,g> = sum_x f(x) conj(g(x)), compensated.
cplx pair_inner(const LatticeFunction& f, const LatticeFunction& g);

// <f>_{Q,r} with counting measure; r in [1,inf], inf = sup over Q.
double local_average(const LatticeFunction& f, const PCube& cube, double r);

double lp_norm(const LatticeFunction& f, double p);

// Periodic function on [0,1)^n sampled on the uniform grid (t/N)_{t in [N]^n}.
// When the multiplier is an exact trigonometric polynomial the integer
// frequencies and coefficients ride along and make inversion statements exact.
struct SampledMultiplier {
    int n = 1;
    long long grid_n = 0;  // per-axis resolution
    std::vector<cplx> samples;
    std::optional<std::vector<std::pair<std::vector<long long>, cplx>>> exact_frequencies;

    std::size_t node_count() const { return samples.size(); }
    cplx at_node(std::span<const long long> node) const;  // wraps mod grid_n
    double sup_abs() const;
    // evaluate the trig-polynomial metadata at an arbitrary point (requires exact_frequencies)
    cplx eval_exact(std::span<const double> xi) const;
};

// Samples hat f on the uniform grid (exact trig-polynomial sampling via FFT
// after folding indices mod N; no aliasing is incurred by the sampling itself).
SampledMultiplier dft(const LatticeFunction& f, long long grid_n);

// Grid Riemann sum for the inverse integral; exact whenever the multiplier is a
// trig polynomial with all frequencies inside (-N/2, N/2]. If frequency metadata
// shows wrap-around the optional flag is set.
LatticeFunction idft(const SampledMultiplier& m, const Box& out_box, bool* aliased = nullptr);
Box default_idft_box(const SampledMultiplier& m);

// Exact grid sampling of a trigonometric polynomial sum_nu c_nu e(nu . xi):
// indices fold mod N, one FFT produces all N^n node values, and the frequency
// metadata is attached. Sampling itself never aliases; only inversion can.
SampledMultiplier sampled_from_frequencies(
    int n, long long grid_n, const std::vector<std::pair<std::vector<long long>, cplx>>& freqs);

// power-of-two FFT used by the grid bridge (exposed for reuse)
void fft_pow2(std::vector<cplx>& a, bool inverse);
void fft_grid(std::vector<cplx>& a, int n, long long grid_n, bool inverse);
long long next_pow2(long long n);

}  // namespace radonlab
