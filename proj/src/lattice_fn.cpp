#include "radonlab/lattice_fn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

namespace radonlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// e(x) = exp(2 pi i x) with argument reduced to [-1/2, 1/2] first
cplx unit_phase(double x) {
    const double r = x - std::nearbyint(x);
    return {std::cos(kTwoPi * r), std::sin(kTwoPi * r)};
}

}  // namespace

long long Box::volume() const {
    __int128 v = 1;
    for (int i = 0; i < dim(); ++i) {
        if (hi[i] < lo[i]) return 0;
        v *= (hi[i] - lo[i] + 1);
        if (v > std::numeric_limits<long long>::max())
            throw std::overflow_error("Box::volume overflow");
    }
    return static_cast<long long>(v);
}

bool Box::contains(std::span<const long long> x) const {
    for (int i = 0; i < dim(); ++i)
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
}

std::size_t Box::index_of(std::span<const long long> x) const {
    std::size_t idx = 0;
    for (int i = 0; i < dim(); ++i) idx = idx * static_cast<std::size_t>(extent(i)) +
                                          static_cast<std::size_t>(x[i] - lo[i]);
    return idx;
}

std::vector<long long> Box::point_at(std::size_t index) const {
    std::vector<long long> x(dim());
    for (int i = dim() - 1; i >= 0; --i) {
        const auto e = static_cast<std::size_t>(extent(i));
        x[i] = lo[i] + static_cast<long long>(index % e);
        index /= e;
    }
    return x;
}

Box Box::hull(const Box& a, const Box& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("Box::hull: dimension mismatch");
    Box out = a;
    for (int i = 0; i < a.dim(); ++i) {
        out.lo[i] = std::min(a.lo[i], b.lo[i]);
        out.hi[i] = std::max(a.hi[i], b.hi[i]);
    }
    return out;
}

LatticeFunction::LatticeFunction(Box box) : box_(std::move(box)) {
    const long long v = box_.volume();
    if (v <= 0) throw std::invalid_argument("LatticeFunction: empty box");
    values_.assign(static_cast<std::size_t>(v), cplx{0.0, 0.0});
}

cplx LatticeFunction::at(std::span<const long long> x) const {
    if (!box_.contains(x)) return {0.0, 0.0};
    return values_[box_.index_of(x)];
}

cplx& LatticeFunction::ref(std::span<const long long> x) {
    if (!box_.contains(x)) throw std::out_of_range("LatticeFunction::ref outside box");
    return values_[box_.index_of(x)];
}

LatticeFunction LatticeFunction::delta(std::vector<long long> at, int dim_hint) {
    const int n = dim_hint > 0 ? dim_hint : static_cast<int>(at.size());
    if (static_cast<int>(at.size()) != n) throw std::invalid_argument("delta: dimension mismatch");
    Box box{at, at};
    LatticeFunction f(box);
    f[0] = 1.0;
    return f;
}

LatticeFunction LatticeFunction::indicator(Box box) {
    LatticeFunction f(std::move(box));
    std::fill(f.values().begin(), f.values().end(), cplx{1.0, 0.0});
    return f;
}

cplx pair_inner(const LatticeFunction& f, const LatticeFunction& g) {
    if (f.dim() != g.dim()) throw std::invalid_argument("pair_inner: dimension mismatch");
    // iterate over the smaller support
    const LatticeFunction& small = f.size() <= g.size() ? f : g;
    const bool flipped = &small == &g;
    KahanCSum acc;
    for (std::size_t i = 0; i < small.size(); ++i) {
        const auto x = small.box().point_at(i);
        const cplx a = flipped ? f.at(x) : small[i];
        const cplx b = flipped ? small[i] : g.at(x);
        acc.add(a * std::conj(b));
    }
    return acc.value();
}

double local_average(const LatticeFunction& f, const PCube& cube, double r) {
    if (cube.dim() != f.dim()) throw std::invalid_argument("local_average: dimension mismatch");
    if (!(r >= 1.0)) throw std::invalid_argument("local_average: r must be >= 1 (or infinity)");
    const long long vol = cube.volume();
    if (vol <= 0) throw std::invalid_argument("local_average: empty cube");
    if (std::isinf(r)) {
        double sup = 0;
        cube.for_each_point([&](std::span<const long long> x) {
            sup = std::max(sup, std::abs(f.at(x)));
        });
        return sup;
    }
    KahanSum acc;
    cube.for_each_point([&](std::span<const long long> x) {
        const double v = std::abs(f.at(x));
        acc.add(std::pow(v, r));
    });
    return std::pow(acc.sum / static_cast<double>(vol), 1.0 / r);
}

double lp_norm(const LatticeFunction& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1 (or infinity)");
    if (std::isinf(p)) {
        double sup = 0;
        for (std::size_t i = 0; i < f.size(); ++i) sup = std::max(sup, std::abs(f[i]));
        return sup;
    }
    KahanSum acc;
    for (std::size_t i = 0; i < f.size(); ++i) acc.add(std::pow(std::abs(f[i]), p));
    return std::pow(acc.sum, 1.0 / p);
}

cplx SampledMultiplier::at_node(std::span<const long long> node) const {
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) {
        long long t = node[i] % grid_n;
        if (t < 0) t += grid_n;
        idx = idx * static_cast<std::size_t>(grid_n) + static_cast<std::size_t>(t);
    }
    return samples[idx];
}

double SampledMultiplier::sup_abs() const {
    double sup = 0;
    for (const cplx& v : samples) sup = std::max(sup, std::abs(v));
    return sup;
}

cplx SampledMultiplier::eval_exact(std::span<const double> xi) const {
    if (!exact_frequencies)
        throw std::logic_error("SampledMultiplier::eval_exact requires frequency metadata");
    KahanCSum acc;
    for (const auto& [freq, coeff] : *exact_frequencies) {
        double phase = 0;
        for (int i = 0; i < n; ++i) {
            // reduce per-coordinate before accumulating; frequencies can be ~2^45
            const double xii = xi[i] - std::nearbyint(xi[i]);
            phase += static_cast<double>(freq[i]) * xii;
        }
        acc.add(coeff * unit_phase(phase));
    }
    return acc.value();
}

long long next_pow2(long long n) {
    long long p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft_pow2(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft_pow2: size must be a power of 2");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? kTwoPi : -kTwoPi) / static_cast<double>(len);
        // long double twiddle seed keeps large transforms near machine accuracy
        const long double cl = std::cos(static_cast<long double>(ang));
        const long double sl = std::sin(static_cast<long double>(ang));
        const cplx wl(static_cast<double>(cl), static_cast<double>(sl));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx u = a[i + k];
                const cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
                // periodic renormalization against drift
                if ((k & 1023) == 1023) w /= std::abs(w);
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& v : a) v *= inv;
    }
}

// n-dimensional FFT on a grid_n^n row-major array (grid_n a power of 2)
void fft_grid(std::vector<cplx>& a, int n, long long grid_n, bool inverse) {
    if (n == 1) {
        fft_pow2(a, inverse);
        return;
    }
    const std::size_t g = static_cast<std::size_t>(grid_n);
    std::vector<cplx> line(g);
    // transform along each axis in turn
    std::size_t stride = 1;
    std::size_t total = a.size();
    for (int axis = n - 1; axis >= 0; --axis) {
        const std::size_t groups = total / g;
        for (std::size_t grp = 0; grp < groups; ++grp) {
            // compute the base offset of this line
            std::size_t rem = grp;
            std::size_t base = 0;
            std::size_t mul = 1;
            for (int ax = n - 1; ax >= 0; --ax) {
                if (ax == axis) {
                    mul *= g;
                    continue;
                }
                const std::size_t coord = rem % g;
                rem /= g;
                base += coord * mul;
                mul *= g;
            }
            for (std::size_t k = 0; k < g; ++k) line[k] = a[base + k * stride];
            fft_pow2(line, inverse);
            for (std::size_t k = 0; k < g; ++k) a[base + k * stride] = line[k];
        }
        stride *= g;
    }
}

SampledMultiplier sampled_from_frequencies(
    int n, long long grid_n, const std::vector<std::pair<std::vector<long long>, cplx>>& freqs) {
    if (grid_n <= 0 || (grid_n & (grid_n - 1)) != 0)
        throw std::invalid_argument("sampled_from_frequencies: grid must be a positive power of 2");
    double total = 1;
    for (int i = 0; i < n; ++i) total *= static_cast<double>(grid_n);
    if (total > 1.1e8) throw std::runtime_error("sampled_from_frequencies: grid exceeds node budget");
    SampledMultiplier out;
    out.n = n;
    out.grid_n = grid_n;
    out.samples.assign(static_cast<std::size_t>(total), cplx{0, 0});
    for (const auto& [freq, coeff] : freqs) {
        std::size_t idx = 0;
        for (int ax = 0; ax < n; ++ax) {
            long long u = freq[ax] % grid_n;
            if (u < 0) u += grid_n;
            idx = idx * static_cast<std::size_t>(grid_n) + static_cast<std::size_t>(u);
        }
        out.samples[idx] += coeff;
    }
    // sample(t) = sum_nu c_nu e(+nu t / N) is the inverse-sign transform
    fft_grid(out.samples, n, grid_n, true);
    const double scale = total;  // undo the 1/N^n of the inverse pass
    for (auto& v : out.samples) v *= scale;
    out.exact_frequencies = freqs;
    return out;
}

SampledMultiplier dft(const LatticeFunction& f, long long grid_n) {
    if (grid_n <= 0 || (grid_n & (grid_n - 1)) != 0)
        throw std::invalid_argument("dft: grid resolution must be a positive power of 2");
    const int n = f.dim();
    double total_nodes = 1;
    for (int i = 0; i < n; ++i) total_nodes *= static_cast<double>(grid_n);
    if (total_nodes > 1.6e8) throw std::runtime_error("dft: grid exceeds node budget");

    SampledMultiplier out;
    out.n = n;
    out.grid_n = grid_n;
    out.samples.assign(static_cast<std::size_t>(total_nodes), cplx{0, 0});
    // fold x mod N, then hat f(t/N) is the forward transform of the folded array
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] == cplx{0, 0}) continue;
        const auto x = f.box().point_at(i);
        std::size_t idx = 0;
        for (int ax = 0; ax < n; ++ax) {
            long long u = x[ax] % grid_n;
            if (u < 0) u += grid_n;
            idx = idx * static_cast<std::size_t>(grid_n) + static_cast<std::size_t>(u);
        }
        out.samples[idx] += f[i];
    }
    fft_grid(out.samples, n, grid_n, false);
    return out;
}

Box default_idft_box(const SampledMultiplier& m) {
    Box box;
    box.lo.assign(m.n, -(m.grid_n / 2));
    box.hi.assign(m.n, m.grid_n - 1 - m.grid_n / 2);
    return box;
}

LatticeFunction idft(const SampledMultiplier& m, const Box& out_box, bool* aliased) {
    if (out_box.dim() != m.n) throw std::invalid_argument("idft: box dimension mismatch");
    for (int i = 0; i < m.n; ++i)
        if (out_box.extent(i) > m.grid_n)
            throw std::invalid_argument("idft: output box exceeds grid resolution");
    if (aliased) {
        *aliased = false;
        if (m.exact_frequencies) {
            for (const auto& [freq, coeff] : *m.exact_frequencies) {
                (void)coeff;
                for (int i = 0; i < m.n; ++i)
                    if (2 * freq[i] <= -m.grid_n || 2 * freq[i] > m.grid_n) *aliased = true;
            }
        }
    }
    std::vector<cplx> work = m.samples;
    fft_grid(work, m.n, m.grid_n, true);
    LatticeFunction out(out_box);
    std::vector<long long> u(m.n);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto x = out_box.point_at(i);
        std::size_t idx = 0;
        for (int ax = 0; ax < m.n; ++ax) {
            long long r = x[ax] % m.grid_n;
            if (r < 0) r += m.grid_n;
            idx = idx * static_cast<std::size_t>(m.grid_n) + static_cast<std::size_t>(r);
        }
        out[i] = work[idx];
    }
    return out;
}

std::string LatticeFunction::to_json() const {
    nlohmann::json j;
    j["n"] = dim();
    j["lo"] = box_.lo;
    j["hi"] = box_.hi;
    nlohmann::json vals = nlohmann::json::array();
    for (const cplx& v : values_) {
        vals.push_back(v.real());
        vals.push_back(v.imag());
    }
    j["values"] = std::move(vals);
    return j.dump();
}

LatticeFunction LatticeFunction::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    Box box;
    box.lo = j.at("lo").get<std::vector<long long>>();
    box.hi = j.at("hi").get<std::vector<long long>>();
    LatticeFunction f(box);
    const auto& vals = j.at("values");
    if (vals.size() != 2 * f.size()) throw std::invalid_argument("LatticeFunction JSON: value count");
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = cplx(vals[2 * i].get<double>(), vals[2 * i + 1].get<double>());
    return f;
}

namespace {

void put_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::ifstream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw std::runtime_error("LatticeFunction binary: truncated header");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

void put_f64(std::ofstream& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put_u64(out, bits);
}

double get_f64(std::ifstream& in) {
    const std::uint64_t bits = get_u64(in);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

}  // namespace

// Layout: magic "RLF1", u64 n, then per axis u64 lo/hi (two's complement),
// then volume() little-endian IEEE-754 double pairs (re, im).
void LatticeFunction::write_binary(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("LatticeFunction: cannot open " + path);
    out.write("RLF1", 4);
    put_u64(out, static_cast<std::uint64_t>(dim()));
    for (int i = 0; i < dim(); ++i) {
        put_u64(out, static_cast<std::uint64_t>(box_.lo[i]));
        put_u64(out, static_cast<std::uint64_t>(box_.hi[i]));
    }
    for (const cplx& v : values_) {
        put_f64(out, v.real());
        put_f64(out, v.imag());
    }
    if (!out) throw std::runtime_error("LatticeFunction: write failed for " + path);
}

LatticeFunction LatticeFunction::read_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("LatticeFunction: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "RLF1", 4) != 0)
        throw std::runtime_error("LatticeFunction: bad magic in " + path);
    const int n = static_cast<int>(get_u64(in));
    if (n <= 0 || n > 16) throw std::runtime_error("LatticeFunction: implausible dimension");
    Box box;
    box.lo.resize(n);
    box.hi.resize(n);
    for (int i = 0; i < n; ++i) {
        box.lo[i] = static_cast<long long>(get_u64(in));
        box.hi[i] = static_cast<long long>(get_u64(in));
    }
    LatticeFunction f(box);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double re = get_f64(in);
        const double im = get_f64(in);
        f[i] = cplx(re, im);
    }
    if (!in) throw std::runtime_error("LatticeFunction: truncated payload in " + path);
    return f;
}

}  // namespace radonlab
