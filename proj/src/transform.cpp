#include "radonlab/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "radonlab/rng.hpp"

namespace radonlab {

TruncatedTransform::TruncatedTransform(PolynomialMap map, CZKernel kernel, BumpProfile bump,
                                       long long j_min, long long j_max)
    : map_(std::move(map)),
      kernel_(std::move(kernel)),
      bump_(std::move(bump)),
      j_min_(j_min),
      j_max_(j_max) {
    if (j_min_ < 0 || j_max_ < j_min_) throw std::invalid_argument("TruncatedTransform: bad j range");
    if (kernel_.dim != map_.dim_domain())
        throw std::invalid_argument("TruncatedTransform: kernel dimension != d");
    image_min_.assign(map_.dim_range(), std::numeric_limits<long long>::max());
    image_max_.assign(map_.dim_range(), std::numeric_limits<long long>::min());
    for (long long j = j_min_; j <= j_max_; ++j) {
        AnnulusTable table = build_annulus_table(kernel_, bump_, j);
        std::vector<std::vector<long long>> image_row;
        image_row.reserve(table.points.size());
        for (const auto& y : table.points) {
            auto p = evaluate(map_, y);
            for (int i = 0; i < map_.dim_range(); ++i) {
                image_min_[i] = std::min(image_min_[i], p[i]);
                image_max_[i] = std::max(image_max_[i], p[i]);
            }
            image_row.push_back(std::move(p));
        }
        tables_.push_back(std::move(table));
        images_.push_back(std::move(image_row));
    }
    if (image_min_[0] == std::numeric_limits<long long>::max())
        image_min_.assign(map_.dim_range(), 0), image_max_.assign(map_.dim_range(), 0);
}

namespace {

LatticeFunction apply_direct(const TruncatedTransform& t, const LatticeFunction& f) {
    const int n = t.map().dim_range();
    Box out_box;
    out_box.lo.resize(n);
    out_box.hi.resize(n);
    for (int i = 0; i < n; ++i) {
        out_box.lo[i] = f.box().lo[i] - t.image_max()[i];
        out_box.hi[i] = f.box().hi[i] - t.image_min()[i];
    }
    LatticeFunction out(out_box);
    std::vector<long long> x(n);
    for (std::size_t s = 0; s < t.tables().size(); ++s) {
        const auto& weights = t.tables()[s].weights;
        const auto& images = t.images()[s];
        for (std::size_t k = 0; k < weights.size(); ++k) {
            const double w = weights[k];
            const auto& p = images[k];
            for (std::size_t i = 0; i < f.size(); ++i) {
                if (f[i] == cplx{0, 0}) continue;
                const auto xf = f.box().point_at(i);
                for (int ax = 0; ax < n; ++ax) x[ax] = xf[ax] - p[ax];
                out.ref(x) += f[i] * w;
            }
        }
    }
    return out;
}

LatticeFunction apply_frequency(const TruncatedTransform& t, const LatticeFunction& f) {
    const int n = t.map().dim_range();
    Box out_box;
    out_box.lo.resize(n);
    out_box.hi.resize(n);
    long long needed = 1;
    for (int i = 0; i < n; ++i) {
        out_box.lo[i] = f.box().lo[i] - t.image_max()[i];
        out_box.hi[i] = f.box().hi[i] - t.image_min()[i];
        // product frequencies span supp f and the P-image range jointly
        const long long span = (f.box().hi[i] - f.box().lo[i]) +
                               (t.image_max()[i] - t.image_min()[i]) + 1;
        needed = std::max(needed, span);
    }
    const long long grid = next_pow2(needed);
    SampledMultiplier fhat = dft(f, grid);
    // multiplier m(xi) = sum_j sum_y K_j(y) e(P(y) . xi)
    std::vector<std::pair<std::vector<long long>, cplx>> freqs;
    for (std::size_t s = 0; s < t.tables().size(); ++s) {
        const auto& weights = t.tables()[s].weights;
        const auto& images = t.images()[s];
        for (std::size_t k = 0; k < weights.size(); ++k)
            freqs.emplace_back(images[k], cplx{weights[k], 0.0});
    }
    SampledMultiplier mker = sampled_from_frequencies(n, grid, freqs);
    for (std::size_t i = 0; i < mker.samples.size(); ++i) mker.samples[i] *= fhat.samples[i];
    mker.exact_frequencies.reset();  // product frequencies differ; metadata no longer applies
    return idft(mker, out_box);
}

}  // namespace

LatticeFunction apply(const TruncatedTransform& transform, const LatticeFunction& f,
                      ApplyPath path) {
    if (f.dim() != transform.map().dim_range())
        throw std::invalid_argument("apply: f dimension != n");
    return path == ApplyPath::direct ? apply_direct(transform, f) : apply_frequency(transform, f);
}

LatticeFunction maximal(const PolynomialMap& map, const LatticeFunction& f,
                        const std::vector<double>& sidelengths) {
    const int n = map.dim_range();
    if (f.dim() != n) throw std::invalid_argument("maximal: f dimension != n");
    if (sidelengths.empty()) throw std::invalid_argument("maximal: empty sidelength set");

    // widest window determines the output halo
    std::vector<long long> halo(n, 0);
    std::vector<PCube> windows;
    for (double ell : sidelengths) {
        PCube w = PCube::centered(map.degrees(), std::vector<long long>(n, 0), ell);
        for (int i = 0; i < n; ++i)
            halo[i] = std::max(halo[i], std::max(-w.lo()[i], w.hi()[i]));
        windows.push_back(std::move(w));
    }
    Box out_box;
    out_box.lo.resize(n);
    out_box.hi.resize(n);
    for (int i = 0; i < n; ++i) {
        out_box.lo[i] = f.box().lo[i] - 2 * halo[i];
        out_box.hi[i] = f.box().hi[i] + 2 * halo[i];
    }
    LatticeFunction out(out_box);

    // prefix sums of |f| over a padded copy for O(1) window sums
    const Box& fb = f.box();
    std::vector<long long> ext(n);
    for (int i = 0; i < n; ++i) ext[i] = fb.extent(i);
    if (n == 1) {
        std::vector<double> pref(static_cast<std::size_t>(ext[0]) + 1, 0.0);
        for (long long i = 0; i < ext[0]; ++i)
            pref[i + 1] = pref[i] + std::abs(f[static_cast<std::size_t>(i)]);
        const auto range_sum = [&](long long a, long long b) {  // inclusive lattice coords
            const long long ia = std::max(a - fb.lo[0], 0LL);
            const long long ib = std::min(b - fb.lo[0], ext[0] - 1);
            if (ia > ib) return 0.0;
            return pref[ib + 1] - pref[ia];
        };
        for (const PCube& w : windows) {
            const long long wlo = w.lo()[0], whi = w.hi()[0];
            const double vol = static_cast<double>(w.volume());
            // a window [z+wlo, z+whi] covers x iff z in [x-whi, x-wlo]
            for (long long z = out_box.lo[0] + wlo; z <= out_box.hi[0] + whi; ++z) {
                const double avg = range_sum(z + wlo, z + whi) / vol;
                if (avg == 0.0) continue;
                const long long xa = std::max(z + wlo, out_box.lo[0]);
                const long long xb = std::min(z + whi, out_box.hi[0]);
                for (long long x = xa; x <= xb; ++x) {
                    auto& slot = out[static_cast<std::size_t>(x - out_box.lo[0])];
                    if (avg > slot.real()) slot = avg;
                }
            }
        }
    } else {
        // generic (small) dimensions: direct window sums
        std::vector<long long> x(n), z(n), ylo(n), yhi(n);
        for (const PCube& w : windows) {
            const double vol = static_cast<double>(w.volume());
            Box centers;
            centers.lo.resize(n);
            centers.hi.resize(n);
            for (int i = 0; i < n; ++i) {
                centers.lo[i] = fb.lo[i] - w.hi()[i];
                centers.hi[i] = fb.hi[i] - w.lo()[i];
            }
            const long long total = centers.volume();
            for (long long ci = 0; ci < total; ++ci) {
                const auto zc = centers.point_at(static_cast<std::size_t>(ci));
                KahanSum sum;
                bool any = false;
                PCube shifted(map.degrees(),
                              [&] {
                                  std::vector<long long> lo(n);
                                  for (int i = 0; i < n; ++i) lo[i] = zc[i] + w.lo()[i];
                                  return lo;
                              }(),
                              [&] {
                                  std::vector<long long> hi(n);
                                  for (int i = 0; i < n; ++i) hi[i] = zc[i] + w.hi()[i];
                                  return hi;
                              }(),
                              w.sidelength());
                shifted.for_each_point([&](std::span<const long long> y) {
                    const double v = std::abs(f.at(y));
                    if (v != 0) any = true;
                    sum.add(v);
                });
                if (!any) continue;
                const double avg = sum.sum / vol;
                shifted.for_each_point([&](std::span<const long long> y) {
                    if (!out.box().contains(y)) return;
                    auto& slot = out[out.box().index_of(y)];
                    if (avg > slot.real()) slot = avg;
                });
            }
        }
    }
    return out;
}

LatticeFunction single_scale_average_kernel(const PolynomialMap& map, const BumpProfile& bump,
                                            long long j) {
    // positive weights psi(2^-j y) normalized to total mass one, pushed to x = -P(y)
    CZKernel unit;
    unit.dim = map.dim_domain();
    unit.descriptor = "unit";
    unit.eval = [](std::span<const double>) { return 1.0; };
    unit.grad = [](std::span<const double> y) { return std::vector<double>(y.size(), 0.0); };
    AnnulusTable table = build_annulus_table(unit, bump, j);
    double mass = 0;
    for (double w : table.weights) mass += w;
    if (mass <= 0) throw std::invalid_argument("single_scale_average_kernel: empty annulus");

    const int n = map.dim_range();
    std::vector<std::vector<long long>> images;
    std::vector<long long> lo(n, std::numeric_limits<long long>::max());
    std::vector<long long> hi(n, std::numeric_limits<long long>::min());
    for (const auto& y : table.points) {
        auto p = evaluate(map, y);
        for (int i = 0; i < n; ++i) {
            lo[i] = std::min(lo[i], -p[i]);
            hi[i] = std::max(hi[i], -p[i]);
        }
        images.push_back(std::move(p));
    }
    LatticeFunction k(Box{lo, hi});
    std::vector<long long> x(n);
    for (std::size_t i = 0; i < images.size(); ++i) {
        for (int ax = 0; ax < n; ++ax) x[ax] = -images[i][ax];
        k.ref(x) += table.weights[i] / mass;
    }
    return k;
}

LatticeFunction convolve(const LatticeFunction& kernel, const LatticeFunction& f) {
    const int n = f.dim();
    if (kernel.dim() != n) throw std::invalid_argument("convolve: dimension mismatch");
    Box out_box;
    out_box.lo.resize(n);
    out_box.hi.resize(n);
    for (int i = 0; i < n; ++i) {
        out_box.lo[i] = f.box().lo[i] + kernel.box().lo[i];
        out_box.hi[i] = f.box().hi[i] + kernel.box().hi[i];
    }
    LatticeFunction out(out_box);
    std::vector<long long> x(n);
    for (std::size_t ki = 0; ki < kernel.size(); ++ki) {
        if (kernel[ki] == cplx{0, 0}) continue;
        const auto kx = kernel.box().point_at(ki);
        for (std::size_t fi = 0; fi < f.size(); ++fi) {
            if (f[fi] == cplx{0, 0}) continue;
            const auto fx = f.box().point_at(fi);
            for (int ax = 0; ax < n; ++ax) x[ax] = kx[ax] + fx[ax];
            out.ref(x) += kernel[ki] * f[fi];
        }
    }
    return out;
}

namespace {

double conjugate_exponent(double p) {
    if (std::isinf(p)) return 1.0;
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    return p / (p - 1.0);
}

// duality map: the f with ||f||_p = 1 maximizing Re <f, v>
LatticeFunction dual_element(const LatticeFunction& v, double p, const Box& support) {
    LatticeFunction f(support);
    if (std::isinf(p)) {
        // p = inf: unimodular phase match everywhere v is nonzero
        for (std::size_t i = 0; i < f.size(); ++i) {
            const cplx vv = v.at(support.point_at(i));
            f[i] = std::abs(vv) > 0 ? vv / std::abs(vv) : cplx{1.0, 0.0};
        }
        return f;
    }
    if (p == 1.0) {
        // p = 1: point mass at the largest |v|
        std::size_t best = 0;
        double best_abs = -1;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double a = std::abs(v.at(support.point_at(i)));
            if (a > best_abs) {
                best_abs = a;
                best = i;
            }
        }
        const cplx vv = v.at(support.point_at(best));
        f[best] = best_abs > 0 ? vv / best_abs : cplx{1.0, 0.0};
        return f;
    }
    const double q = conjugate_exponent(p);
    double norm_q = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
        norm_q += std::pow(std::abs(v.at(support.point_at(i))), q);
    norm_q = std::pow(norm_q, 1.0 / q);
    if (norm_q == 0) {
        f[0] = 1.0;
        return f;
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
        const cplx vv = v.at(support.point_at(i));
        const double a = std::abs(vv);
        if (a == 0) continue;
        f[i] = std::pow(a / norm_q, q - 1.0) * (vv / a);
    }
    // normalize exactly in l^p
    const double np = lp_norm(f, p);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] /= np;
    return f;
}

}  // namespace

OperatorNormEstimate estimate_operator_norm(const ApplyFn& apply_op, const ApplyFn& apply_adjoint,
                                            const Box& domain, const Box& range, double r,
                                            double s_prime, int restarts, int iterations,
                                            std::uint64_t seed) {
    if (!(r >= 1.0) || !(s_prime >= 1.0))
        throw std::invalid_argument("estimate_operator_norm: exponents must be >= 1");
    OperatorNormEstimate best;
    const double s_conj = conjugate_exponent(s_prime);
    Rng rng(seed);
    for (int restart = 0; restart < restarts; ++restart) {
        ++best.restarts_used;
        LatticeFunction f(domain);
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] = cplx(rng.next_signed_unit(), rng.next_signed_unit());
        {
            const double nf = lp_norm(f, r);
            for (std::size_t i = 0; i < f.size(); ++i) f[i] /= nf;
        }
        double prev = 0;
        bool converged = false;
        for (int it = 0; it < iterations; ++it) {
            LatticeFunction tf = apply_op(f);
            LatticeFunction g = dual_element(tf, s_conj, range);
            LatticeFunction tg = apply_adjoint(g);
            f = dual_element(tg, r, domain);
            const double ratio = std::abs(pair_inner(apply_op(f), g)) /
                                 (lp_norm(f, r) * lp_norm(g, s_conj));
            if (ratio > best.lower_bound) {
                best.lower_bound = ratio;
                best.best_f = f;
                best.best_g = g;
            }
            if (it > 0 && std::abs(ratio - prev) <= 1e-12 * std::max(1.0, ratio)) {
                converged = true;
                break;
            }
            prev = ratio;
        }
        best.converged = best.converged || converged;
    }
    return best;
}

std::pair<ApplyFn, ApplyFn> convolution_operator(const LatticeFunction& kernel) {
    LatticeFunction reflected(Box{[&] {
                                      std::vector<long long> lo(kernel.dim());
                                      for (int i = 0; i < kernel.dim(); ++i)
                                          lo[i] = -kernel.box().hi[i];
                                      return lo;
                                  }(),
                                  [&] {
                                      std::vector<long long> hi(kernel.dim());
                                      for (int i = 0; i < kernel.dim(); ++i)
                                          hi[i] = -kernel.box().lo[i];
                                      return hi;
                                  }()});
    for (std::size_t i = 0; i < kernel.size(); ++i) {
        auto x = kernel.box().point_at(i);
        for (auto& v : x) v = -v;
        reflected.ref(x) = std::conj(kernel[i]);
    }
    ApplyFn fwd = [kernel](const LatticeFunction& f) { return convolve(kernel, f); };
    ApplyFn adj = [reflected](const LatticeFunction& g) { return convolve(reflected, g); };
    return {fwd, adj};
}

std::pair<ApplyFn, ApplyFn> transform_operator(const TruncatedTransform& transform) {
    const TruncatedTransform* t = &transform;
    ApplyFn fwd = [t](const LatticeFunction& f) { return apply(*t, f); };
    // <Tf, g> = <f, T*g> with (T*g)(z) = sum_y g(z - P(y)) K_j(y) for real K
    ApplyFn adj = [t](const LatticeFunction& g) {
        const int n = t->map().dim_range();
        Box out_box;
        out_box.lo.resize(n);
        out_box.hi.resize(n);
        for (int i = 0; i < n; ++i) {
            out_box.lo[i] = g.box().lo[i] + t->image_min()[i];
            out_box.hi[i] = g.box().hi[i] + t->image_max()[i];
        }
        LatticeFunction out(out_box);
        std::vector<long long> x(n);
        for (std::size_t s = 0; s < t->tables().size(); ++s) {
            const auto& weights = t->tables()[s].weights;
            const auto& images = t->images()[s];
            for (std::size_t k = 0; k < weights.size(); ++k) {
                for (std::size_t i = 0; i < g.size(); ++i) {
                    if (g[i] == cplx{0, 0}) continue;
                    const auto xg = g.box().point_at(i);
                    for (int ax = 0; ax < n; ++ax) x[ax] = xg[ax] + images[k][ax];
                    out.ref(x) += g[i] * weights[k];
                }
            }
        }
        return out;
    };
    return {fwd, adj};
}

}  // namespace radonlab
