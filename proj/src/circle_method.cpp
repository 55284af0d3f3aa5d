#include "radonlab/circle_method.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "radonlab/fit.hpp"
#include "radonlab/parallel.hpp"

namespace radonlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

cplx unit_phase(double x) {
    const double r = x - std::nearbyint(x);
    return {std::cos(kTwoPi * r), std::sin(kTwoPi * r)};
}

long long mod_pos(long long v, long long m) {
    long long r = v % m;
    return r < 0 ? r + m : r;
}

long long mul_mod(long long a, long long b, long long m) {
    return static_cast<long long>(static_cast<__int128>(a) * b % m);
}

long long pow_mod(long long base, int exp, long long m) {
    long long r = 1 % m;
    long long b = mod_pos(base, m);
    while (exp > 0) {
        if (exp & 1) r = mul_mod(r, b, m);
        b = mul_mod(b, b, m);
        exp >>= 1;
    }
    return r;
}

long long inv_mod(long long a, long long m) {
    long long old_r = mod_pos(a, m), r = m;
    long long old_s = 1, s = 0;
    while (r != 0) {
        const long long quot = old_r / r;
        const long long nr = old_r - quot * r;
        old_r = r;
        r = nr;
        const long long ns = old_s - quot * s;
        old_s = s;
        s = ns;
    }
    if (old_r != 1) throw std::invalid_argument("inv_mod: not invertible");
    return mod_pos(old_s, m);
}

std::vector<cplx> root_table(long long q) {
    std::vector<cplx> roots(static_cast<std::size_t>(q));
    for (long long t = 0; t < q; ++t)
        roots[static_cast<std::size_t>(t)] = unit_phase(static_cast<double>(t) / static_cast<double>(q));
    return roots;
}

long long joint_gcd(const std::vector<long long>& a, long long q) {
    long long g = q;
    for (long long v : a) g = std::gcd(g, v);
    return g;
}

}  // namespace

ReducedFraction::ReducedFraction(long long q_, std::vector<long long> a_)
    : q(q_), a(std::move(a_)) {
    if (q < 1) throw std::invalid_argument("ReducedFraction: q must be positive");
    for (long long& v : a) {
        if (v < 0 || v >= q) throw std::invalid_argument("ReducedFraction: a_i must lie in [0, q)");
    }
    if (joint_gcd(a, q) != 1) throw std::invalid_argument("ReducedFraction: gcd(a_1,...,a_n,q) != 1");
}

long long ReducedFraction::shell_index() const {
    long long k = 1;
    while ((1LL << k) <= q) ++k;
    return k;  // 2^{k-1} <= q < 2^k
}

std::vector<double> ReducedFraction::value() const {
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        v[i] = static_cast<double>(a[i]) / static_cast<double>(q);
    return v;
}

ArcParameters::ArcParameters(double d, double dp, ArcRegime r)
    : delta(d), delta_prime(dp), regime(r) {
    if (regime == ArcRegime::paper) {
        if (!(delta > 0.0 && delta < 0.01))
            throw std::invalid_argument("ArcParameters: paper regime needs delta in (0, 1/100)");
        if (!(delta_prime > 0.0 && delta_prime < delta / 10.0))
            throw std::invalid_argument("ArcParameters: paper regime needs delta' in (0, delta/10)");
    } else {
        if (!(delta_prime > 0.0 && delta_prime < delta && delta < 1.0))
            throw std::invalid_argument("ArcParameters: exploratory regime needs 0 < delta' < delta < 1");
    }
}

cplx weyl_sum(const PolynomialMap& map, const ReducedFraction& frac) {
    if (frac.dim() != map.dim_range()) throw std::invalid_argument("weyl_sum: fraction dim != n");
    const long long q = frac.q;
    const int d = map.dim_domain();
    if (d > 2) throw std::invalid_argument("weyl_sum: d <= 2 only");
    const double terms = std::pow(static_cast<double>(q), d);
    if (terms > 2.5e8) throw std::runtime_error("weyl_sum: q^d beyond budget");

    // b_alpha = (c_alpha . a) mod q per term
    std::vector<long long> b;
    b.reserve(map.terms().size());
    for (const auto& term : map.terms()) {
        __int128 dot = 0;
        for (int i = 0; i < map.dim_range(); ++i)
            dot += static_cast<__int128>(term.coeff[i]) * frac.a[i];
        b.push_back(mod_pos(static_cast<long long>(dot % q), q));
    }
    const auto roots = root_table(q);
    KahanCSum acc;
    if (d == 1) {
        for (long long r = 0; r < q; ++r) {
            long long phase = 0;
            for (std::size_t ti = 0; ti < b.size(); ++ti) {
                if (b[ti] == 0) continue;
                const long long mono = pow_mod(r, map.terms()[ti].alpha[0], q);
                phase = (phase + mul_mod(b[ti], mono, q)) % q;
            }
            acc.add(roots[static_cast<std::size_t>(phase)]);
        }
    } else {
        for (long long r1 = 0; r1 < q; ++r1) {
            // powers of r1 reused across the inner loop
            std::vector<long long> p1(map.degree() + 1, 1);
            for (int e = 1; e <= map.degree(); ++e) p1[e] = mul_mod(p1[e - 1], r1, q);
            for (long long r2 = 0; r2 < q; ++r2) {
                std::vector<long long> p2(map.degree() + 1, 1);
                for (int e = 1; e <= map.degree(); ++e) p2[e] = mul_mod(p2[e - 1], r2, q);
                long long phase = 0;
                for (std::size_t ti = 0; ti < b.size(); ++ti) {
                    if (b[ti] == 0) continue;
                    const auto& alpha = map.terms()[ti].alpha;
                    const long long mono = mul_mod(p1[alpha[0]], p2[alpha[1]], q);
                    phase = (phase + mul_mod(b[ti], mono, q)) % q;
                }
                acc.add(roots[static_cast<std::size_t>(phase)]);
            }
        }
    }
    return acc.value() / terms;
}

cplx weyl_sum_via_crt(const PolynomialMap& map, const ReducedFraction& frac) {
    const long long q = frac.q;
    if (q == 1) return weyl_sum(map, frac);
    // peel the smallest prime power
    long long p = 2;
    while (p * p <= q && q % p != 0) ++p;
    if (p * p > q) return weyl_sum(map, frac);  // prime q
    long long q1 = 1;
    long long rest = q;
    while (rest % p == 0) {
        q1 *= p;
        rest /= p;
    }
    if (rest == 1) return weyl_sum(map, frac);  // prime power
    const long long q2 = rest;
    const long long i2 = inv_mod(q2 % q1, q1);
    const long long i1 = inv_mod(q1 % q2, q2);
    std::vector<long long> a1(frac.a.size()), a2(frac.a.size());
    for (std::size_t i = 0; i < frac.a.size(); ++i) {
        a1[i] = mul_mod(mod_pos(frac.a[i], q1), i2, q1);
        a2[i] = mul_mod(mod_pos(frac.a[i], q2), i1, q2);
    }
    return weyl_sum_via_crt(map, ReducedFraction(q1, std::move(a1))) *
           weyl_sum_via_crt(map, ReducedFraction(q2, std::move(a2)));
}

void enumerate_shell(int n, long long k, long long q_cap,
                     const std::function<void(const ReducedFraction&)>& sink) {
    if (k < 1) throw std::invalid_argument("enumerate_shell: k must be >= 1");
    const long long q_lo = k == 1 ? 1 : (1LL << (k - 1));
    const long long q_hi = std::min((1LL << k) - 1, q_cap);
    for (long long q = q_lo; q <= q_hi; ++q) {
        std::vector<long long> a(n, 0);
        for (;;) {
            if (joint_gcd(a, q) == 1) sink(ReducedFraction(q, a));
            int axis = n - 1;
            while (axis >= 0) {
                if (++a[axis] < q) break;
                a[axis] = 0;
                --axis;
            }
            if (axis < 0) break;
        }
    }
}

std::vector<ReducedFraction> shell_fractions(int n, long long k, long long q_cap) {
    std::vector<ReducedFraction> out;
    const double size_guess = std::pow(2.0, static_cast<double>(k * n));
    if (size_guess > 2.0e7) throw std::runtime_error("shell_fractions: shell beyond budget");
    enumerate_shell(n, k, q_cap, [&](const ReducedFraction& f) { out.push_back(f); });
    return out;
}

WeylDecayFit weyl_decay_fit(const PolynomialMap& map, long long q_max) {
    const auto cond_c = check_condition_c(map);
    if (!cond_c.satisfied)
        throw std::invalid_argument("weyl_decay_fit: Condition (C) fails, decay bound hypothesis unmet");
    if (map.dim_domain() > 2) throw std::invalid_argument("weyl_decay_fit: d <= 2 only");

    WeylDecayFit fit;
    fit.rows.resize(static_cast<std::size_t>(q_max));
    parallel_for(static_cast<std::size_t>(q_max), [&](std::size_t qi) {
        const long long q = static_cast<long long>(qi) + 1;
        const int d = map.dim_domain();
        const int n = map.dim_range();
        const auto roots = root_table(q);
        // P(r) mod q tabulated once per q
        const long long rd = d == 1 ? q : q * q;
        std::vector<long long> pmod(static_cast<std::size_t>(rd) * n);
        std::vector<long long> r(d);
        for (long long idx = 0; idx < rd; ++idx) {
            if (d == 1) {
                r[0] = idx;
            } else {
                r[0] = idx / q;
                r[1] = idx % q;
            }
            for (int i = 0; i < n; ++i) pmod[idx * n + i] = 0;
            for (const auto& term : map.terms()) {
                long long mono = 1;
                for (int ax = 0; ax < d; ++ax)
                    for (int e = 0; e < term.alpha[ax]; ++e) mono = mul_mod(mono, r[ax], q);
                for (int i = 0; i < n; ++i)
                    pmod[idx * n + i] =
                        (pmod[idx * n + i] + mul_mod(mod_pos(term.coeff[i], q), mono, q)) % q;
            }
        }
        double best = 0;
        std::vector<long long> a(n, 0);
        for (;;) {
            if (joint_gcd(a, q) == 1) {
                KahanCSum acc;
                for (long long idx = 0; idx < rd; ++idx) {
                    long long phase = 0;
                    for (int i = 0; i < n; ++i)
                        phase = (phase + mul_mod(pmod[idx * n + i], a[i], q)) % q;
                    acc.add(roots[static_cast<std::size_t>(phase)]);
                }
                best = std::max(best, std::abs(acc.value()) / static_cast<double>(rd));
            }
            int axis = n - 1;
            while (axis >= 0) {
                if (++a[axis] < q) break;
                a[axis] = 0;
                --axis;
            }
            if (axis < 0) break;
        }
        fit.rows[qi] = {q, best};
    });

    // least squares on log2-log2, zero rows excluded (they only strengthen decay)
    std::vector<double> lx, ly;
    for (const auto& row : fit.rows) {
        if (row.q < 2 || row.max_modulus <= 1e-14) continue;
        lx.push_back(std::log2(static_cast<double>(row.q)));
        ly.push_back(std::log2(row.max_modulus));
    }
    if (lx.size() >= 2) fit.ls_slope = least_squares_slope(lx, ly);
    return fit;
}

// ---------------------------------------------------------------------------
// Oscillatory quadrature: panels marched so each advances the phase < rad_cap,
// Gauss-Legendre 3 inside each panel.
// ---------------------------------------------------------------------------

namespace {

constexpr double kGL3Node = 0.7745966692414834;  // sqrt(3/5)
constexpr double kGL3W0 = 0.8888888888888889;    // 8/9
constexpr double kGL3W1 = 0.5555555555555556;    // 5/9

// phase polynomial t -> P(t) . eta for d = 1 (coefficients by power of t)
std::vector<double> phase_poly(const PolynomialMap& map, std::span<const double> eta) {
    std::vector<double> coeff(static_cast<std::size_t>(map.degree()) + 1, 0.0);
    for (const auto& term : map.terms()) {
        double dot = 0;
        for (int i = 0; i < map.dim_range(); ++i)
            dot += static_cast<double>(term.coeff[i]) * eta[i];
        coeff[static_cast<std::size_t>(term.alpha[0])] += dot;
    }
    return coeff;
}

double poly_eval(const std::vector<double>& c, double t) {
    double v = 0;
    for (std::size_t k = c.size(); k-- > 0;) v = v * t + c[k];
    return v;
}

std::vector<double> poly_derivative(const std::vector<double>& c) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> d(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = c[k] * static_cast<double>(k);
    return d;
}

struct PanelGrid {
    std::vector<double> nodes;    // quadrature abscissae
    std::vector<double> weights;  // GL weight * panel halfwidth
    long long panels = 0;
};

// march [t0, t1] (0 < t0 < t1) with local width rad_cap/(2 pi |phi'|), also
// resolving the kernel scale 2^j; abs_rate_poly has nonnegative coefficients
// and dominates |phi'|, so evaluating it at the panel's right end bounds the
// phase advance across the whole panel. The visitor receives (mid, half).
template <typename Visit>
void march(double t0, double t1, const std::vector<double>& abs_rate_poly, long long j,
           double rad_cap, long long panel_budget, Visit&& visit) {
    const double kernel_cap = std::ldexp(1.0, static_cast<int>(j - 1)) / 16.0;
    const double min_width = (t1 - t0) / static_cast<double>(panel_budget);
    double t = t0;
    while (t < t1) {
        const double rate_here = kTwoPi * poly_eval(abs_rate_poly, t);
        double w = rate_here > 0 ? rad_cap / rate_here : kernel_cap;
        w = std::min(w, kernel_cap);
        const double rate_end = kTwoPi * poly_eval(abs_rate_poly, t + w);
        if (rate_end > 0) w = std::min(w, rad_cap / rate_end);
        if (w < min_width)
            throw std::runtime_error(
                "oscillatory quadrature: phase too wild for panel budget; need about " +
                std::to_string(static_cast<long long>((t1 - t0) / w) + 1) + " panels");
        w = std::min(w, t1 - t);
        visit(t + 0.5 * w, 0.5 * w);
        t += w;
    }
}

PanelGrid march_panels(double t0, double t1, const std::vector<double>& abs_rate_poly,
                       long long j, double rad_cap, long long panel_budget) {
    PanelGrid grid;
    march(t0, t1, abs_rate_poly, j, rad_cap, panel_budget, [&](double mid, double half) {
        grid.nodes.push_back(mid - half * kGL3Node);
        grid.weights.push_back(half * kGL3W1);
        grid.nodes.push_back(mid);
        grid.weights.push_back(half * kGL3W0);
        grid.nodes.push_back(mid + half * kGL3Node);
        grid.weights.push_back(half * kGL3W1);
        ++grid.panels;
    });
    return grid;
}

// |phi'| dominating polynomial in |t|: sum_k |c_k| k |t|^{k-1}
std::vector<double> abs_rate_from_phase(const std::vector<double>& phase_coeff) {
    std::vector<double> d = poly_derivative(phase_coeff);
    for (double& v : d) v = std::abs(v);
    return d;
}

// streaming one-shot integral for d = 1: no node storage, so the panel budget
// can be generous
cplx integrate_1d(const CZKernel& kernel, const BumpProfile& bump, long long j,
                  const std::vector<double>& phase_coeff, double rad_cap,
                  long long panel_budget, long long* evals) {
    const double r_lo = std::ldexp(1.0, static_cast<int>(j - 1));
    const double r_hi = std::ldexp(1.0, static_cast<int>(j + 1));
    const auto rate = abs_rate_from_phase(phase_coeff);
    KahanCSum acc;
    for (int side = 0; side < 2; ++side) {
        const double sgn = side == 0 ? 1.0 : -1.0;
        march(r_lo, r_hi, rate, j, rad_cap, panel_budget, [&](double mid, double half) {
            const double offs[3] = {-half * kGL3Node, 0.0, half * kGL3Node};
            const double wts[3] = {half * kGL3W1, half * kGL3W0, half * kGL3W1};
            for (int g = 0; g < 3; ++g) {
                const double t = sgn * (mid + offs[g]);
                const double y[1] = {t};
                const double kj = kj_eval(kernel, bump, j, y);
                if (kj == 0.0) continue;
                acc.add(wts[g] * kj * unit_phase(poly_eval(phase_coeff, t)));
                if (evals) ++*evals;
            }
        });
    }
    return acc.value();
}

// 2-d tensor quadrature over the annulus (small j only)
cplx phi_2d(const PolynomialMap& map, const CZKernel& kernel, const BumpProfile& bump, long long j,
            std::span<const double> eta, double rad_cap, long long budget, long long* evals) {
    const double r_hi = std::ldexp(1.0, static_cast<int>(j + 1));
    // per-axis rate bound sum_alpha |c_alpha . eta| alpha_k R^{|alpha|-1}
    double rate = 0;
    for (const auto& term : map.terms()) {
        double dot = 0;
        for (int i = 0; i < map.dim_range(); ++i)
            dot += static_cast<double>(term.coeff[i]) * eta[i];
        int order = 0;
        int amax = 0;
        for (int a : term.alpha) {
            order += a;
            amax = std::max(amax, a);
        }
        rate += std::abs(dot) * amax * std::pow(r_hi, order - 1);
    }
    const double kernel_cap = std::ldexp(1.0, static_cast<int>(j - 1)) / 16.0;
    double step = rate > 0 ? rad_cap / (kTwoPi * rate) : kernel_cap;
    step = std::min(step, kernel_cap);
    const long long cells = static_cast<long long>(std::ceil(2.0 * r_hi / step));
    if (cells * cells > budget)
        throw std::runtime_error("oscillatory quadrature (2d): need about " +
                                 std::to_string(cells * cells) + " cells, beyond budget");
    const double h = 2.0 * r_hi / static_cast<double>(cells);
    KahanCSum acc;
    double y[2];
    for (long long ix = 0; ix < cells; ++ix) {
        const double x0 = -r_hi + (static_cast<double>(ix) + 0.5) * h;
        for (long long iy = 0; iy < cells; ++iy) {
            const double x1 = -r_hi + (static_cast<double>(iy) + 0.5) * h;
            y[0] = x0;
            y[1] = x1;
            const double r = std::hypot(x0, x1);
            if (r == 0.0) continue;
            const double kj = kj_eval(kernel, bump, j, y);
            if (kj == 0.0) continue;
            const auto p = evaluate_real(map, y);
            double ph = 0;
            for (int i = 0; i < map.dim_range(); ++i) ph += p[i] * eta[i];
            acc.add(kj * h * h * unit_phase(ph));
            if (evals) ++*evals;
        }
    }
    return acc.value();
}

constexpr long long kPanelBudget = 6'000'000;        // stored ladder grids
constexpr long long kStreamPanelBudget = 40'000'000;  // streamed single evaluations

}  // namespace

OscillatoryValue phi(const PolynomialMap& map, const CZKernel& kernel, const BumpProfile& bump,
                     long long j, std::span<const double> eta, double tol) {
    if (j < 1) throw std::invalid_argument("phi: j must be >= 1");
    if (static_cast<int>(eta.size()) != map.dim_range())
        throw std::invalid_argument("phi: eta dimension != n");
    OscillatoryValue out;
    if (map.dim_domain() == 1) {
        const auto phase = phase_poly(map, eta);
        double rad = 0.1;  // phase advance per panel
        cplx prev = integrate_1d(kernel, bump, j, phase, rad, kStreamPanelBudget,
                                 &out.evaluations);
        for (int pass = 0; pass < 3; ++pass) {
            rad *= 0.5;
            const cplx refined =
                integrate_1d(kernel, bump, j, phase, rad, kStreamPanelBudget, &out.evaluations);
            out.error_estimate = std::abs(refined - prev);
            out.value = refined;
            prev = refined;
            if (out.error_estimate <= tol) break;
        }
        return out;
    }
    if (map.dim_domain() == 2) {
        double rad = 0.1;
        cplx prev = phi_2d(map, kernel, bump, j, eta, rad, 80'000'000, &out.evaluations);
        for (int pass = 0; pass < 2; ++pass) {
            rad *= 0.5;
            const cplx refined = phi_2d(map, kernel, bump, j, eta, rad, 80'000'000, &out.evaluations);
            out.error_estimate = std::abs(refined - prev);
            out.value = refined;
            prev = refined;
            if (out.error_estimate <= tol) break;
        }
        return out;
    }
    throw std::invalid_argument("phi: d <= 2 only");
}

std::vector<cplx> phi_ladder(const PolynomialMap& map, const CZKernel& kernel,
                             const BumpProfile& bump, long long j, std::span<const double> eta0,
                             std::span<const double> deta, long long count, double tol) {
    if (map.dim_domain() != 1) throw std::invalid_argument("phi_ladder: d = 1 only");
    if (j < 1) throw std::invalid_argument("phi_ladder: j must be >= 1");
    if (count < 1) throw std::invalid_argument("phi_ladder: empty ladder");

    // dominate |phi'| over the whole ladder: componentwise worst |eta|
    std::vector<double> eta_worst(eta0.size());
    for (std::size_t i = 0; i < eta0.size(); ++i)
        eta_worst[i] = std::max(std::abs(eta0[i]),
                                std::abs(eta0[i] + static_cast<double>(count - 1) * deta[i]));
    const auto phase_worst = phase_poly(map, std::span<const double>(eta_worst));
    std::vector<double> worst_abs(phase_worst.size());
    for (std::size_t i = 0; i < phase_worst.size(); ++i) worst_abs[i] = std::abs(phase_worst[i]);

    const std::vector<double> rate = poly_derivative(worst_abs);
    const auto eval_ladder = [&](double rad) {
        std::vector<cplx> acc(static_cast<std::size_t>(count), cplx{0, 0});
        const double r_lo = std::ldexp(1.0, static_cast<int>(j - 1));
        const double r_hi = std::ldexp(1.0, static_cast<int>(j + 1));
        const auto phase0 = phase_poly(map, eta0);
        const auto phase_step = phase_poly(map, deta);
        for (int side = 0; side < 2; ++side) {
            PanelGrid grid = march_panels(r_lo, r_hi, rate, j, rad, kPanelBudget);
            const std::size_t m = grid.nodes.size();
            std::vector<double> wk;
            std::vector<cplx> base, rot;
            wk.reserve(m);
            base.reserve(m);
            rot.reserve(m);
            for (std::size_t i = 0; i < m; ++i) {
                const double t = side == 0 ? grid.nodes[i] : -grid.nodes[i];
                const double y[1] = {t};
                const double kj = kj_eval(kernel, bump, j, y);
                if (kj == 0.0) continue;
                wk.push_back(grid.weights[i] * kj);
                base.push_back(unit_phase(poly_eval(phase0, t)));
                rot.push_back(unit_phase(poly_eval(phase_step, t)));
            }
            for (long long node = 0; node < count; ++node) {
                KahanCSum sum;
                for (std::size_t i = 0; i < wk.size(); ++i) sum.add(wk[i] * base[i]);
                acc[static_cast<std::size_t>(node)] += sum.value();
                if (node + 1 < count) {
                    for (std::size_t i = 0; i < wk.size(); ++i) base[i] *= rot[i];
                    if ((node & 255) == 255)
                        for (auto& b : base) b /= std::abs(b);
                }
            }
        }
        return acc;
    };

    std::vector<cplx> coarse = eval_ladder(0.1);
    std::vector<cplx> fine = eval_ladder(0.05);
    double err = 0;
    for (long long i = 0; i < count; ++i)
        err = std::max(err, std::abs(fine[static_cast<std::size_t>(i)] -
                                     coarse[static_cast<std::size_t>(i)]));
    if (err > tol) {
        coarse = std::move(fine);
        fine = eval_ladder(0.025);
    }
    return fine;
}

long long alias_free_grid(const PolynomialMap& map, const CZKernel& kernel,
                          const BumpProfile& bump, long long j) {
    const AnnulusTable table = build_annulus_table(kernel, bump, j);
    long long max_abs = 0;
    for (const auto& y : table.points) {
        const auto p = evaluate(map, y);
        for (long long v : p) max_abs = std::max(max_abs, std::abs(v));
    }
    return next_pow2(2 * max_abs + 2);
}

SampledMultiplier multiplier_mj(const PolynomialMap& map, const CZKernel& kernel,
                                const BumpProfile& bump, long long j, long long grid_n) {
    if (j < 1) throw std::invalid_argument("multiplier_mj: j must be >= 1");
    const AnnulusTable table = build_annulus_table(kernel, bump, j);
    // distinct frequencies P(y), coefficients accumulated
    std::map<std::vector<long long>, cplx> freq_map;
    for (std::size_t i = 0; i < table.points.size(); ++i)
        freq_map[evaluate(map, table.points[i])] += table.weights[i];
    std::vector<std::pair<std::vector<long long>, cplx>> freqs(freq_map.begin(), freq_map.end());
    return sampled_from_frequencies(map.dim_range(), grid_n, freqs);
}

cplx mj_point(const PolynomialMap& map, const CZKernel& kernel, const BumpProfile& bump,
              long long j, std::span<const double> xi) {
    const AnnulusTable table = build_annulus_table(kernel, bump, j);
    KahanCSum acc;
    for (std::size_t i = 0; i < table.points.size(); ++i) {
        const auto p = evaluate(map, table.points[i]);
        // fixed-point reduction keeps huge integer frequencies accurate mod 1
        double phase = 0;
        for (int ax = 0; ax < map.dim_range(); ++ax) {
            const double f = xi[ax] - std::floor(xi[ax]);
            const __int128 scaled = static_cast<__int128>(std::ldexp(f, 62));
            const __int128 prod = static_cast<__int128>(p[ax]) * scaled;
            const long long red = static_cast<long long>(prod % (static_cast<__int128>(1) << 62));
            phase += std::ldexp(static_cast<double>(red), -62);
        }
        acc.add(table.weights[i] * unit_phase(phase));
    }
    return acc.value();
}

double major_arc_halfwidth(const PolynomialMap& map, const ArcParameters& params, long long j,
                           int axis) {
    const double e = -(static_cast<double>(map.degrees()[axis] - 1) + params.delta) *
                     static_cast<double>(j);
    return std::pow(2.0, e);
}

bool major_arc_contains(const PolynomialMap& map, const ArcParameters& params, long long j,
                        const ReducedFraction& frac, std::span<const double> xi) {
    if (static_cast<int>(xi.size()) != map.dim_range())
        throw std::invalid_argument("major_arc_contains: xi dimension != n");
    for (int i = 0; i < map.dim_range(); ++i) {
        const double target = static_cast<double>(frac.a[i]) / static_cast<double>(frac.q);
        double dist = std::abs(xi[i] - target);
        dist -= std::floor(dist);
        dist = std::min(dist, 1.0 - dist);
        if (dist > major_arc_halfwidth(map, params, j, i)) return false;
    }
    return true;
}

MainTermVariant MainTermVariant::Ljk(long long k) {
    MainTermVariant v;
    v.kind = Kind::single_shell;
    v.k = k;
    return v;
}

MainTermVariant MainTermVariant::Lj() {
    MainTermVariant v;
    v.kind = Kind::full_scale;
    return v;
}

MainTermVariant MainTermVariant::Lk_tail(long long k, long long j_max) {
    MainTermVariant v;
    v.kind = Kind::shell_tail;
    v.k = k;
    v.j_max = j_max;
    return v;
}

namespace {

// add L_{j,k} to the grid samples; verifies at most one active fraction per node
void accumulate_shell_term(std::vector<cplx>& samples, const PolynomialMap& map,
                           const CZKernel& kernel, const BumpProfile& bump, long long jj,
                           long long k, long long grid_n) {
    const int n = map.dim_range();
    const double chi_scale = std::ldexp(1.0, static_cast<int>(10 * k));
    const double support_radius = 2.0 / chi_scale;  // chi(2^{10k} eta) = 0 beyond |eta| = 2/2^{10k}
    const auto fractions = shell_fractions(n, k, (1LL << k) - 1);

    std::unordered_map<long long, std::size_t> owner;  // node -> fraction index, per shell
    if (n == 1) {
        const double n_d = static_cast<double>(grid_n);
        for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
            const auto& frac = fractions[fi];
            const double c = static_cast<double>(frac.a[0]) / static_cast<double>(frac.q);
            const long long t_lo = static_cast<long long>(std::ceil((c - support_radius) * n_d));
            const long long t_hi = static_cast<long long>(std::floor((c + support_radius) * n_d));
            if (t_hi < t_lo) continue;
            const cplx s = weyl_sum(map, frac);
            const double eta0 = static_cast<double>(t_lo) / n_d - c;
            const double deta = 1.0 / n_d;
            const long long count = t_hi - t_lo + 1;
            const std::vector<cplx> phis =
                phi_ladder(map, kernel, bump, jj, std::span<const double>(&eta0, 1),
                           std::span<const double>(&deta, 1), count);
            for (long long t = t_lo; t <= t_hi; ++t) {
                const double eta = static_cast<double>(t) / n_d - c;
                const double chi = theta_profile(chi_scale * std::abs(eta));
                if (chi == 0.0) continue;
                const long long node = mod_pos(t, grid_n);
                const auto [it, fresh] = owner.try_emplace(node, fi);
                if (!fresh && it->second != fi)
                    throw std::runtime_error(
                        "main_term: two shell-" + std::to_string(k) +
                        " fractions active at one node; chi_k supports must be disjoint");
                samples[static_cast<std::size_t>(node)] +=
                    s * phis[static_cast<std::size_t>(t - t_lo)] * chi;
            }
        }
        return;
    }

    // n = 2: windows are small at desk parameters; per-node quadrature
    const double n_d = static_cast<double>(grid_n);
    for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
        const auto& frac = fractions[fi];
        const cplx s = weyl_sum(map, frac);
        std::vector<long long> t_lo(n), t_hi(n);
        for (int ax = 0; ax < n; ++ax) {
            const double c = static_cast<double>(frac.a[ax]) / static_cast<double>(frac.q);
            t_lo[ax] = static_cast<long long>(std::ceil((c - support_radius) * n_d));
            t_hi[ax] = static_cast<long long>(std::floor((c + support_radius) * n_d));
        }
        std::vector<long long> t(t_lo);
        for (;;) {
            std::vector<double> eta(n);
            double dist2 = 0;
            for (int ax = 0; ax < n; ++ax) {
                eta[ax] = static_cast<double>(t[ax]) / n_d -
                          static_cast<double>(frac.a[ax]) / static_cast<double>(frac.q);
                dist2 += eta[ax] * eta[ax];
            }
            const double chi = theta_profile(chi_scale * std::sqrt(dist2));
            if (chi != 0.0) {
                long long node = 0;
                for (int ax = 0; ax < n; ++ax)
                    node = node * grid_n + mod_pos(t[ax], grid_n);
                const auto [it, fresh] = owner.try_emplace(node, fi);
                if (!fresh && it->second != fi)
                    throw std::runtime_error("main_term: two shell fractions active at one node");
                const cplx ph = phi(map, kernel, bump, jj, eta).value;
                samples[static_cast<std::size_t>(node)] += s * ph * chi;
            }
            int axis = n - 1;
            while (axis >= 0) {
                if (++t[axis] <= t_hi[axis]) break;
                t[axis] = t_lo[axis];
                --axis;
            }
            if (axis < 0) break;
        }
    }
}

}  // namespace

SampledMultiplier main_term(const PolynomialMap& map, const CZKernel& kernel,
                            const BumpProfile& bump, const ArcParameters& params, long long j,
                            const MainTermVariant& variant, long long grid_n) {
    if (grid_n <= 0 || (grid_n & (grid_n - 1)) != 0)
        throw std::invalid_argument("main_term: grid must be a positive power of 2");
    const int n = map.dim_range();
    double total = 1;
    for (int i = 0; i < n; ++i) total *= static_cast<double>(grid_n);
    if (total > 1.1e8) throw std::runtime_error("main_term: grid beyond budget");

    SampledMultiplier out;
    out.n = n;
    out.grid_n = grid_n;
    out.samples.assign(static_cast<std::size_t>(total), cplx{0, 0});

    std::vector<std::pair<long long, long long>> jk;  // (scale, shell)
    switch (variant.kind) {
        case MainTermVariant::Kind::single_shell:
            jk.emplace_back(j, variant.k);
            break;
        case MainTermVariant::Kind::full_scale: {
            const long long k_max =
                static_cast<long long>(std::floor(static_cast<double>(j) * params.delta_prime));
            for (long long k = 1; k <= k_max; ++k) jk.emplace_back(j, k);
            break;
        }
        case MainTermVariant::Kind::shell_tail: {
            const long long j_start = static_cast<long long>(
                std::ceil(static_cast<double>(variant.k) / params.delta_prime));
            for (long long jj = j_start; jj <= variant.j_max; ++jj)
                jk.emplace_back(jj, variant.k);
            break;
        }
    }
    for (const auto& [jj, k] : jk)
        accumulate_shell_term(out.samples, map, kernel, bump, jj, k, grid_n);
    return out;
}

ErrorTermResult error_term(const PolynomialMap& map, const CZKernel& kernel,
                           const BumpProfile& bump, const ArcParameters& params, long long j,
                           long long grid_n) {
    if (j < 1) throw std::invalid_argument("error_term: j must be >= 1");
    const long long k_max =
        static_cast<long long>(std::floor(static_cast<double>(j) * params.delta_prime));
    ErrorTermResult result;
    result.l_term_empty = k_max < 1;

    if (!result.l_term_empty) {
        // the grid has arcs to resolve: step <= 2^{-(D-1)j - delta j} / 4
        const double required =
            4.0 * std::pow(2.0, (static_cast<double>(map.degree() - 1) + params.delta) *
                                    static_cast<double>(j));
        if (static_cast<double>(grid_n) < required)
            throw std::invalid_argument(
                "error_term: grid under-resolves the narrowest major arc; need at least " +
                std::to_string(static_cast<long long>(next_pow2(
                    static_cast<long long>(std::ceil(required))))) +
                " nodes per axis");
        if (map.dim_range() != 1)
            throw std::invalid_argument("error_term: resolved L_j path implemented for n = 1");

        // independent multiplier route: exact mod-N integer phases
        const AnnulusTable table = build_annulus_table(kernel, bump, j);
        const double work = static_cast<double>(grid_n) * static_cast<double>(table.points.size());
        if (work > 3.0e9) throw std::runtime_error("error_term: direct grid evaluation beyond budget");
        const auto roots = root_table(grid_n);
        std::vector<cplx> m(static_cast<std::size_t>(grid_n), cplx{0, 0});
        for (std::size_t i = 0; i < table.points.size(); ++i) {
            const auto p = evaluate(map, table.points[i]);
            const long long f = mod_pos(p[0] % grid_n, grid_n);
            const double w = table.weights[i];
            for (long long t = 0; t < grid_n; ++t) {
                const long long ph = static_cast<long long>(
                    static_cast<__int128>(f) * t % grid_n);
                m[static_cast<std::size_t>(t)] += w * roots[static_cast<std::size_t>(ph)];
            }
        }
        result.multiplier.n = 1;
        result.multiplier.grid_n = grid_n;
        result.multiplier.samples = std::move(m);

        const SampledMultiplier l = main_term(map, kernel, bump, params, j,
                                              MainTermVariant::Lj(), grid_n);
        result.error.n = 1;
        result.error.grid_n = grid_n;
        result.error.samples.resize(result.multiplier.samples.size());
        for (std::size_t i = 0; i < result.error.samples.size(); ++i)
            result.error.samples[i] = result.multiplier.samples[i] - l.samples[i];
    } else {
        // L_j is an empty sum: E_j = m_j, exact trig-polynomial sampling
        result.multiplier = multiplier_mj(map, kernel, bump, j, grid_n);
        result.error = result.multiplier;
    }
    result.sup_norm = result.error.sup_abs();
    return result;
}

ApproximationErrorReport approximation_error(const PolynomialMap& map, const CZKernel& kernel,
                                             const BumpProfile& bump, const ArcParameters& params,
                                             long long j, const ReducedFraction& frac,
                                             const std::vector<std::vector<double>>& offsets) {
    ApproximationErrorReport report;
    const double q_window = std::pow(2.0, params.delta_prime * static_cast<double>(j));
    report.q_within_paper_window = static_cast<double>(frac.q) <= q_window;
    if (params.regime == ArcRegime::paper && !report.q_within_paper_window)
        throw std::invalid_argument("approximation_error: q exceeds 2^{delta' j} in paper regime");

    const AnnulusTable table = build_annulus_table(kernel, bump, j);
    std::vector<std::vector<long long>> images;
    images.reserve(table.points.size());
    for (const auto& y : table.points) images.push_back(evaluate(map, y));
    const auto roots = root_table(frac.q);
    const cplx s = weyl_sum(map, frac);

    for (const auto& eta : offsets) {
        if (static_cast<int>(eta.size()) != map.dim_range())
            throw std::invalid_argument("approximation_error: offset dimension != n");
        for (int i = 0; i < map.dim_range(); ++i)
            if (std::abs(eta[i]) > major_arc_halfwidth(map, params, j, i))
                throw std::invalid_argument("approximation_error: sample outside the major arc");

        // m_j(a/q + eta): exact mod-q phase plus small real remainder
        KahanCSum acc;
        for (std::size_t i = 0; i < images.size(); ++i) {
            __int128 dot = 0;
            double rem = 0;
            for (int ax = 0; ax < map.dim_range(); ++ax) {
                dot += static_cast<__int128>(images[i][ax]) * frac.a[ax];
                rem += static_cast<double>(images[i][ax]) * eta[ax];
            }
            const long long ph = mod_pos(static_cast<long long>(dot % frac.q), frac.q);
            acc.add(table.weights[i] * roots[static_cast<std::size_t>(ph)] * unit_phase(rem));
        }
        const cplx mj = acc.value();
        const cplx main = s * phi(map, kernel, bump, j, eta).value;
        const double dev = std::abs(mj - main);
        report.deviations.push_back(dev);
        report.max_deviation = std::max(report.max_deviation, dev);
    }
    return report;
}

OffArcReport off_arc_phi_report(const PolynomialMap& map, const CZKernel& kernel,
                                const BumpProfile& bump, const ArcParameters& params, long long j,
                                const ReducedFraction& frac,
                                const std::vector<std::vector<double>>& offsets) {
    OffArcReport report;
    report.decay_reference = std::pow(
        2.0, -(1.0 - params.delta) * static_cast<double>(j) / static_cast<double>(map.degree()));
    for (const auto& eta : offsets) {
        std::vector<double> xi(eta.size());
        for (std::size_t i = 0; i < eta.size(); ++i)
            xi[i] = static_cast<double>(frac.a[i]) / static_cast<double>(frac.q) + eta[i];
        if (major_arc_contains(map, params, j, frac, xi))
            throw std::invalid_argument("off_arc_phi_report: sample lies inside the major arc");
        report.max_modulus = std::max(report.max_modulus,
                                      std::abs(phi(map, kernel, bump, j, eta).value));
    }
    report.ratio = report.max_modulus / report.decay_reference;
    return report;
}

MinorArcKernelResult minor_arc_kernel(const PolynomialMap& map, const CZKernel& kernel,
                                      const BumpProfile& bump, const ArcParameters& params,
                                      long long j, long long grid_n, double rho_max) {
    if (map.dim_range() != 1)
        throw std::invalid_argument("minor_arc_kernel: n = 1 only at desk scale");
    MinorArcKernelResult result;

    const auto compute = [&](long long n_grid) {
        ErrorTermResult err = error_term(map, kernel, bump, params, j, n_grid);
        // full-period inverse: sum over all outputs equals E_j at frequency 0
        LatticeFunction full = idft(err.error, default_idft_box(err.error));
        KahanCSum total;
        for (std::size_t i = 0; i < full.size(); ++i) total.add(full[i]);

        const double bound_d = std::pow(rho_max, static_cast<double>(map.degrees()[0]));
        long long bound = bound_d > 4.5e18 ? (n_grid - 1) / 2
                                           : static_cast<long long>(std::floor(bound_d));
        bound = std::min(bound, (n_grid - 1) / 2);
        Box window{{-bound}, {bound}};
        LatticeFunction restricted(window);
        const double qstar_rho = std::pow(2.0, static_cast<double>((map.degree() + 1) * j));
        double tail = 0;
        double sup = 0;
        // copy values from the full inverse into the rho-window and measure
        for (std::size_t i = 0; i < restricted.size(); ++i) {
            const auto x = window.point_at(i);
            restricted[i] = full.at(x);
            const double a = std::abs(restricted[i]);
            sup = std::max(sup, a);
            const long long xv[1] = {x[0]};
            if (rho(map.degrees(), std::span<const long long>(xv, 1)) > qstar_rho) tail += a;
        }
        return std::tuple<LatticeFunction, double, double, cplx>(std::move(restricted), tail, sup,
                                                                 total.value());
    };

    auto [restricted, tail, sup, total] = compute(grid_n);
    result.kernel = std::move(restricted);
    result.tail_l1 = tail;
    result.sup_abs = sup;
    result.zero_frequency_sum = total;
    result.grid_used = grid_n;

    const long long k_max =
        static_cast<long long>(std::floor(static_cast<double>(j) * params.delta_prime));
    if (k_max >= 1) {
        // L_j is not band-limited; refine until the l^1 tail stabilizes
        result.refinement_converged = false;
        long long n_grid = grid_n;
        double prev_tail = tail;
        for (int pass = 0; pass < 2; ++pass) {
            n_grid *= 2;
            double grid_nodes = static_cast<double>(n_grid);
            if (grid_nodes > 1.1e8) break;
            auto [k2, tail2, sup2, tot2] = compute(n_grid);
            const double denom = std::max(std::abs(prev_tail), 1e-300);
            const double rel = std::abs(tail2 - prev_tail) / std::max(denom, std::abs(tail2));
            result.kernel = std::move(k2);
            result.tail_l1 = tail2;
            result.sup_abs = sup2;
            result.zero_frequency_sum = tot2;
            result.grid_used = n_grid;
            if (prev_tail == 0.0 && tail2 == 0.0) {
                result.refinement_converged = true;
                break;
            }
            if (rel < 0.01) {
                result.refinement_converged = true;
                break;
            }
            prev_tail = tail2;
        }
    }
    return result;
}

RegionReport proven_region(const PolynomialMap& map, const Rational& eps_prime, const Rational& r,
                           const Rational& s) {
    if (!(eps_prime > Rational(0)))
        throw std::invalid_argument("proven_region: eps_prime must be positive");
    if (!(r >= Rational(1)) || !(s >= Rational(1)))
        throw std::invalid_argument("proven_region: exponents must be >= 1");
    RegionReport report;
    report.n_p = map.region_exponent();
    const Rational half(1, 2);
    const Rational inv_r = r.inverse();
    const Rational inv_s = s.inverse();
    const Rational boundary = half + eps_prime / Rational(2 * report.n_p);
    const Rational max_inv = inv_r < inv_s ? inv_s : inv_r;
    report.in_omega_m = max_inv < boundary;

    const Rational lhs(1, map.sharp_degree());
    const Rational rhs = Rational(map.dim_range() + 1, 2) *
                         ((inv_r - half).abs() + (inv_s - half).abs());
    report.major_condition_ok = lhs > rhs;
    return report;
}

}  // namespace radonlab
