#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "radonlab/circle_method.hpp"
#include "radonlab/experiment.hpp"
#include "radonlab/rng.hpp"

using namespace radonlab;

namespace {

const PolynomialMap& t3_map() {
    static const PolynomialMap p = fixture_map("t3");
    return p;
}

const PolynomialMap& t2_map() {
    static const PolynomialMap p = fixture_map("t2");
    return p;
}

// slow independent Weyl sum straight from the definition
cplx weyl_oracle(const PolynomialMap& map, const ReducedFraction& frac) {
    const long long q = frac.q;
    cplx sum{0, 0};
    std::vector<long long> r(static_cast<std::size_t>(map.dim_domain()), 0);
    long long total = 1;
    for (int i = 0; i < map.dim_domain(); ++i) total *= q;
    for (long long idx = 0; idx < total; ++idx) {
        long long rem = idx;
        for (int i = map.dim_domain() - 1; i >= 0; --i) {
            r[static_cast<std::size_t>(i)] = rem % q;
            rem /= q;
        }
        const auto p = evaluate(map, r);
        double phase = 0;
        for (int i = 0; i < map.dim_range(); ++i)
            phase += static_cast<double>((p[i] % q) * frac.a[i] % q) / static_cast<double>(q);
        phase -= std::floor(phase);
        sum += cplx(std::cos(2 * std::numbers::pi * phase), std::sin(2 * std::numbers::pi * phase));
    }
    return sum / static_cast<double>(total);
}

}  // namespace

TEST_CASE("reduced fractions validate and shell-index correctly") {
    CHECK_THROWS_AS(ReducedFraction(4, {2}), std::invalid_argument);
    CHECK_THROWS_AS(ReducedFraction(5, {5}), std::invalid_argument);
    CHECK(ReducedFraction(1, {0}).shell_index() == 1);
    CHECK(ReducedFraction(2, {1}).shell_index() == 2);
    CHECK(ReducedFraction(3, {2}).shell_index() == 2);
    CHECK(ReducedFraction(4, {1}).shell_index() == 3);
}

TEST_CASE("arc parameter windows") {
    CHECK_NOTHROW(ArcParameters(0.009, 0.0008, ArcRegime::paper));
    CHECK_THROWS_AS(ArcParameters(0.1, 0.001, ArcRegime::paper), std::invalid_argument);
    CHECK_THROWS_AS(ArcParameters(0.009, 0.005, ArcRegime::paper), std::invalid_argument);
    CHECK_NOTHROW(ArcParameters(0.5, 0.25, ArcRegime::exploratory));
    CHECK_THROWS_AS(ArcParameters(0.5, 0.6, ArcRegime::exploratory), std::invalid_argument);
    CHECK(ArcParameters(0.3, 0.02, ArcRegime::exploratory).epsilon() == doctest::Approx(0.28));
}

TEST_CASE("weyl sums on the pinned fixtures") {
    CHECK(std::abs(weyl_sum(t3_map(), ReducedFraction::zero(1)) - cplx{1, 0}) < 1e-15);
    CHECK(std::abs(weyl_sum(t3_map(), ReducedFraction(3, {1}))) < 1e-14);
    CHECK(std::abs(weyl_sum(t2_map(), ReducedFraction(5, {1}))) ==
          doctest::Approx(1.0 / std::sqrt(5.0)));
}

TEST_CASE("weyl sums stay inside the unit disk, equality only at q = 1") {
    Rng rng(3);
    for (int trial = 0; trial < 60; ++trial) {
        Rng trng = rng.fork(trial);
        const long long q = trng.next_in(1, 400);
        long long a = q == 1 ? 0 : trng.next_in(0, q - 1);
        if (q > 1 && std::gcd(a, q) != 1) a = 1;
        const double mod = std::abs(weyl_sum(t3_map(), ReducedFraction(q, {a})));
        CHECK(mod <= 1.0 + 1e-12);
        if (q == 1) CHECK(mod == doctest::Approx(1.0));
    }
}

TEST_CASE("multiplicative factorization matches the definition") {
    Rng rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        Rng trng = rng.fork(trial);
        const long long q = trng.next_in(2, 3000);
        long long a = trng.next_in(0, q - 1);
        if (std::gcd(a, q) != 1) a = 1;
        const ReducedFraction frac(q, {a});
        const cplx direct = weyl_sum(t3_map(), frac);
        const cplx via_crt = weyl_sum_via_crt(t3_map(), frac);
        CHECK(std::abs(direct - via_crt) < 1e-12);
    }
    // d = 2 spot check against the slow oracle
    const PolynomialMap iw22 = fixture_map("iw_2_2");
    const ReducedFraction frac(6, {1, 2, 3, 4, 5});
    CHECK(std::abs(weyl_sum(iw22, frac) - weyl_oracle(iw22, frac)) < 1e-12);
    CHECK(std::abs(weyl_sum_via_crt(iw22, frac) - weyl_sum(iw22, frac)) < 1e-12);
}

TEST_CASE("shell enumeration in dimension one") {
    const auto k1 = shell_fractions(1, 1, 1000);
    REQUIRE(k1.size() == 1);
    CHECK(k1[0].q == 1);
    CHECK(k1[0].a == std::vector<long long>{0});

    const auto k2 = shell_fractions(1, 2, 1000);
    REQUIRE(k2.size() == 3);
    CHECK(k2[0].q == 2);
    CHECK(k2[0].a == std::vector<long long>{1});
    CHECK(k2[1].q == 3);
    CHECK(k2[1].a == std::vector<long long>{1});
    CHECK(k2[2].q == 3);
    CHECK(k2[2].a == std::vector<long long>{2});
}

TEST_CASE("shell enumeration with joint gcd in dimension two") {
    const auto k2 = shell_fractions(2, 2, 2);  // q = 2 only
    REQUIRE(k2.size() == 3);
    CHECK(k2[0].a == std::vector<long long>{0, 1});
    CHECK(k2[1].a == std::vector<long long>{1, 0});
    CHECK(k2[2].a == std::vector<long long>{1, 1});
}

TEST_CASE("weyl decay fit reproduces the squares and rejects non-(C) maps") {
    const auto fit = weyl_decay_fit(t2_map(), 120);
    for (const auto& row : fit.rows) {
        if (row.q < 3 || row.q % 2 == 0) continue;
        bool prime = true;
        for (long long d = 3; d * d <= row.q; d += 2)
            if (row.q % d == 0) prime = false;
        if (!prime) continue;
        CHECK(std::abs(row.max_modulus - 1.0 / std::sqrt(static_cast<double>(row.q))) < 1e-10);
    }
    CHECK(fit.ls_slope < -0.4);

    const PolynomialMap bad(1, 1, {{{3}, {2}}});
    CHECK_THROWS_AS(weyl_decay_fit(bad, 50), std::invalid_argument);
}

TEST_CASE("weyl decay fit for the planar curve") {
    const auto fit = weyl_decay_fit(fixture_map("curve_2"), 200);
    CHECK(fit.ls_slope <= -0.5 + 0.05);
}

TEST_CASE("oscillatory integral: odd symmetry and the mass ceiling") {
    const auto kernel = make_kernel("one_over_y");
    const auto bump = smooth_bump();
    double eta = 0.0;
    const auto v0 = phi(t3_map(), kernel, bump, 5, std::span<const double>(&eta, 1));
    CHECK(std::abs(v0.value) < 1e-12);

    const double mass = integral_abs_kj(kernel, bump, 5);
    Rng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        eta = rng.next_signed_unit() * 1e-4;
        const auto v = phi(t3_map(), kernel, bump, 5, std::span<const double>(&eta, 1));
        CHECK(std::abs(v.value) <= mass + 1e-9);
    }
}

TEST_CASE("oscillatory integral agrees with a fine fixed-step oracle") {
    const auto kernel = make_kernel("one_over_y");
    const auto bump = smooth_bump();
    const double eta = std::ldexp(1.0, -18);
    const auto fast = phi(t3_map(), kernel, bump, 6, std::span<const double>(&eta, 1));
    // brute-force midpoint rule at 4x the phase-rule resolution
    const double r_lo = 32.0, r_hi = 128.0;
    const long long cells = 1 << 21;
    const double h = (r_hi - r_lo) / static_cast<double>(cells);
    KahanCSum acc;
    for (long long c = 0; c < cells; ++c) {
        const double t = r_lo + (static_cast<double>(c) + 0.5) * h;
        for (double sgn : {1.0, -1.0}) {
            const double y[1] = {sgn * t};
            const double kj = kj_eval(kernel, bump, 6, y);
            const double ph = 2 * std::numbers::pi * (sgn * t) * (sgn * t) * (sgn * t) * eta;
            acc.add(kj * h * cplx(std::cos(ph), std::sin(ph)));
        }
    }
    CHECK(std::abs(fast.value - acc.value()) < 1e-7);
    CHECK(fast.error_estimate < 1e-8);
}

TEST_CASE("phi ladder equals pointwise evaluation") {
    const auto kernel = make_kernel("one_over_y");
    const auto bump = smooth_bump();
    const double eta0 = -3.0 * std::ldexp(1.0, -12);
    const double step = std::ldexp(1.0, -12);
    const auto ladder = phi_ladder(t3_map(), kernel, bump, 5, std::span<const double>(&eta0, 1),
                                   std::span<const double>(&step, 1), 7);
    for (long long i = 0; i < 7; ++i) {
        const double eta = eta0 + static_cast<double>(i) * step;
        const auto single = phi(t3_map(), kernel, bump, 5, std::span<const double>(&eta, 1));
        CHECK(std::abs(ladder[static_cast<std::size_t>(i)] - single.value) < 1e-7);
    }
}

TEST_CASE("m_j: symmetry, periodicity, ceiling and the dual space route") {
    const auto kernel = make_kernel("one_over_y");
    const auto bump = smooth_bump();
    const long long j = 4;
    const long long grid = alias_free_grid(t3_map(), kernel, bump, j);
    const auto m = multiplier_mj(t3_map(), kernel, bump, j, grid);

    // odd kernel and odd map: m_j(0) = 0
    CHECK(std::abs(m.samples[0]) < 1e-14);

    // triangle ceiling sum |K_j|
    const auto table = build_annulus_table(kernel, bump, j);
    CHECK(m.sup_abs() <= table.l1() + 1e-12);

    // periodicity is exact: metadata evaluation at xi and xi + 1
    const double xi = 0.34567;
    const double xi_shift = xi + 1.0;
    CHECK(std::abs(m.eval_exact(std::span<const double>(&xi, 1)) -
                   m.eval_exact(std::span<const double>(&xi_shift, 1))) < 1e-12);

    // direct summation route agrees at random nodes
    Rng rng(13);
    for (int trial = 0; trial < 25; ++trial) {
        const long long t = static_cast<long long>(rng.next_below(static_cast<std::uint64_t>(grid)));
        const double node = static_cast<double>(t) / static_cast<double>(grid);
        const cplx direct = mj_point(t3_map(), kernel, bump, j, std::span<const double>(&node, 1));
        CHECK(std::abs(direct - m.samples[static_cast<std::size_t>(t)]) < 1e-10);
    }
}

TEST_CASE("inverse transform of m_j is the annulus pushforward") {
    const auto kernel = make_kernel("one_over_y");
    const auto bump = smooth_bump();
    const long long j = 3;
    const long long grid = alias_free_grid(t3_map(), kernel, bump, j);
    const auto m = multiplier_mj(t3_map(), kernel, bump, j, grid);
    bool aliased = true;
    const auto k = idft(m, default_idft_box(m), &aliased);
    CHECK_FALSE(aliased);

    // oracle: direct annulus enumeration of sum_{P(y) = -x} K_j(y)
    const auto table = build_annulus_table(kernel, bump, j);
    LatticeFunction oracle(default_idft_box(m));
    for (std::size_t i = 0; i < table.points.size(); ++i) {
        const auto p = evaluate(t3_map(), table.points[i]);
        const long long x[] = {-p[0]};
        oracle.ref(x) += table.weights[i];
    }
    for (std::size_t i = 0; i < oracle.size(); ++i)
        CHECK(std::abs(oracle[i] - k[i]) < 1e-12);
}

TEST_CASE("major arc membership at pinned points") {
    const ArcParameters params(0.1, 0.01, ArcRegime::exploratory);
    const ReducedFraction third(3, {1});
    const double exact = 1.0 / 3.0;
    CHECK(major_arc_contains(t3_map(), params, 10, third, std::span<const double>(&exact, 1)));

    // widths at j = 10, delta = 0.1: 2^{-21}
    const double inside = 1.0 / 3.0 + std::ldexp(1.0, -22);
    CHECK(major_arc_contains(t3_map(), params, 10, third, std::span<const double>(&inside, 1)));
    const double outside = 1.0 / 3.0 + std::ldexp(1.0, -19);
    CHECK_FALSE(major_arc_contains(t3_map(), params, 10, third, std::span<const double>(&outside, 1)));

    // distance wraps modulo one
    const double wrapped = 1.0 / 3.0 + 1.0 + std::ldexp(1.0, -22);
    CHECK(major_arc_contains(t3_map(), params, 10, third, std::span<const double>(&wrapped, 1)));
}

TEST_CASE("main term: on-arc value is S(a/q) Phi_j, empty k-range vanishes") {
    const auto kernel = make_kernel("one_over_y");
    const auto bump = smooth_bump();
    const ArcParameters params(0.5, 0.25, ArcRegime::exploratory);
    const long long j = 4;
    const long long grid = 4096;

    const auto l = main_term(t3_map(), kernel, bump, params, j, MainTermVariant::Lj(), grid);
    // node inside the q = 1 arc: |xi| <= 2^{-(2 + 0.5) 4} = 2^{-10}
    const long long node = 2;  // xi = 2/4096 = 2^{-11}
    const double eta = static_cast<double>(node) / static_cast<double>(grid);
    const cplx expected = weyl_sum(t3_map(), ReducedFraction::zero(1)) *
                          phi(t3_map(), kernel, bump, j, std::span<const double>(&eta, 1)).value;
    CHECK(std::abs(l.samples[static_cast<std::size_t>(node)] - expected) < 1e-7);

    // j delta' < 1: identically zero
    const ArcParameters tiny(0.3, 0.02, ArcRegime::exploratory);
    const auto empty = main_term(t3_map(), kernel, bump, tiny, 10, MainTermVariant::Lj(), 1024);
    for (const auto& v : empty.samples) CHECK(v == cplx{0, 0});
}

TEST_CASE("main term: single shell support is contained in the chi_k windows") {
    const auto kernel = make_kernel("one_over_y");
    const auto bump = smooth_bump();
    const ArcParameters params(0.5, 0.25, ArcRegime::exploratory);
    const long long grid = 4096;
    const auto l1 = main_term(t3_map(), kernel, bump, params, 4, MainTermVariant::Ljk(1), grid);
    for (long long t = 0; t < grid; ++t) {
        const double xi = static_cast<double>(t) / static_cast<double>(grid);
        const double dist = std::min(xi, 1.0 - xi);  // distance to the only shell-1 fraction 0/1
        if (dist > 2.0 * std::ldexp(1.0, -10))
            CHECK(std::abs(l1.samples[static_cast<std::size_t>(t)]) == 0.0);
    }
}

TEST_CASE("shell tail accumulates the admitted scales") {
    const auto kernel = make_kernel("one_over_y");
    const auto bump = smooth_bump();
    const ArcParameters params(0.5, 0.3, ArcRegime::exploratory);
    // k = 1: j >= ceil(1/0.3) = 4; truncate at 5
    const auto tail =
        main_term(t3_map(), kernel, bump, params, 0, MainTermVariant::Lk_tail(1, 5), 32768);
    const auto l4 = main_term(t3_map(), kernel, bump, params, 4, MainTermVariant::Ljk(1), 32768);
    const auto l5 = main_term(t3_map(), kernel, bump, params, 5, MainTermVariant::Ljk(1), 32768);
    for (std::size_t i = 0; i < tail.samples.size(); ++i)
        CHECK(std::abs(tail.samples[i] - l4.samples[i] - l5.samples[i]) < 1e-12);
}

TEST_CASE("error term: empty main term means E_j = m_j on any grid") {
    const auto kernel = make_kernel("one_over_y");
    const auto bump = smooth_bump();
    const ArcParameters params(0.3, 0.02, ArcRegime::exploratory);
    const auto res = error_term(t3_map(), kernel, bump, params, 5, 2048);
    CHECK(res.l_term_empty);
    for (std::size_t i = 0; i < res.error.samples.size(); ++i)
        CHECK(res.error.samples[i] == res.multiplier.samples[i]);
    CHECK(res.sup_norm <= res.multiplier.sup_abs() + 1e-15);
}

TEST_CASE("error term enforces arc-resolving grids when L_j is active") {
    const auto kernel = make_kernel("one_over_y");
    const auto bump = smooth_bump();
    const ArcParameters params(0.5, 0.25, ArcRegime::exploratory);
    CHECK_THROWS_AS(error_term(t3_map(), kernel, bump, params, 5, 1024), std::invalid_argument);

    const auto res = error_term(t3_map(), kernel, bump, params, 4, 4096);
    CHECK_FALSE(res.l_term_empty);
    const auto l = main_term(t3_map(), kernel, bump, params, 4, MainTermVariant::Lj(), 4096);
    CHECK(res.sup_norm <= res.multiplier.sup_abs() + l.sup_abs() + 1e-12);
    // identity m = L + E holds exactly by construction; check against the
    // independently sampled trig polynomial route
    const auto m_fft = multiplier_mj(t3_map(), kernel, bump, 4, 4096);
    for (std::size_t i = 0; i < m_fft.samples.size(); ++i)
        CHECK(std::abs(m_fft.samples[i] - l.samples[i] - res.error.samples[i]) < 1e-12);
}

TEST_CASE("approximation error: vanishing pair at the origin and ceilings") {
    const auto kernel = make_kernel("one_over_y");
    const auto bump = smooth_bump();
    const ArcParameters params(0.3, 0.02, ArcRegime::exploratory);
    const auto frac = ReducedFraction::zero(1);

    const auto rep =
        approximation_error(t3_map(), kernel, bump, params, 6, frac, {{0.0}});
    CHECK(rep.max_deviation < 1e-7);  // both sides vanish for odd data

    CHECK_THROWS_AS(
        approximation_error(t3_map(), kernel, bump, params, 6, frac, {{0.25}}),
        std::invalid_argument);  // far outside the arc

    // |S Phi_j| ceiling at arc samples
    const double w = major_arc_halfwidth(t3_map(), params, 6, 0);
    const double mass = integral_abs_kj(kernel, bump, 6);
    const cplx s = weyl_sum(t3_map(), frac);
    for (double c : {-1.0, 0.5, 1.0}) {
        const double eta = c * w;
        const auto v = phi(t3_map(), kernel, bump, 6, std::span<const double>(&eta, 1));
        CHECK(std::abs(s * v.value) <= mass + 1e-9);
    }
}

TEST_CASE("off-arc oscillatory moduli respect the van der Corput band") {
    const auto kernel = make_kernel("one_over_y");
    const auto bump = smooth_bump();
    const ArcParameters params(0.3, 0.02, ArcRegime::exploratory);
    const auto frac = ReducedFraction::zero(1);
    const double mass_ceiling = integral_abs_kj(kernel, bump, 6);

    // pure cubic phase: no stationary point on the annulus, so the moduli sit
    // far below the reference; the band is one-sided
    for (long long j = 6; j <= 12; ++j) {
        const double w = major_arc_halfwidth(t3_map(), params, j, 0);
        std::vector<std::vector<double>> offsets;
        for (double c : {1.5, 2.0, 3.0, 4.0, 6.0, 8.0}) offsets.push_back({c * w});
        const auto rep = off_arc_phi_report(t3_map(), kernel, bump, params, j, frac, offsets);
        CHECK(rep.max_modulus <= mass_ceiling + 1e-9);
        CHECK(rep.ratio >= 0.0);
        CHECK(rep.ratio <= 100.0);
    }

    // planar curve (t, t^3): opposite-sign components place a stationary point
    // inside the annulus, so the reference rate is nearly attained and the
    // recorded ratios stay in a genuine two-sided band
    const auto curve = fixture_map("curve_3");
    const auto frac2 = ReducedFraction::zero(2);
    std::vector<double> ratios;
    for (long long j = 4; j <= 7; ++j) {
        const double w2 = major_arc_halfwidth(curve, params, j, 1);
        const double eta2 = 2.0 * w2;
        const double tstar = 1.2 * std::ldexp(1.0, static_cast<int>(j));
        const double eta1 = -3.0 * eta2 * tstar * tstar;
        const auto rep =
            off_arc_phi_report(curve, kernel, bump, params, j, frac2, {{eta1, eta2}});
        CHECK(rep.ratio <= 100.0);
        ratios.push_back(rep.ratio);
    }
    const double lo = *std::min_element(ratios.begin(), ratios.end());
    const double hi = *std::max_element(ratios.begin(), ratios.end());
    CHECK(lo > 0.0);
    CHECK(hi / lo < 100.0);

    // samples inside the arc are rejected
    const double w6 = major_arc_halfwidth(t3_map(), params, 6, 0);
    CHECK_THROWS_AS(
        off_arc_phi_report(t3_map(), kernel, bump, params, 6, frac, {{0.5 * w6}}),
        std::invalid_argument);
}

TEST_CASE("minor arc kernel: band-limited case matches the pushforward oracle") {
    const auto kernel = make_kernel("one_over_y");
    const auto bump = smooth_bump();
    const ArcParameters params(0.3, 0.02, ArcRegime::exploratory);
    const long long j = 3;
    const long long grid = alias_free_grid(t3_map(), kernel, bump, j);
    const auto res = minor_arc_kernel(t3_map(), kernel, bump, params, j, grid, 64.0);
    CHECK(res.refinement_converged);

    const auto table = build_annulus_table(kernel, bump, j);
    LatticeFunction oracle(res.kernel.box());
    for (std::size_t i = 0; i < table.points.size(); ++i) {
        const auto p = evaluate(t3_map(), table.points[i]);
        const long long x[] = {-p[0]};
        if (oracle.box().contains(x)) oracle.ref(x) += table.weights[i];
    }
    for (std::size_t i = 0; i < oracle.size(); ++i)
        CHECK(std::abs(oracle[i] - res.kernel[i]) < 1e-12);

    // zero-frequency consistency: sum over the inverse equals E_j(0)
    const auto err = error_term(t3_map(), kernel, bump, params, j, grid);
    CHECK(std::abs(res.zero_frequency_sum - err.error.samples[0]) < 1e-8);
}

TEST_CASE("minor arc kernel tails vanish inside Q_* and stay dominated") {
    const auto kernel = make_kernel("one_over_y");
    const auto bump = smooth_bump();
    const ArcParameters params(0.3, 0.02, ArcRegime::exploratory);
    double prev = std::numeric_limits<double>::infinity();
    for (long long j = 3; j <= 5; ++j) {
        const long long grid = alias_free_grid(t3_map(), kernel, bump, j);
        const auto res = minor_arc_kernel(t3_map(), kernel, bump, params, j, grid,
                                          std::pow(2.0, static_cast<double>(j + 1)));
        // Q_* = {rho <= 2^{(D+1)j}} swallows the whole reachable lattice at desk scale
        CHECK(res.tail_l1 <= std::pow(2.0, -static_cast<double>(j)));
        CHECK(res.tail_l1 <= prev + 1e-15);
        prev = res.tail_l1;
    }
}

TEST_CASE("rational parsing stays exact") {
    CHECK(Rational::parse("0.06") == Rational(3, 50));
    CHECK(Rational::parse("-1/4") == Rational(-1, 4));
    CHECK(Rational::parse("2") == Rational(2));
    CHECK(Rational::parse("-0.125") == Rational(-1, 8));
    CHECK(Rational::parse("0.503") == Rational(503, 1000));
    CHECK((Rational(1, 2) + Rational(6, 100) / Rational(24)) == Rational(201, 400));
    CHECK_THROWS_AS(Rational(1, 0), std::invalid_argument);
    CHECK(Rational(-3, -6) == Rational(1, 2));  // sign normalization
}

TEST_CASE("proven region arithmetic is exact") {
    const RegionReport center = proven_region(t3_map(), Rational::parse("0.0001"), Rational(2),
                                              Rational(2));
    CHECK(center.in_omega_m);
    CHECK(center.major_condition_ok);
    CHECK(center.n_p == 12);

    // 1/r = 0.503 beyond the eps' = 0.06 boundary 1/2 + 0.06/24 = 0.5025
    const RegionReport off = proven_region(t3_map(), Rational::parse("0.06"),
                                           Rational(1000, 503), Rational(2));
    CHECK_FALSE(off.in_omega_m);

    // exactly on the boundary: strict inequality says outside
    const Rational eps(6, 100);
    const Rational boundary = Rational(1, 2) + eps / Rational(24);
    const RegionReport edge =
        proven_region(t3_map(), eps, boundary.inverse(), Rational(2));
    CHECK_FALSE(edge.in_omega_m);

    CHECK_THROWS_AS(proven_region(t3_map(), Rational(0), Rational(2), Rational(2)),
                    std::invalid_argument);
}

TEST_CASE("planar oscillatory integral and multiplier grids") {
    const PolynomialMap skew(2, 2, {{{1, 0}, {1, 0}}, {{1, 1}, {0, 1}}});
    const auto kernel = make_kernel("riesz_component(1)", 2);
    const auto bump = smooth_bump();

    // odd-in-y1 kernel with P odd in y1: the eta = 0 integral cancels
    const std::vector<double> zero{0.0, 0.0};
    const auto v0 = phi(skew, kernel, bump, 2, zero);
    CHECK(std::abs(v0.value) < 1e-9);

    // mass ceiling for a nonzero frequency
    const std::vector<double> eta{1e-3, -2e-3};
    const auto v = phi(skew, kernel, bump, 2, eta);
    CHECK(std::abs(v.value) <= integral_abs_kj(kernel, bump, 2) + 1e-8);

    // two-dimensional multiplier grid: FFT route against direct summation
    const long long grid = alias_free_grid(skew, kernel, bump, 2);
    const auto m = multiplier_mj(skew, kernel, bump, 2, grid);
    Rng rng(71);
    for (int trial = 0; trial < 10; ++trial) {
        const long long t0 = static_cast<long long>(rng.next_below(static_cast<std::uint64_t>(grid)));
        const long long t1 = static_cast<long long>(rng.next_below(static_cast<std::uint64_t>(grid)));
        const std::vector<double> xi{static_cast<double>(t0) / static_cast<double>(grid),
                                     static_cast<double>(t1) / static_cast<double>(grid)};
        const cplx direct = mj_point(skew, kernel, bump, 2, xi);
        const long long node[2] = {t0, t1};
        CHECK(std::abs(direct - m.at_node(node)) < 1e-10);
    }

    // periodicity through the exact metadata
    const std::vector<double> a{0.21, 0.73};
    const std::vector<double> b{1.21, -0.27};
    CHECK(std::abs(m.eval_exact(a) - m.eval_exact(b)) < 1e-12);
}

TEST_CASE("admitted major arcs are pairwise disjoint at desk parameters") {
    // exploratory window wide enough that shells k = 1..3 all enter
    const ArcParameters params(0.9, 0.5, ArcRegime::exploratory);
    const long long j = 6;  // q <= 2^{delta' j} = 8
    std::vector<ReducedFraction> admitted;
    for (long long k = 1; k <= 3; ++k)
        for (const auto& f : shell_fractions(1, k, 8)) admitted.push_back(f);
    const double halfwidth = major_arc_halfwidth(t3_map(), params, j, 0);
    for (std::size_t a = 0; a < admitted.size(); ++a) {
        for (std::size_t b = a + 1; b < admitted.size(); ++b) {
            double gap = std::abs(static_cast<double>(admitted[a].a[0]) / admitted[a].q -
                                  static_cast<double>(admitted[b].a[0]) / admitted[b].q);
            gap = std::min(gap, 1.0 - gap);
            CHECK(gap > 2.0 * halfwidth);
        }
    }
}

TEST_CASE("mj budget guard names the cardinality") {
    const auto kernel = make_kernel("one_over_y");
    const auto bump = smooth_bump();
    // j large enough that the annulus blows the table budget
    CHECK_THROWS_AS(build_annulus_table(kernel, bump, 40), std::runtime_error);
}
