#include "radonlab/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "radonlab/lattice_fn.hpp"

namespace radonlab {

double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

double theta_profile(double r) { return smooth_step(2.0 - std::abs(r)); }

double psi_radial(double r) { return theta_profile(r) - theta_profile(2.0 * r); }

namespace {
double norm2(std::span<const double> x) {
    double s = 0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}
}  // namespace

double psi(std::span<const double> x) { return psi_radial(norm2(x)); }

double BumpProfile::eval(std::span<const double> x) const { return radial(norm2(x)); }

BumpProfile smooth_bump() { return BumpProfile{}; }

BumpProfile flat_bump(double r_lo, double r_hi) {
    BumpProfile b;
    b.radial = [r_lo, r_hi](double r) {
        const double a = std::abs(r);
        return (a >= r_lo && a <= r_hi) ? 1.0 : 0.0;
    };
    b.smooth = false;
    return b;
}

double kj_eval(const CZKernel& kernel, const BumpProfile& bump, long long j,
               std::span<const double> y) {
    const double r = norm2(y);
    if (r == 0.0) throw std::invalid_argument("kj_eval: y = 0 is outside the kernel domain");
    const double scale = std::ldexp(1.0, static_cast<int>(-j));
    std::vector<double> scaled(y.begin(), y.end());
    for (double& v : scaled) v *= scale;
    const double cutoff = bump.eval(scaled);
    if (cutoff == 0.0) return 0.0;
    return cutoff * kernel.eval(y);
}

CZBoundsReport verify_cz_bounds(const CZKernel& kernel, int sample_budget) {
    CZBoundsReport report;
    const int d = kernel.dim;
    const int radii = std::max(8, sample_budget / (d == 1 ? 2 : 64));
    const int dirs = d == 1 ? 2 : 64;

    std::vector<double> y(d);
    for (int ir = 0; ir < radii; ++ir) {
        // log-spaced radii 1 .. 2^20
        const double r = std::pow(2.0, 20.0 * ir / (radii - 1.0));
        for (int id = 0; id < dirs; ++id) {
            if (d == 1) {
                y[0] = id == 0 ? r : -r;
            } else {
                const double ang = 2.0 * std::numbers::pi * id / dirs;
                y[0] = r * std::cos(ang);
                y[1] = r * std::sin(ang);
            }
            const double k = kernel.eval(y);
            const auto g = kernel.grad(y);
            const double gn = norm2(g);
            const double value = std::pow(r, d) * std::abs(k) + std::pow(r, d + 1) * gn;
            if (value > report.size_gradient_max) {
                report.size_gradient_max = value;
                report.size_gradient_argmax = y;
            }
        }
    }

    // cancellation sup_{lambda>=1} |int_{1<=|y|<=lambda} K| on a lambda ladder
    const int lambda_steps = 48;
    double acc = 0.0;
    double prev_lambda = 1.0;
    for (int il = 1; il <= lambda_steps; ++il) {
        const double lambda = std::pow(2.0, 12.0 * il / lambda_steps);
        const int cells = 2048;
        if (d == 1) {
            KahanSum shell;
            const double h = (lambda - prev_lambda) / cells;
            for (int c = 0; c < cells; ++c) {
                const double t = prev_lambda + (c + 0.5) * h;
                y[0] = t;
                shell.add(kernel.eval(y) * h);
                y[0] = -t;
                shell.add(kernel.eval(y) * h);
            }
            acc += shell.sum;
        } else {
            KahanSum shell;
            const double hr = (lambda - prev_lambda) / 256;
            const int na = 512;
            for (int c = 0; c < 256; ++c) {
                const double t = prev_lambda + (c + 0.5) * hr;
                for (int ia = 0; ia < na; ++ia) {
                    const double ang = 2.0 * std::numbers::pi * (ia + 0.5) / na;
                    y[0] = t * std::cos(ang);
                    y[1] = t * std::sin(ang);
                    shell.add(kernel.eval(y) * t * hr * (2.0 * std::numbers::pi / na));
                }
            }
            acc += shell.sum;
        }
        if (std::abs(acc) > report.cancellation_max) {
            report.cancellation_max = std::abs(acc);
            report.cancellation_lambda = lambda;
        }
        prev_lambda = lambda;
    }

    report.rescale_needed = report.size_gradient_max > 1.0 ? 1.0 / report.size_gradient_max : 1.0;
    return report;
}

namespace {

CZKernel one_over_y_kernel() {
    // K(y) = 1/y has |y||K| + |y|^2|K'| = 2; rescale by 1/2 to meet the unit bound.
    CZKernel k;
    k.dim = 1;
    k.normalization = 0.5;
    k.descriptor = "one_over_y (rescaled by 1/2): K(y) = 1/(2y)";
    k.eval = [](std::span<const double> y) { return 0.5 / y[0]; };
    k.grad = [](std::span<const double> y) {
        return std::vector<double>{-0.5 / (y[0] * y[0])};
    };
    return k;
}

CZKernel sign_power_kernel(double p) {
    if (p < 1.0) throw std::invalid_argument("sign_y_over_abs_pow: exponent must be >= 1");
    // K(y) = sign(y)/|y|^p; size+gradient peak is 1 + p at |y| = 1.
    const double c = 1.0 / (1.0 + p);
    CZKernel k;
    k.dim = 1;
    k.normalization = c;
    k.descriptor = "sign_y_over_abs_pow(" + std::to_string(p) + ") rescaled by 1/(1+p)";
    k.eval = [p, c](std::span<const double> y) {
        const double a = std::abs(y[0]);
        return c * (y[0] > 0 ? 1.0 : -1.0) / std::pow(a, p);
    };
    k.grad = [p, c](std::span<const double> y) {
        const double a = std::abs(y[0]);
        return std::vector<double>{-c * p / std::pow(a, p + 1.0)};
    };
    return k;
}

CZKernel riesz_kernel(int component, int dim) {
    if (dim < 1) throw std::invalid_argument("riesz_component: dimension must be >= 1");
    if (component < 1 || component > dim)
        throw std::invalid_argument("riesz_component: component out of range");
    // K(y) = y_i/|y|^{d+1}; size+gradient peak is 1 + d on the i-th axis.
    const double c = 1.0 / (1.0 + dim);
    CZKernel k;
    k.dim = dim;
    k.normalization = c;
    k.descriptor = "riesz_component(" + std::to_string(component) + ") in d=" +
                   std::to_string(dim) + " rescaled by 1/(1+d)";
    const int i = component - 1;
    k.eval = [i, dim, c](std::span<const double> y) {
        double r2 = 0;
        for (double v : y) r2 += v * v;
        return c * y[i] / std::pow(r2, 0.5 * (dim + 1));
    };
    k.grad = [i, dim, c](std::span<const double> y) {
        double r2 = 0;
        for (double v : y) r2 += v * v;
        const double rp = std::pow(r2, 0.5 * (dim + 1));
        std::vector<double> g(y.size());
        for (std::size_t l = 0; l < y.size(); ++l) {
            g[l] = -c * (dim + 1) * y[i] * y[l] / (rp * r2);
            if (static_cast<int>(l) == i) g[l] += c / rp;
        }
        return g;
    };
    return k;
}

}  // namespace

CZKernel make_kernel(const std::string& spec, int dim) {
    const auto open = spec.find('(');
    std::string name = spec.substr(0, open);
    double arg = 0;
    bool has_arg = false;
    if (open != std::string::npos) {
        const auto close = spec.find(')', open);
        if (close == std::string::npos) throw std::invalid_argument("kernel spec: missing ')'");
        arg = std::stod(spec.substr(open + 1, close - open - 1));
        has_arg = true;
    }
    if (name == "one_over_y") return one_over_y_kernel();
    if (name == "sign_y_over_abs_pow") return sign_power_kernel(has_arg ? arg : 1.0);
    if (name == "riesz_component") return riesz_kernel(has_arg ? static_cast<int>(arg) : 1, dim);
    throw std::invalid_argument("unknown kernel: " + spec);
}

std::vector<std::string> kernel_registry_names() {
    return {"one_over_y", "sign_y_over_abs_pow(p)", "riesz_component(i)"};
}

double AnnulusTable::l1() const {
    KahanSum s;
    for (double w : weights) s.add(std::abs(w));
    return s.sum;
}

AnnulusTable build_annulus_table(const CZKernel& kernel, const BumpProfile& bump, long long j) {
    if (j < 0) throw std::invalid_argument("build_annulus_table: j must be >= 0");
    AnnulusTable table;
    table.j = j;
    const double r_lo = std::ldexp(1.0, static_cast<int>(j - 1));
    const double r_hi = std::ldexp(1.0, static_cast<int>(j + 1));
    const long long bound = static_cast<long long>(std::ceil(r_hi));
    const int d = kernel.dim;
    if (d > 2) throw std::invalid_argument("build_annulus_table: d <= 2 only");
    const double budget = d == 1 ? 2.0 * bound : 4.0 * static_cast<double>(bound) * bound;
    if (budget > 5.0e7)
        throw std::runtime_error("build_annulus_table: annulus holds about " +
                                    std::to_string(static_cast<long long>(budget)) +
                                    " lattice points, beyond the 5e7 budget");

    std::vector<long long> y(d);
    std::vector<double> yr(d);
    const auto visit = [&]() {
        double r2 = 0;
        for (int i = 0; i < d; ++i) {
            yr[i] = static_cast<double>(y[i]);
            r2 += yr[i] * yr[i];
        }
        const double r = std::sqrt(r2);
        if (r < r_lo || r > r_hi || r == 0.0) return;
        const double w = kj_eval(kernel, bump, j, yr);
        if (w != 0.0) {
            table.points.push_back(y);
            table.weights.push_back(w);
        }
    };
    if (d == 1) {
        for (long long t = -bound; t <= bound; ++t) {
            y[0] = t;
            visit();
        }
    } else {
        for (long long a = -bound; a <= bound; ++a)
            for (long long b = -bound; b <= bound; ++b) {
                y[0] = a;
                y[1] = b;
                visit();
            }
    }
    return table;
}

double integral_abs_kj(const CZKernel& kernel, const BumpProfile& bump, long long j,
                       int cells_per_axis) {
    const double r_lo = std::ldexp(1.0, static_cast<int>(j - 1));
    const double r_hi = std::ldexp(1.0, static_cast<int>(j + 1));
    const int d = kernel.dim;
    std::vector<double> y(d);
    if (d == 1) {
        KahanSum acc;
        const double h = (r_hi - r_lo) / cells_per_axis;
        for (int c = 0; c < cells_per_axis; ++c) {
            const double t = r_lo + (c + 0.5) * h;
            y[0] = t;
            acc.add(std::abs(kj_eval(kernel, bump, j, y)) * h);
            y[0] = -t;
            acc.add(std::abs(kj_eval(kernel, bump, j, y)) * h);
        }
        return acc.sum;
    }
    if (d == 2) {
        KahanSum acc;
        const int nr = std::max(64, cells_per_axis / 8);
        const int na = std::max(256, cells_per_axis / 4);
        const double hr = (r_hi - r_lo) / nr;
        for (int c = 0; c < nr; ++c) {
            const double t = r_lo + (c + 0.5) * hr;
            for (int ia = 0; ia < na; ++ia) {
                const double ang = 2.0 * std::numbers::pi * (ia + 0.5) / na;
                y[0] = t * std::cos(ang);
                y[1] = t * std::sin(ang);
                acc.add(std::abs(kj_eval(kernel, bump, j, y)) * t * hr *
                        (2.0 * std::numbers::pi / na));
            }
        }
        return acc.sum;
    }
    throw std::invalid_argument("integral_abs_kj: d <= 2 only");
}

}  // namespace radonlab
