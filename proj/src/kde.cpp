#include "treeclust/kde.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "treeclust/util.hpp"

namespace treeclust {

double unit_ball_volume(int d) {
    if (d < 1) throw std::invalid_argument("unit_ball_volume: d must be >= 1");
    return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

namespace {

// Legendre polynomial values P_0..P_m at u (three-term recurrence).
void legendre_all(int m, double u, std::vector<double>& out) {
    out.resize(m + 1);
    out[0] = 1.0;
    if (m >= 1) out[1] = u;
    for (int k = 2; k <= m; ++k) out[k] = ((2 * k - 1) * u * out[k - 1] - (k - 1) * out[k - 2]) / k;
}

// 64-point Gauss-Legendre nodes/weights on [-1,1], by Newton iteration.
struct GaussLegendre64 {
    std::array<double, 64> node{}, weight{};
    GaussLegendre64() {
        constexpr int n = 64;
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                pp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / pp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            node[i] = -x;
            node[n - 1 - i] = x;
            double w = 2.0 / ((1.0 - x * x) * pp * pp);
            weight[i] = w;
            weight[n - 1 - i] = w;
        }
    }
};

const GaussLegendre64& gl64() {
    static const GaussLegendre64 rule;
    return rule;
}

// Composite quadrature of f over [-1,1], one 64-node panel per unit interval.
template <typename F>
double integrate_unit_support(F&& f) {
    const auto& rule = gl64();
    double total = 0.0;
    for (double a : {-1.0, 0.0}) {
        for (int i = 0; i < 64; ++i) {
            double u = a + 0.5 * (rule.node[i] + 1.0);
            total += 0.5 * rule.weight[i] * f(u);
        }
    }
    return total;
}

}  // namespace

Kernel Kernel::spherical(int d) {
    if (d < 1) throw std::invalid_argument("Kernel: d must be >= 1");
    Kernel k;
    k.spherical_ = true;
    k.ell_ = 1;
    k.dim_ = d;
    return k;
}

Kernel Kernel::valid_order(int ell, int d) {
    if (ell < 1) throw std::invalid_argument("Kernel: order must be >= 1");
    if (d < 1) throw std::invalid_argument("Kernel: d must be >= 1");
    Kernel k;
    k.spherical_ = false;
    k.ell_ = ell;
    k.dim_ = d;
    // K1(u) = sum_{m=0}^{ell} phi_m(0) phi_m(u) with phi_m the orthonormal
    // Legendre polynomials, i.e. coefficients P_m(0) (2m+1)/2 on P_m(u).
    std::vector<double> p0;
    legendre_all(ell, 0.0, p0);
    k.coeff_.resize(ell + 1);
    for (int m = 0; m <= ell; ++m) k.coeff_[m] = p0[m] * (2 * m + 1) / 2.0;

    for (int s = 0; s < ell; ++s) {
        double want = s == 0 ? 1.0 : 0.0;
        if (std::abs(k.moment_1d(s) - want) > 1e-8)
            throw std::runtime_error("Kernel: moment validation failed at order " + std::to_string(s));
    }
    return k;
}

double Kernel::eval1d(double u) const {
    if (spherical_) throw std::logic_error("Kernel: spherical kernel is not a product kernel");
    if (u < -1.0 || u > 1.0) return 0.0;
    double p0 = 1.0, p1 = u;
    double v = coeff_[0];
    if (ell_ >= 1) v += coeff_[1] * p1;
    for (int k = 2; k <= ell_; ++k) {
        double p2 = ((2 * k - 1) * u * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
        v += coeff_[k] * p2;
    }
    return v;
}

double Kernel::operator()(std::span<const double> u) const {
    if (spherical_) {
        double s = 0.0;
        for (double v : u) s += v * v;
        return s <= 1.0 ? 1.0 : 0.0;
    }
    double prod = 1.0;
    for (double v : u) {
        prod *= eval1d(v);
        if (prod == 0.0) return 0.0;
    }
    return prod;
}

double Kernel::gather_radius() const { return spherical_ ? 1.0 : std::sqrt(static_cast<double>(dim_)); }

double Kernel::normalizer() const { return spherical_ ? unit_ball_volume(dim_) : 1.0; }

double Kernel::moment_1d(int s) const {
    if (spherical_) {
        if (dim_ != 1) throw std::logic_error("Kernel: 1-d moment of a multivariate spherical kernel");
        return integrate_unit_support([&](double u) { return std::pow(u, s); });
    }
    return integrate_unit_support([&](double u) { return std::pow(u, s) * eval1d(u); });
}

double spherical_kde_at(const Dataset& ds, std::span<const double> x, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("spherical_kde_at: h must be positive");
    if (static_cast<int>(x.size()) != ds.dim())
        throw std::invalid_argument("spherical_kde_at: dimension mismatch");
    double h2 = h * h;
    long count = 0;
    for (int i = 0; i < ds.size(); ++i)
        if (squared_distance(ds.point(i), x) <= h2) ++count;
    int d = ds.dim();
    return static_cast<double>(count) /
           (static_cast<double>(ds.size()) * std::pow(h, d) * unit_ball_volume(d));
}

namespace {

double valid_kde_sorted(const Dataset& ds, const Kernel& kernel, std::span<const double> x, double h,
                        const std::vector<int>& candidates) {
    // Terms summed in ascending sample order so that sparse (index-backed) and
    // dense evaluations agree bit for bit; out-of-support terms are exact zeros.
    double sum = 0.0;
    std::vector<double> u(ds.dim());
    for (int i : candidates) {
        auto p = ds.point(i);
        for (int a = 0; a < ds.dim(); ++a) u[a] = (x[a] - p[a]) / h;
        sum += kernel(u);
    }
    return sum / (static_cast<double>(ds.size()) * std::pow(h, ds.dim()) * kernel.normalizer());
}

}  // namespace

double kde_at(const Dataset& ds, const Kernel& kernel, std::span<const double> x, double h) {
    if (kernel.dim() != ds.dim()) throw std::invalid_argument("kde_at: kernel dimension mismatch");
    if (kernel.is_spherical()) return spherical_kde_at(ds, x, h);
    if (!(h > 0.0)) throw std::invalid_argument("kde_at: h must be positive");
    if (static_cast<int>(x.size()) != ds.dim()) throw std::invalid_argument("kde_at: dimension mismatch");
    std::vector<int> all(ds.size());
    for (int i = 0; i < ds.size(); ++i) all[i] = i;
    return valid_kde_sorted(ds, kernel, x, h, all);
}

std::vector<double> kde_at_points(const Dataset& ds, const Kernel& kernel,
                                  const std::vector<double>& points, double h) {
    if (kernel.dim() != ds.dim()) throw std::invalid_argument("kde_at_points: kernel dimension mismatch");
    if (!(h > 0.0)) throw std::invalid_argument("kde_at_points: h must be positive");
    int d = ds.dim();
    if (points.size() % static_cast<std::size_t>(d) != 0)
        throw std::invalid_argument("kde_at_points: ragged point buffer");
    std::size_t m = points.size() / static_cast<std::size_t>(d);
    std::vector<double> out(m);

    NeighborIndex index(ds, h * kernel.gather_radius());
    double denom = static_cast<double>(ds.size()) * std::pow(h, d) * kernel.normalizer();

    if (kernel.is_spherical()) {
        parallel_for(m, [&](std::size_t j) {
            std::span<const double> x{points.data() + j * d, static_cast<std::size_t>(d)};
            std::vector<int> buf;
            index.within(x, buf);
            out[j] = static_cast<double>(buf.size()) / denom;
        });
        return out;
    }
    parallel_for(m, [&](std::size_t j) {
        std::span<const double> x{points.data() + j * d, static_cast<std::size_t>(d)};
        std::vector<int> buf;
        index.within(x, buf);
        out[j] = valid_kde_sorted(ds, kernel, x, h, buf);
    });
    return out;
}

DensityEstimate evaluate_density(const Dataset& ds, const Kernel& kernel, double h) {
    DensityEstimate est{&ds, kernel, h, kde_at_points(ds, kernel, ds.coords(), h)};
    return est;
}

double optimal_bandwidth(int n, int d, double alpha, double C) {
    if (n < 2) throw std::invalid_argument("optimal_bandwidth: n must be >= 2");
    return C * std::pow(std::log(static_cast<double>(n)) / n, 1.0 / (2.0 * alpha + d));
}

double ErrorBudget::variance_term() const {
    return C1 * (gamma + std::log(1.0 / h)) / std::sqrt(n * std::pow(h, d));
}

double ErrorBudget::bias_term() const { return C2 * std::pow(h, alpha); }

ErrorBudget error_budget(int n, double h, int d, double alpha, double L, double gamma, double C1,
                         double C2) {
    if (!(h > 0.0)) throw std::invalid_argument("error_budget: h must be positive");
    if (n * std::pow(h, d) < 1.0) throw std::domain_error("error_budget: requires n h^d >= 1");
    return ErrorBudget{n, h, d, alpha, L, gamma, C1, C2};
}

}  // namespace treeclust
