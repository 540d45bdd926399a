#pragma once

#include <span>
#include <vector>

#include "treeclust/geometry.hpp"

namespace treeclust {

/// Volume of the d-dimensional Euclidean unit ball, pi^{d/2} / Gamma(d/2 + 1).
double unit_ball_volume(int d);

/// Evaluation kernel for density estimation. Two kinds:
///  - spherical: indicator of the closed unit ball (value 1 inside, 0 outside);
///  - valid product kernel of order ell: K(x) = prod_j K1(x_j) with K1 built
///    from L2[-1,1]-orthonormal Legendre polynomials so that all moments of
///    order 1..ell-1 vanish. Supported on the cube [-1,1]^d; may be negative
///    for ell > 2.
class Kernel {
public:
    static Kernel spherical(int d);

    /// Builds the order-ell product kernel and validates the moment conditions
    /// by composite Gauss-Legendre quadrature (64 nodes per unit interval,
    /// tolerance 1e-8). Throws std::runtime_error when validation fails.
    static Kernel valid_order(int ell, int d);

    bool is_spherical() const { return spherical_; }
    int order() const { return ell_; }
    int dim() const { return dim_; }

    double eval1d(double u) const;
    double operator()(std::span<const double> u) const;

    /// Euclidean radius that contains the support: 1 for the ball, sqrt(d)
    /// for the cube.
    double gather_radius() const;

    /// Divisor that makes (1/(n h^d normalizer)) sum K((x-Xi)/h) a density:
    /// V_d for the spherical kernel, 1 for valid kernels.
    double normalizer() const;

    /// Raw 1-d moment int u^s K1(u) du computed by the construction-time
    /// quadrature rule (exposed for diagnostics and tests).
    double moment_1d(int s) const;

private:
    Kernel() = default;
    bool spherical_ = true;
    int ell_ = 1;
    int dim_ = 1;
    std::vector<double> coeff_;  // c_m for K1(u) = sum c_m P_m(u)
};

/// Spherical-kernel density estimate at x: |B(x,h) ∩ sample| / (n h^d V_d),
/// closed ball.
double spherical_kde_at(const Dataset& ds, std::span<const double> x, double h);

/// Kernel density estimate at x: (1/(n h^d)) sum_i K((x - X_i)/h), with the
/// extra V_d divisor for the spherical kernel so it coincides with
/// spherical_kde_at bit for bit.
double kde_at(const Dataset& ds, const Kernel& kernel, std::span<const double> x, double h);

/// Density estimate evaluated at every sample point.
struct DensityEstimate {
    const Dataset* dataset;
    Kernel kernel;
    double bandwidth;
    std::vector<double> values;  // p_hat(X_i)
};

DensityEstimate evaluate_density(const Dataset& ds, const Kernel& kernel, double h);

/// Values of the estimate at arbitrary evaluation points (row-major, same dim).
std::vector<double> kde_at_points(const Dataset& ds, const Kernel& kernel,
                                  const std::vector<double>& points, double h);

/// Bandwidth rule h = C (log n / n)^{1/(2 alpha + d)}.
double optimal_bandwidth(int n, int d, double alpha, double C);

/// Sup-norm error budget a_n = C1 (gamma + log(1/h)) / sqrt(n h^d) + C2 h^alpha.
struct ErrorBudget {
    int n;
    double h;
    int d;
    double alpha;
    double holder_L;
    double gamma;
    double C1;
    double C2;

    double variance_term() const;
    double bias_term() const;
    double a_n() const { return variance_term() + bias_term(); }
};

/// Requires n h^d >= 1; throws std::domain_error otherwise.
ErrorBudget error_budget(int n, double h, int d, double alpha, double L, double gamma, double C1,
                         double C2);

}  // namespace treeclust
