#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "treeclust/kde.hpp"

using namespace treeclust;
using doctest::Approx;

TEST_CASE("unit ball volumes") {
    CHECK(unit_ball_volume(1) == Approx(2.0).epsilon(1e-12));
    CHECK(unit_ball_volume(2) == Approx(std::numbers::pi).epsilon(1e-12));
    CHECK(unit_ball_volume(3) == Approx(4.0 * std::numbers::pi / 3.0).epsilon(1e-12));
}

TEST_CASE("spherical kde examples") {
    Dataset ds({0.0, 10.0}, 1);
    double x = 0.0;
    CHECK(spherical_kde_at(ds, {&x, 1}, 1.0) == Approx(0.25).epsilon(1e-15));

    Dataset one({0.0}, 1);
    double far = 5.0;
    CHECK(spherical_kde_at(one, {&far, 1}, 1.0) == 0.0);

    std::vector<double> bad{0.0, 0.0};
    CHECK_THROWS_AS(spherical_kde_at(one, bad, 1.0), std::invalid_argument);
}

TEST_CASE("spherical kde equals brute-force count") {
    Rng rng(555);
    Dataset ds = oracles::random_uniform(500, 2, rng);
    std::vector<double> x{0.5, 0.5};
    double h = 0.1;
    auto nb = oracles::neighbors_scan(ds, x, h);
    double want = static_cast<double>(nb.size()) / (500.0 * h * h * std::numbers::pi);
    CHECK(spherical_kde_at(ds, x, h) == Approx(want).epsilon(1e-14));
}

TEST_CASE("valid kernel construction") {
    SUBCASE("order 1 is the uniform kernel") {
        Kernel k = Kernel::valid_order(1, 1);
        CHECK(k.eval1d(0.0) == Approx(0.5).epsilon(1e-14));
        CHECK(k.eval1d(0.73) == Approx(0.5).epsilon(1e-14));
        CHECK(k.eval1d(1.5) == 0.0);
        CHECK(k.moment_1d(0) == Approx(1.0).epsilon(1e-13));
    }
    SUBCASE("order 2 moments via quadrature") {
        Kernel k = Kernel::valid_order(2, 1);
        CHECK(std::abs(k.moment_1d(0) - 1.0) < 1e-10);
        CHECK(std::abs(k.moment_1d(1)) < 1e-10);
        // K1(0) = 9/8 for this construction
        CHECK(k.eval1d(0.0) == Approx(9.0 / 8.0).epsilon(1e-12));
    }
    SUBCASE("order 4 in d=2: vanishing mixed moments, negative values") {
        Kernel k = Kernel::valid_order(4, 2);
        // int u1^2 K = m2 * m0 and int u1 u2 K = m1^2 by the product form
        CHECK(std::abs(k.moment_1d(2) * k.moment_1d(0)) < 1e-8);
        CHECK(std::abs(k.moment_1d(1) * k.moment_1d(1)) < 1e-8);
        // independent 2-d midpoint-grid oracle for the same moments
        int g = 400;
        double step = 2.0 / g, m20 = 0.0, m11 = 0.0, mmin = 1e300;
        for (int i = 0; i < g; ++i)
            for (int j = 0; j < g; ++j) {
                double u1 = -1.0 + (i + 0.5) * step, u2 = -1.0 + (j + 0.5) * step;
                std::vector<double> u{u1, u2};
                double v = k(u);
                m20 += u1 * u1 * v * step * step;
                m11 += u1 * u2 * v * step * step;
                mmin = std::min(mmin, v);
            }
        CHECK(std::abs(m20) < 1e-4);
        CHECK(std::abs(m11) < 1e-8);
        CHECK(mmin < 0.0);
    }
    SUBCASE("moment conditions for ell <= 6, d <= 3") {
        for (int ell = 1; ell <= 6; ++ell) {
            Kernel k = Kernel::valid_order(ell, 1);
            CHECK(std::abs(k.moment_1d(0) - 1.0) < 1e-8);
            for (int s = 1; s < ell; ++s) CHECK(std::abs(k.moment_1d(s)) < 1e-8);
            for (int d = 2; d <= 3; ++d) CHECK_NOTHROW(Kernel::valid_order(ell, d));
        }
    }
}

TEST_CASE("kde_at with spherical kernel matches spherical_kde_at bit for bit") {
    Rng rng(31);
    Dataset ds = oracles::random_uniform(200, 2, rng);
    Kernel k = Kernel::spherical(2);
    for (int t = 0; t < 25; ++t) {
        std::vector<double> x{rng.uniform(), rng.uniform()};
        double h = 0.05 + 0.3 * rng.uniform();
        double a = kde_at(ds, k, x, h);
        double b = spherical_kde_at(ds, x, h);
        CHECK(a == b);
    }
    // batch evaluation at the sample points agrees exactly too
    auto est = evaluate_density(ds, k, 0.15);
    for (int i = 0; i < ds.size(); ++i) CHECK(est.values[i] == spherical_kde_at(ds, ds.point(i), 0.15));
}

TEST_CASE("kde_at single-term example and batch agreement for valid kernels") {
    Dataset one({0.0}, 1);
    Kernel k = Kernel::valid_order(2, 1);
    double x = 0.0;
    CHECK(kde_at(one, k, {&x, 1}, 1.0) == Approx(9.0 / 8.0).epsilon(1e-12));

    Rng rng(77);
    Dataset ds = oracles::random_uniform(300, 1, rng);
    auto est = evaluate_density(ds, k, 0.2);
    for (int i = 0; i < ds.size(); i += 17) CHECK(est.values[i] == kde_at(ds, k, ds.point(i), 0.2));
}

TEST_CASE("valid kernel kde near the true gaussian density at 0") {
    // mean over 20 seeds of p_hat(0) for N(0,1) samples, order-2 kernel
    Kernel k = Kernel::valid_order(2, 1);
    double total = 0.0;
    int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        Rng rng(1000 + s);
        std::vector<double> xs(1000);
        for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
            double u1 = rng.uniform(), u2 = rng.uniform();
            double r = std::sqrt(-2.0 * std::log(1.0 - u1));
            xs[i] = r * std::cos(2 * std::numbers::pi * u2);
            xs[i + 1] = r * std::sin(2 * std::numbers::pi * u2);
        }
        Dataset ds(std::move(xs), 1);
        double x = 0.0;
        total += kde_at(ds, k, {&x, 1}, 0.3);
    }
    CHECK(std::abs(total / seeds - 0.3989422804) < 0.1);
}

TEST_CASE("optimal bandwidth rule") {
    CHECK(optimal_bandwidth(1000, 1, 1.0, 1.0) == Approx(0.1904491248).epsilon(1e-9));
    CHECK(optimal_bandwidth(1000, 1, 1.0, 2.0) == 2.0 * optimal_bandwidth(1000, 1, 1.0, 1.0));
    CHECK(optimal_bandwidth(1000, 1, 1e9, 1.0) == Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(optimal_bandwidth(1, 1, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("error budget") {
    CHECK(error_budget(100, 0.5, 1, 1.0, 1.0, 0.0, 0.0, 1.0).a_n() == Approx(0.5).epsilon(1e-15));
    CHECK(error_budget(100, 1.0, 1, 1.0, 1.0, 0.0, 1.0, 0.0).a_n() == Approx(0.0).epsilon(1e-15));
    ErrorBudget eb = error_budget(1000, 0.19038, 1, 1.0, 1.0, std::log(1000.0), 1.0, 1.0);
    CHECK(eb.a_n() == Approx(0.8112378464).epsilon(1e-9));
    CHECK_THROWS_AS(error_budget(10, 0.01, 2, 1.0, 1.0, 1.0, 1.0, 1.0), std::domain_error);
}

TEST_CASE("spherical density estimate integrates to one on a fine grid") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        Rng rng(seed);
        Dataset ds = oracles::random_uniform(1000, 1, rng);
        double h = 0.25;
        double step = h / 50.0;
        double lo = -0.3, hi = 1.3;  // covers every sample ball
        int cells = static_cast<int>(std::ceil((hi - lo) / step));
        std::vector<double> centers(cells);
        for (int i = 0; i < cells; ++i) centers[i] = lo + (i + 0.5) * step;
        auto vals = kde_at_points(ds, Kernel::spherical(1), centers, h);
        double mass = 0.0;
        for (double v : vals) mass += v * step;
        CHECK(std::abs(mass - 1.0) < 1e-3);
    }
}
