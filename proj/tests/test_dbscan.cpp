#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "treeclust/dbscan.hpp"

using namespace treeclust;
using doctest::Approx;

namespace {

// Brute-force Algorithm 1 pipeline per k: count, filter, BFS.
std::vector<std::vector<int>> brute_dbscan_level(const Dataset& ds, double h, int k) {
    std::vector<int> active;
    for (int i = 0; i < ds.size(); ++i) {
        int count = 0;
        for (int j = 0; j < ds.size(); ++j)
            if (oracles::dist(ds.point(i), ds.point(j)) <= h) ++count;
        if (count >= k) active.push_back(i);
    }
    return oracles::bfs_components(ds, active, 2.0 * h, /*strict=*/true);
}

// Brute-force Algorithm 2 level: KDE filter at lambda, BFS with closed edges.
std::vector<std::vector<int>> brute_mdbscan_level(const Dataset& ds, const Kernel& kernel, double h,
                                                  double lambda) {
    std::vector<int> active;
    for (int i = 0; i < ds.size(); ++i)
        if (kde_at(ds, kernel, ds.point(i), h) >= lambda) active.push_back(i);
    return oracles::bfs_components(ds, active, 2.0 * h, /*strict=*/false);
}

}  // namespace

TEST_CASE("lambda_of_k") {
    CHECK(lambda_of_k(0, 100, 0.5, 1) == 0.0);
    CHECK(lambda_of_k(10, 100, 0.5, 1) == Approx(0.1).epsilon(1e-15));
    for (int k = 1; k <= 100; ++k) CHECK(k_of_lambda(lambda_of_k(k, 100, 0.5, 1), 100, 0.5, 1) == k);
}

TEST_CASE("dbscan_hierarchy on the three-point example") {
    Dataset ds({0.0, 0.5, 3.0}, 1);
    auto hier = dbscan_hierarchy(ds, 1.0);
    // counts: 2, 2, 1 -> activations lambda_2, lambda_2, lambda_1
    auto t2 = hier.level_index_for_k(2);
    REQUIRE(t2.has_value());
    auto lvl = hier.level(*t2);
    CHECK(lvl.active == std::vector<int>{0, 1});
    CHECK(lvl.clusters == std::vector<std::vector<int>>{{0, 1}});
    CHECK(lvl.k == 2);

    // k = (n neighbors exceeded) -> empty level
    CHECK_FALSE(hier.level_index_for_k(3).has_value());

    // k = 0: all points active, components of the 2h graph
    auto t0 = hier.level_index_for_k(0);
    REQUIRE(t0.has_value());
    auto base = hier.level(*t0);
    CHECK(base.active == std::vector<int>{0, 1, 2});
    CHECK(base.clusters == std::vector<std::vector<int>>{{0, 1}, {2}});
}

TEST_CASE("dbscan_hierarchy equals the brute-force pipeline at every k") {
    Rng rng(42);
    Dataset ds = oracles::random_uniform(40, 2, rng);
    double h = 0.2;
    auto hier = dbscan_hierarchy(ds, h);
    CHECK(hier.verify_nesting());
    for (int k = 0; k <= ds.size(); ++k) {
        auto want = brute_dbscan_level(ds, h, k);
        auto t = hier.level_index_for_k(k);
        if (!t.has_value()) {
            CHECK(want.empty());
            continue;
        }
        CHECK(hier.level(*t).clusters == want);
    }
}

TEST_CASE("modified dbscan basics") {
    Kernel k2 = Kernel::valid_order(2, 1);

    SUBCASE("single point") {
        Dataset one({0.0}, 1);
        auto hier = modified_dbscan_hierarchy(one, k2, 1.0);
        REQUIRE(hier.level_count() >= 1);
        auto lvl = hier.level(hier.level_count() - 1);
        CHECK(lvl.clusters == std::vector<std::vector<int>>{{0}});
        // lambda above p_hat(X_0) -> empty level
        CHECK_FALSE(hier.level_index_for(hier.top_activation(0) + 1e-9).has_value());
    }

    SUBCASE("two-bump sample equals brute-force per sorted level") {
        Rng rng(7);
        std::vector<double> xs;
        for (int i = 0; i < 20; ++i) xs.push_back(-1.0 + 0.25 * rng.uniform());
        for (int i = 0; i < 20; ++i) xs.push_back(1.0 + 0.25 * rng.uniform());
        Dataset ds(std::move(xs), 1);
        double h = 0.15;
        auto hier = modified_dbscan_hierarchy(ds, k2, h);
        CHECK(hier.verify_nesting());
        for (int t = 0; t < hier.level_count(); ++t) {
            double lambda = hier.level_param(t);
            CHECK(hier.level(t).clusters == brute_mdbscan_level(ds, k2, h, lambda));
        }
    }
}

TEST_CASE("spherical kde rejected by modified sweep") {
    Dataset ds({0.0, 1.0}, 1);
    CHECK_THROWS_AS(modified_dbscan_hierarchy(ds, Kernel::spherical(1), 0.5), std::invalid_argument);
}

TEST_CASE("smallest containing cluster") {
    Dataset ds({0.0, 0.5, 3.0}, 1);
    auto hier = dbscan_hierarchy(ds, 1.0);

    SUBCASE("singleton: topmost level where the index is active") {
        auto got = hier.smallest_containing_cluster({2});
        REQUIRE(got.has_value());
        CHECK(got->level == Approx(hier.top_activation(2)));
        CHECK(got->cluster_id == 2);
    }
    SUBCASE("pair from the worked example") {
        auto got = hier.smallest_containing_cluster({0, 1});
        REQUIRE(got.has_value());
        CHECK(got->level == Approx(lambda_of_k(2, 3, 1.0, 1)));
        CHECK(got->cluster_id == 0);
    }
    SUBCASE("indices straddling level-0 components") {
        CHECK_FALSE(hier.smallest_containing_cluster({0, 2}).has_value());
        CHECK_THROWS_AS(hier.smallest_containing_cluster({}), std::invalid_argument);
    }
}

TEST_CASE("smallest containing cluster agrees with a linear level scan") {
    Rng rng(99);
    Dataset ds = oracles::random_uniform(60, 2, rng);
    auto hier = dbscan_hierarchy(ds, 0.15);
    auto levels = hier.all_levels();
    for (int rep = 0; rep < 40; ++rep) {
        int i = static_cast<int>(rng.bits() % ds.size());
        int j = static_cast<int>(rng.bits() % ds.size());
        // scan levels downward for the highest one with i, j in one block
        std::optional<double> want;
        for (auto it = levels.rbegin(); it != levels.rend() && !want; ++it) {
            for (const auto& block : it->clusters) {
                bool has_i = std::binary_search(block.begin(), block.end(), i);
                bool has_j = std::binary_search(block.begin(), block.end(), j);
                if (has_i && has_j) {
                    want = it->level;
                    break;
                }
            }
        }
        auto got = hier.smallest_containing_cluster({i, j});
        CHECK(got.has_value() == want.has_value());
        if (got && want) CHECK(got->level == Approx(*want));
    }
}

TEST_CASE("merge heights match a linear scan and are ultrametric") {
    Rng rng(123);
    Dataset ds = oracles::random_uniform(50, 1, rng);
    auto hier = dbscan_hierarchy(ds, 0.08);
    auto levels = hier.all_levels();

    auto scan_merge = [&](int i, int j) -> std::optional<double> {
        for (auto it = levels.rbegin(); it != levels.rend(); ++it)
            for (const auto& block : it->clusters)
                if (std::binary_search(block.begin(), block.end(), i) &&
                    std::binary_search(block.begin(), block.end(), j))
                    return it->level;
        return std::nullopt;
    };

    for (int i = 0; i < ds.size(); i += 3)
        for (int j = i; j < ds.size(); j += 5) {
            auto got = hier.merge_height(i, j);
            auto want = scan_merge(i, j);
            CHECK(got.has_value() == want.has_value());
            if (got && want) CHECK(*got == Approx(*want));
        }

    // ultrametric: m(i,k) >= min(m(i,j), m(j,k)) whenever all defined
    for (int rep = 0; rep < 200; ++rep) {
        int i = static_cast<int>(rng.bits() % ds.size());
        int j = static_cast<int>(rng.bits() % ds.size());
        int k = static_cast<int>(rng.bits() % ds.size());
        auto mij = hier.merge_height(i, j), mjk = hier.merge_height(j, k), mik = hier.merge_height(i, k);
        if (mij && mjk && mik) CHECK(*mik >= std::min(*mij, *mjk) - 1e-12);
    }
}

TEST_CASE("hierarchies are deterministic") {
    Rng rng(5);
    Dataset ds = oracles::random_uniform(80, 2, rng);
    auto a = dbscan_hierarchy(ds, 0.18);
    auto b = dbscan_hierarchy(ds, 0.18);
    REQUIRE(a.level_count() == b.level_count());
    CHECK(a.activations() == b.activations());
    REQUIRE(a.merges().size() == b.merges().size());
    for (std::size_t m = 0; m < a.merges().size(); ++m) {
        CHECK(a.merges()[m].level == b.merges()[m].level);
        CHECK(a.merges()[m].cluster_a == b.merges()[m].cluster_a);
        CHECK(a.merges()[m].cluster_b == b.merges()[m].cluster_b);
    }
    for (int t = 0; t < a.level_count(); ++t) CHECK(a.level(t).clusters == b.level(t).clusters);
}

TEST_CASE("graph components equal union-of-balls components") {
    SUBCASE("d=1: exact interval unions") {
        Rng rng(17);
        for (int rep = 0; rep < 30; ++rep) {
            int n = 10 + static_cast<int>(rng.bits() % 60);
            Dataset ds = oracles::random_uniform(n, 1, rng);
            double h = 0.02 + 0.1 * rng.uniform();
            auto hier = dbscan_hierarchy(ds, h);
            for (int t = 0; t < hier.level_count(); ++t) {
                auto lvl = hier.level(t);
                // sort active points; balls [x-h, x+h] connect iff gap <= 2h
                std::vector<int> sorted = lvl.active;
                std::sort(sorted.begin(), sorted.end(),
                          [&](int a, int b) { return ds.point(a)[0] < ds.point(b)[0]; });
                std::vector<std::vector<int>> want;
                for (std::size_t s = 0; s < sorted.size(); ++s) {
                    if (s == 0 || ds.point(sorted[s])[0] - ds.point(sorted[s - 1])[0] > 2.0 * h)
                        want.emplace_back();
                    want.back().push_back(sorted[s]);
                }
                for (auto& block : want) std::sort(block.begin(), block.end());
                std::sort(want.begin(), want.end(),
                          [](const auto& a, const auto& b) { return a.front() < b.front(); });
                CHECK(lvl.clusters == want);
            }
        }
    }
    SUBCASE("d=2: dense ball-intersection BFS, n <= 30") {
        Rng rng(18);
        for (int rep = 0; rep < 20; ++rep) {
            int n = 8 + static_cast<int>(rng.bits() % 23);
            Dataset ds = oracles::random_uniform(n, 2, rng);
            double h = 0.05 + 0.15 * rng.uniform();
            auto hier = dbscan_hierarchy(ds, h);
            for (int t = 0; t < hier.level_count(); ++t) {
                auto lvl = hier.level(t);
                // closed balls of radius h intersect iff centers within 2h
                CHECK(lvl.clusters == oracles::bfs_components(ds, lvl.active, 2.0 * h, false));
            }
        }
    }
}
