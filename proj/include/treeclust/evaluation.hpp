#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "treeclust/cluster_tree.hpp"
#include "treeclust/dbscan.hpp"
#include "treeclust/synthetic.hpp"

namespace treeclust {

/// A pair of connected grid regions certified delta-separated: they lie in
/// distinct components of {p > lambda - delta} with lambda = inf p over both.
struct SeparatedPair {
    std::vector<std::size_t> cells_a, cells_b;  // ascending flat cell indices
    double delta;
    double lambda;       // inf p over A ∪ A'
    double split_level;  // the population split the pair witnesses
    int certificate_a, certificate_b;  // distinct labels of {p > lambda - delta}
};

/// One pair per child-component pair of every split level with
/// lambda* + delta <= max p. Each side is the component of
/// {p >= lambda* + delta} containing the child's peak cell.
std::vector<SeparatedPair> make_separated_pairs(const GriddedDensity& gd, double delta);

enum class PairOutcome { EmptyIntersection, CorrectlySeparated, IncorrectlyMerged };

struct ConsistencyReport {
    std::vector<PairOutcome> outcomes;
    bool success = true;  // no pair incorrectly merged
    int empty_pairs = 0;
    int separated_pairs = 0;
};

/// For each pair: intersect both sides with the sample; vacuous when either
/// intersection is empty, otherwise compare the smallest containing clusters
/// through merge heights. A nonempty side whose points never share a cluster
/// counts as a failure.
ConsistencyReport check_delta_consistency(const ClusterHierarchy& hier,
                                          const std::vector<SeparatedPair>& pairs,
                                          const Dataset& ds, const GriddedDensity& gd);

struct RateConfig {
    double alpha = 1.0;
    int kernel_order = 0;  // 0 = spherical sweep (Algorithm 1 style)
    double bandwidth_C = 1.0;
    bool log_bandwidth = true;  // h = C (log n / n)^{1/(2a+d)} vs C n^{-1/(2a+d)}
    double grid_step = 0.002;
    int seeds = 50;
    std::uint64_t seed_base = 1;
    double success_target = 0.9;
    int search_steps = 12;
    double delta_lo = 0.0;  // 0 = auto (1e-3 of the level range)
    double delta_hi = 0.0;  // 0 = auto (0.9 of the level range)
};

struct RatePoint {
    int n;
    double delta_min;     // smallest delta reaching the success target
    double success_rate;  // rate observed at delta_min
    bool bracket_ok;      // target reachable inside the search bracket
};

struct RateResult {
    std::vector<RatePoint> points;
    double slope;         // least-squares slope of log delta_min vs log n
    bool monotone;        // success rates non-decreasing in delta (1 flip slack)
};

/// Binary-searches the smallest delta whose consistency success rate over the
/// seed set reaches the target, for each n; fits the log-log slope.
RateResult rate_experiment(const DensitySpec& spec, HierarchyAlgorithm algorithm,
                           const std::vector<int>& n_grid, const RateConfig& cfg);

/// Deterministic per-cell seed for experiment sampling.
std::uint64_t experiment_seed(std::uint64_t base, int n, int seed_index);

}  // namespace treeclust
