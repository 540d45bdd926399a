#pragma once

#include <optional>
#include <vector>

#include "treeclust/dbscan.hpp"
#include "treeclust/levelset.hpp"

namespace treeclust {

/// sup of levels at which i and j share a cluster (nullopt when they never do).
inline std::optional<double> merge_height(const ClusterHierarchy& hier, int i, int j) {
    return hier.merge_height(i, j);
}

/// Raw split records of the hierarchy (every level where a cluster decomposes
/// into >= 2 clusters at the next stored level), ascending by level.
inline const std::vector<SplitRecord>& extract_splits(const ClusterHierarchy& hier) {
    return hier.splits();
}

/// Splits that survive pruning at margin delta: at least two children carry a
/// witness point active at level + delta in distinct clusters there. Retained
/// records keep only the surviving children and carry significance = delta.
std::vector<SplitRecord> significant_splits(const ClusterHierarchy& hier, double delta);

/// A split level of a gridded density, located by the downward sweep over the
/// sorted distinct cell values. `level` is the lower of the two distinct
/// values bracketing the split; `value_gap` is their difference.
struct GridSplit {
    double level;
    double value_gap;
    struct Child {
        std::size_t peak_cell;  // cell attaining the child's maximum
        double peak_value;
    };
    std::vector<Child> children;
};

/// Split levels of the density on the grid (persistence pairing of the
/// face-adjacency component merges). Ascending by level. Only d <= 2.
std::vector<GridSplit> true_split_levels(const GriddedDensity& gd);

/// Smallest ratio dist(children at level + delta) / delta^{1/alpha} over a
/// geometric sweep of delta, measured on the grid. Infinity when the children
/// never coexist.
double estimate_cs(const GriddedDensity& gd, const GridSplit& split, double alpha,
                   int delta_steps = 16, double delta_max_fraction = 0.5);

/// Conversion from one-parameter separation to the two-parameter criterion:
/// eps = delta / (3 lambda), sigma = (delta / (3 L))^{1/alpha}, separator set
/// {p <= lambda - delta}. Only defined for alpha <= 1.
struct EpsSigma {
    double separator_level;  // lambda - delta
    double eps;
    double sigma;
};

EpsSigma delta_to_eps_sigma(double delta, double lambda, double L, double alpha);

}  // namespace treeclust
