#pragma once

#include <optional>
#include <vector>

#include "treeclust/geometry.hpp"
#include "treeclust/kde.hpp"

namespace treeclust {

enum class HierarchyAlgorithm { Dbscan, ModifiedDbscan };

/// A union that joined two clusters, recorded while sweeping levels downward.
struct MergeEvent {
    double level;              // level parameter at which the clusters join
    int point_a, point_b;      // edge endpoints that realized the merge
    int cluster_a, cluster_b;  // canonical ids of the clusters that merged
};

struct SplitChild {
    int cluster_id;     // min member at the level just above the split
    double peak_level;  // highest activation inside the child
    int witness;        // sample index attaining peak_level
};

/// A level at which one cluster decomposes into two or more clusters at the
/// next stored level.
struct SplitRecord {
    double level;
    std::vector<SplitChild> children;
    double significance = 0.0;  // Delta used for pruning; 0 until pruned
};

struct HierarchyLevel {
    double level;                            // lambda
    int k = -1;                              // count threshold (Algorithm 1), -1 otherwise
    std::vector<int> active;                 // ascending sample indices
    std::vector<std::vector<int>> clusters;  // blocks sorted by min member
};

/// Nested partitions of the sample indexed by a level parameter, produced by
/// the level sweeps below. Stores the per-point activation level (the highest
/// level at which the point is active), the merge events, and the dendrogram
/// they induce; per-level partitions are materialized on demand by replaying
/// the events. Read-only once built.
class ClusterHierarchy {
public:
    HierarchyAlgorithm algorithm() const { return algorithm_; }
    double bandwidth() const { return h_; }
    int kernel_order() const { return kernel_order_; }
    int dim() const { return dim_; }
    int point_count() const { return static_cast<int>(activation_.size()); }

    /// Activation of point i: p_hat at X_i on the lambda scale. Negative
    /// activations (possible for higher-order kernels) mean the point is
    /// active at no level.
    const std::vector<double>& activations() const { return activation_; }
    double top_activation(int i) const { return activation_[i]; }

    /// Distinct stored level parameters, ascending. Level t covers every query
    /// lambda in (param(t-1), param(t)].
    int level_count() const { return static_cast<int>(params_.size()); }
    double level_param(int t) const { return params_[t]; }

    /// Stored level whose active set is {i : activation_i >= lambda};
    /// nullopt when the active set is empty.
    std::optional<int> level_index_for(double lambda) const;
    /// Algorithm 1 count thresholds k in 0..n map onto stored levels through
    /// lambda_k = k / (n h^d V_d).
    std::optional<int> level_index_for_k(int k) const;

    /// Materializes the partition at stored level t (replays merge events).
    HierarchyLevel level(int t) const;
    /// Every stored level, ascending. Memory grows with n * level_count.
    std::vector<HierarchyLevel> all_levels() const;

    /// sup of levels at which i and j are active and share a cluster;
    /// nullopt when they never do.
    std::optional<double> merge_height(int i, int j) const;

    struct ContainingCluster {
        double level;
        int level_index;
        int cluster_id;
    };
    /// Highest level at which all given indices lie in one cluster.
    /// nullopt when the indices never share a cluster (or an index is never
    /// active). Throws std::invalid_argument on an empty index set.
    std::optional<ContainingCluster> smallest_containing_cluster(const std::vector<int>& indices) const;

    const std::vector<MergeEvent>& merges() const { return merges_; }
    /// Raw split records, ascending by level.
    const std::vector<SplitRecord>& splits() const { return splits_; }

    /// Consecutive-level containment check: every cluster at the higher level
    /// must be contained in exactly one cluster at the next lower level.
    bool verify_nesting() const;

private:
    friend ClusterHierarchy build_hierarchy(const Dataset& ds, std::vector<double> activation,
                                            double edge_radius, EdgeRule rule,
                                            HierarchyAlgorithm algorithm, double h, int kernel_order);

    // sweep state shared with queries
    HierarchyAlgorithm algorithm_ = HierarchyAlgorithm::Dbscan;
    double h_ = 0.0;
    int kernel_order_ = 1;
    int dim_ = 1;
    EdgeRule edge_rule_ = EdgeRule::Strict;
    std::vector<double> activation_;
    std::vector<double> params_;  // ascending distinct activation values
    std::vector<MergeEvent> merges_;
    std::vector<SplitRecord> splits_;

    // dendrogram forest: leaves 0..n-1, internal nodes appended per merge
    std::vector<int> node_parent_;
    std::vector<double> node_level_;
    std::vector<int> node_depth_;
    std::vector<std::vector<int>> up_;  // binary lifting table

    void build_lca();
    int lca(int u, int v) const;
    int stored_k(double lambda) const;

    template <typename LevelFn>
    void replay(LevelFn&& on_level) const;  // on_level(level_param, UnionFind&, active flags)
};

/// lambda_k = k / (n h^d V_d).
double lambda_of_k(int k, int n, double h, int d);

/// ceil(lambda n h^d V_d), snapping to the nearest integer first when the
/// product sits within 1e-9 of one (the analytic round trip k -> lambda_k -> k
/// crosses an exact integer, which floating point may overshoot).
int k_of_lambda(double lambda, int n, double h, int d);

/// Level sweep over count thresholds k = 0..n: node set
/// {i : |B(X_i,h) ∩ sample| >= k}, edges ||Xi-Xj|| < 2h (strict).
ClusterHierarchy dbscan_hierarchy(const Dataset& ds, double h);

/// Level sweep over the sorted kernel density values: node set
/// {i : p_hat(X_i) >= lambda}, edges ||Xi-Xj|| <= 2h (closed). The kernel must
/// be a valid (product) kernel.
ClusterHierarchy modified_dbscan_hierarchy(const Dataset& ds, const Kernel& kernel, double h);

/// Shared sweep used by both algorithm entry points.
ClusterHierarchy build_hierarchy(const Dataset& ds, std::vector<double> activation,
                                 double edge_radius, EdgeRule rule, HierarchyAlgorithm algorithm,
                                 double h, int kernel_order);

}  // namespace treeclust
