#include "treeclust/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace treeclust {

double lambda_of_k(int k, int n, double h, int d) {
    if (k < 0 || k > n) throw std::invalid_argument("lambda_of_k: k must be in 0..n");
    return static_cast<double>(k) / (static_cast<double>(n) * std::pow(h, d) * unit_ball_volume(d));
}

int k_of_lambda(double lambda, int n, double h, int d) {
    double x = lambda * (static_cast<double>(n) * std::pow(h, d) * unit_ball_volume(d));
    double snapped = std::round(x);
    if (std::abs(x - snapped) <= 1e-9 * std::max(1.0, std::abs(x))) x = snapped;
    return static_cast<int>(std::ceil(x));
}

ClusterHierarchy build_hierarchy(const Dataset& ds, std::vector<double> activation,
                                 double edge_radius, EdgeRule rule, HierarchyAlgorithm algorithm,
                                 double h, int kernel_order) {
    const int n = ds.size();
    if (static_cast<int>(activation.size()) != n)
        throw std::invalid_argument("build_hierarchy: one activation per point required");

    ClusterHierarchy hier;
    hier.algorithm_ = algorithm;
    hier.h_ = h;
    hier.kernel_order_ = kernel_order;
    hier.dim_ = ds.dim();
    hier.edge_rule_ = rule;
    hier.activation_ = std::move(activation);

    // Points enter at their activation level, highest first; ties activate
    // together (one batch per distinct value). Negative activations never enter.
    std::vector<int> order;
    order.reserve(n);
    for (int i = 0; i < n; ++i)
        if (hier.activation_[i] >= 0.0) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (hier.activation_[a] != hier.activation_[b]) return hier.activation_[a] > hier.activation_[b];
        return a < b;
    });

    hier.node_parent_.assign(n, -1);
    hier.node_level_.assign(n, 0.0);
    for (int i = 0; i < n; ++i) hier.node_level_[i] = hier.activation_[i];

    if (order.empty()) {
        hier.build_lca();
        return hier;
    }

    NeighborIndex index(ds, edge_radius);
    UnionFind uf(n);
    std::vector<char> active(n, 0);
    std::vector<int> comp_node(n);  // union-find root -> dendrogram node
    std::vector<double> peak(n);    // union-find root -> max activation
    std::vector<int> peak_arg(n);   // union-find root -> argmax point
    for (int i = 0; i < n; ++i) {
        comp_node[i] = i;
        peak[i] = hier.activation_[i];
        peak_arg[i] = i;
    }

    const bool strict = rule == EdgeRule::Strict;
    std::vector<int> buf;
    std::vector<double> params_desc;
    // child lists of components touched by merges in the current batch
    std::unordered_map<int, std::vector<SplitChild>> batch_children;

    std::size_t at = 0;
    while (at < order.size()) {
        const double lambda = hier.activation_[order[at]];
        std::size_t end = at;
        while (end < order.size() && hier.activation_[order[end]] == lambda) ++end;
        for (std::size_t t = at; t < end; ++t) active[order[t]] = 1;

        for (std::size_t t = at; t < end; ++t) {
            int i = order[t];
            index.within(ds.point(i), buf, strict);
            for (int j : buf) {
                if (!active[j] || j == i) continue;
                int ra = uf.find(i), rb = uf.find(j);
                if (ra == rb) continue;

                auto take_children = [&](int root) -> std::vector<SplitChild> {
                    auto it = batch_children.find(root);
                    if (it != batch_children.end()) {
                        auto list = std::move(it->second);
                        batch_children.erase(it);
                        return list;
                    }
                    // untouched this batch: a prior cluster iff it has a point
                    // activated strictly above the current level
                    if (peak[root] > lambda)
                        return {SplitChild{uf.min_member(root), peak[root], peak_arg[root]}};
                    return {};
                };
                std::vector<SplitChild> kids = take_children(ra);
                {
                    auto more = take_children(rb);
                    kids.insert(kids.end(), more.begin(), more.end());
                }

                int id_a = uf.min_member(ra), id_b = uf.min_member(rb);
                hier.merges_.push_back(
                    MergeEvent{lambda, i, j, std::min(id_a, id_b), std::max(id_a, id_b)});

                int node_a = comp_node[ra], node_b = comp_node[rb];
                uf.unite(ra, rb);
                int r = uf.find(ra);
                int fresh = static_cast<int>(hier.node_parent_.size());
                hier.node_parent_.push_back(-1);
                hier.node_level_.push_back(lambda);
                hier.node_parent_[node_a] = fresh;
                hier.node_parent_[node_b] = fresh;
                comp_node[r] = fresh;
                int other = r == ra ? rb : ra;
                if (peak[other] > peak[r]) {
                    peak[r] = peak[other];
                    peak_arg[r] = peak_arg[other];
                }
                if (!kids.empty()) batch_children[r] = std::move(kids);
            }
        }

        for (auto& [root, kids] : batch_children) {
            if (kids.size() >= 2) {
                std::sort(kids.begin(), kids.end(),
                          [](const SplitChild& a, const SplitChild& b) { return a.cluster_id < b.cluster_id; });
                hier.splits_.push_back(SplitRecord{lambda, std::move(kids), 0.0});
            }
        }
        batch_children.clear();
        params_desc.push_back(lambda);
        at = end;
    }

    hier.params_.assign(params_desc.rbegin(), params_desc.rend());
    std::sort(hier.splits_.begin(), hier.splits_.end(), [](const SplitRecord& a, const SplitRecord& b) {
        if (a.level != b.level) return a.level < b.level;
        return a.children.front().cluster_id < b.children.front().cluster_id;
    });
    hier.build_lca();
    return hier;
}

ClusterHierarchy dbscan_hierarchy(const Dataset& ds, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("dbscan_hierarchy: h must be positive");
    NeighborIndex index(ds, h);
    std::vector<double> activation(ds.size());
    std::vector<int> buf;
    for (int i = 0; i < ds.size(); ++i) {
        index.within(ds.point(i), buf);
        activation[i] = lambda_of_k(static_cast<int>(buf.size()), ds.size(), h, ds.dim());
    }
    return build_hierarchy(ds, std::move(activation), 2.0 * h, EdgeRule::Strict,
                           HierarchyAlgorithm::Dbscan, h, 1);
}

ClusterHierarchy modified_dbscan_hierarchy(const Dataset& ds, const Kernel& kernel, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("modified_dbscan_hierarchy: h must be positive");
    if (kernel.is_spherical())
        throw std::invalid_argument("modified_dbscan_hierarchy: requires a valid (product) kernel");
    DensityEstimate est = evaluate_density(ds, kernel, h);
    return build_hierarchy(ds, std::move(est.values), 2.0 * h, EdgeRule::Closed,
                           HierarchyAlgorithm::ModifiedDbscan, h, kernel.order());
}

void ClusterHierarchy::build_lca() {
    const int m = static_cast<int>(node_parent_.size());
    node_depth_.assign(m, 0);
    for (int v = m - 1; v >= 0; --v)
        node_depth_[v] = node_parent_[v] < 0 ? 0 : node_depth_[node_parent_[v]] + 1;

    int levels = 1;
    while ((1 << levels) < std::max(2, m)) ++levels;
    up_.assign(levels, std::vector<int>(m, -1));
    up_[0] = node_parent_;
    for (int k = 1; k < levels; ++k)
        for (int v = 0; v < m; ++v) {
            int mid = up_[k - 1][v];
            up_[k][v] = mid < 0 ? -1 : up_[k - 1][mid];
        }
}

int ClusterHierarchy::lca(int u, int v) const {
    if (node_depth_[u] < node_depth_[v]) std::swap(u, v);
    int diff = node_depth_[u] - node_depth_[v];
    for (std::size_t k = 0; k < up_.size(); ++k)
        if (diff & (1 << k)) u = up_[k][u];
    if (u == v) return u;
    for (int k = static_cast<int>(up_.size()) - 1; k >= 0; --k)
        if (up_[k][u] != up_[k][v]) {
            u = up_[k][u];
            v = up_[k][v];
        }
    return up_[0][u];  // -1 when u and v sit in different trees
}

std::optional<double> ClusterHierarchy::merge_height(int i, int j) const {
    const int n = point_count();
    if (i < 0 || i >= n || j < 0 || j >= n) throw std::invalid_argument("merge_height: index out of range");
    if (activation_[i] < 0.0 || activation_[j] < 0.0) return std::nullopt;
    if (i == j) return activation_[i];
    int a = lca(i, j);
    if (a < 0) return std::nullopt;
    return node_level_[a];
}

std::optional<int> ClusterHierarchy::level_index_for(double lambda) const {
    if (params_.empty()) return std::nullopt;
    auto it = std::lower_bound(params_.begin(), params_.end(), lambda);
    if (it == params_.end()) return std::nullopt;
    return static_cast<int>(it - params_.begin());
}

std::optional<int> ClusterHierarchy::level_index_for_k(int k) const {
    if (algorithm_ != HierarchyAlgorithm::Dbscan)
        throw std::logic_error("level_index_for_k: hierarchy was not built over count thresholds");
    return level_index_for(lambda_of_k(k, point_count(), h_, dim_));
}

template <typename LevelFn>
void ClusterHierarchy::replay(LevelFn&& on_level) const {
    const int n = point_count();
    UnionFind uf(n);
    std::vector<char> active(n, 0);

    std::vector<int> order;
    order.reserve(n);
    for (int i = 0; i < n; ++i)
        if (activation_[i] >= 0.0) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (activation_[a] != activation_[b]) return activation_[a] > activation_[b];
        return a < b;
    });

    std::size_t at = 0, ev = 0;
    for (int t = level_count() - 1; t >= 0; --t) {
        double lambda = params_[t];
        while (at < order.size() && activation_[order[at]] >= lambda) active[order[at++]] = 1;
        while (ev < merges_.size() && merges_[ev].level >= lambda) {
            uf.unite(merges_[ev].point_a, merges_[ev].point_b);
            ++ev;
        }
        on_level(t, lambda, uf, active);
    }
}

namespace {

HierarchyLevel snapshot_level(int t, double lambda, int k, UnionFind& uf,
                              const std::vector<char>& active) {
    HierarchyLevel out;
    out.level = lambda;
    out.k = k;
    std::unordered_map<int, std::vector<int>> blocks;
    for (int i = 0; i < uf.size(); ++i) {
        if (!active[i]) continue;
        out.active.push_back(i);
        blocks[uf.find(i)].push_back(i);
    }
    out.clusters.reserve(blocks.size());
    for (auto& [root, members] : blocks) out.clusters.push_back(std::move(members));
    std::sort(out.clusters.begin(), out.clusters.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

}  // namespace

HierarchyLevel ClusterHierarchy::level(int t) const {
    if (t < 0 || t >= level_count()) throw std::invalid_argument("level: index out of range");
    HierarchyLevel out;
    replay([&](int level_index, double lambda, UnionFind& uf, const std::vector<char>& active) {
        if (level_index == t) out = snapshot_level(t, lambda, stored_k(lambda), uf, active);
    });
    return out;
}

std::vector<HierarchyLevel> ClusterHierarchy::all_levels() const {
    std::vector<HierarchyLevel> out(level_count());
    replay([&](int t, double lambda, UnionFind& uf, const std::vector<char>& active) {
        out[t] = snapshot_level(t, lambda, stored_k(lambda), uf, active);
    });
    return out;
}

int ClusterHierarchy::stored_k(double lambda) const {
    if (algorithm_ != HierarchyAlgorithm::Dbscan) return -1;
    // stored params are exactly the lambda_k of the neighbor counts
    return static_cast<int>(std::llround(lambda * point_count() * std::pow(h_, dim_) *
                                         unit_ball_volume(dim_)));
}

std::optional<ClusterHierarchy::ContainingCluster>
ClusterHierarchy::smallest_containing_cluster(const std::vector<int>& indices) const {
    if (indices.empty())
        throw std::invalid_argument("smallest_containing_cluster: empty index set");
    const int anchor = indices.front();
    double level = activation_.at(anchor);
    if (level < 0.0) return std::nullopt;
    for (int i : indices) {
        auto m = merge_height(anchor, i);
        if (!m) return std::nullopt;
        level = std::min(level, *m);
    }
    auto t = level_index_for(level);
    if (!t) return std::nullopt;

    ContainingCluster out{level, *t, -1};
    replay([&](int level_index, double lambda, UnionFind& uf, const std::vector<char>&) {
        if (level_index == *t) out.cluster_id = uf.min_member(anchor);
    });
    return out;
}

bool ClusterHierarchy::verify_nesting() const {
    // Clusters at the previous (higher) level must map into exactly one
    // cluster at the current level; the replay visits levels downward.
    const int n = point_count();
    std::vector<std::vector<int>> prev_blocks;
    bool ok = true;

    replay([&](int, double, UnionFind& uf, const std::vector<char>& active) {
        if (!ok) return;
        std::vector<int> cur_cluster(n, -1);
        std::unordered_map<int, std::vector<int>> blocks;
        for (int i = 0; i < n; ++i)
            if (active[i]) blocks[uf.find(i)].push_back(i);
        for (auto& [root, members] : blocks) {
            int id = members.front();
            for (int i : members) cur_cluster[i] = id;
        }
        for (const auto& block : prev_blocks) {
            int target = cur_cluster[block.front()];
            if (target < 0) ok = false;
            for (int i : block)
                if (cur_cluster[i] != target) ok = false;
        }
        prev_blocks.clear();
        for (auto& [root, members] : blocks) prev_blocks.push_back(std::move(members));
    });
    return ok;
}

}  // namespace treeclust
