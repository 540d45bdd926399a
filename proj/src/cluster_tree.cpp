#include "treeclust/cluster_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace treeclust {

std::vector<SplitRecord> significant_splits(const ClusterHierarchy& hier, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("significant_splits: delta must be positive");
    std::vector<SplitRecord> out;
    for (const SplitRecord& split : hier.splits()) {
        SplitRecord kept{split.level, {}, delta};
        for (const SplitChild& child : split.children)
            if (child.peak_level >= split.level + delta) kept.children.push_back(child);
        // witnesses from distinct children stay in distinct clusters at
        // level + delta (children never rejoin above the split)
        if (kept.children.size() >= 2) out.push_back(std::move(kept));
    }
    return out;
}

std::vector<GridSplit> true_split_levels(const GriddedDensity& gd) {
    if (gd.dim() > 2) throw std::invalid_argument("true_split_levels: only d <= 2 is supported");
    const GridGeometry& geom = gd.geometry();
    const std::size_t n = gd.cell_count();
    if (n == 0) return {};

    std::vector<std::size_t> order(n);
    for (std::size_t f = 0; f < n; ++f) order[f] = f;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (gd.value(a) != gd.value(b)) return gd.value(a) > gd.value(b);
        return a < b;
    });

    const int w = gd.dim() == 2 ? geom.shape[1] : static_cast<int>(n);
    const std::size_t rows = gd.dim() == 2 ? static_cast<std::size_t>(geom.shape[0]) : 1;

    UnionFind uf(static_cast<int>(n));
    std::vector<char> active(n, 0);
    std::vector<double> peak(n);
    std::vector<std::size_t> peak_cell(n);
    for (std::size_t f = 0; f < n; ++f) {
        peak[f] = gd.value(f);
        peak_cell[f] = f;
    }

    std::vector<GridSplit> splits;
    std::unordered_map<int, std::vector<GridSplit::Child>> batch_children;
    double prev_value = std::numeric_limits<double>::infinity();

    std::size_t at = 0;
    while (at < n) {
        const double v = gd.value(order[at]);
        std::size_t end = at;
        while (end < n && gd.value(order[end]) == v) ++end;
        for (std::size_t t = at; t < end; ++t) active[order[t]] = 1;

        auto take_children = [&](int root) -> std::vector<GridSplit::Child> {
            auto it = batch_children.find(root);
            if (it != batch_children.end()) {
                auto list = std::move(it->second);
                batch_children.erase(it);
                return list;
            }
            if (peak[root] > v) return {GridSplit::Child{peak_cell[root], peak[root]}};
            return {};
        };

        for (std::size_t t = at; t < end; ++t) {
            std::size_t f = order[t];
            std::size_t r = f / w, c = f % w;
            auto try_union = [&](std::size_t g) {
                if (!active[g]) return;
                int ra = uf.find(static_cast<int>(f)), rb = uf.find(static_cast<int>(g));
                if (ra == rb) return;
                auto kids = take_children(ra);
                auto more = take_children(rb);
                kids.insert(kids.end(), more.begin(), more.end());
                uf.unite(ra, rb);
                int root = uf.find(ra);
                int other = root == ra ? rb : ra;
                if (peak[other] > peak[root]) {
                    peak[root] = peak[other];
                    peak_cell[root] = peak_cell[other];
                }
                if (!kids.empty()) batch_children[root] = std::move(kids);
            };
            if (c > 0) try_union(f - 1);
            if (c + 1 < static_cast<std::size_t>(w)) try_union(f + 1);
            if (r > 0) try_union(f - w);
            if (r + 1 < rows) try_union(f + w);
        }

        for (auto& [root, kids] : batch_children) {
            if (kids.size() >= 2) {
                std::sort(kids.begin(), kids.end(), [](const auto& a, const auto& b) {
                    return a.peak_cell < b.peak_cell;
                });
                splits.push_back(GridSplit{v, prev_value - v, std::move(kids)});
            }
        }
        batch_children.clear();
        prev_value = v;
        at = end;
    }

    std::sort(splits.begin(), splits.end(), [](const GridSplit& a, const GridSplit& b) {
        if (a.level != b.level) return a.level < b.level;
        return a.children.front().peak_cell < b.children.front().peak_cell;
    });
    return splits;
}

namespace {

// Distance between the components of {p >= lambda} containing the two peak
// cells; nullopt when some child has no cell left at lambda.
std::optional<double> child_distance(const GriddedDensity& gd, const GridSplit& split, double lambda) {
    std::vector<int> labels;
    gd.components_at(lambda, labels);
    std::vector<int> child_label;
    for (const auto& child : split.children) {
        if (gd.value(child.peak_cell) < lambda) return std::nullopt;
        child_label.push_back(labels[child.peak_cell]);
    }
    const GridGeometry& geom = gd.geometry();
    double best = std::numeric_limits<double>::infinity();
    // min pairwise distance between cells of the first two children
    for (std::size_t pa = 0; pa + 1 < child_label.size(); ++pa)
        for (std::size_t pb = pa + 1; pb < child_label.size(); ++pb) {
            if (child_label[pa] == child_label[pb]) return std::nullopt;  // rejoined: lambda too low
            std::vector<std::vector<double>> cells_a, cells_b;
            for (std::size_t f = 0; f < gd.cell_count(); ++f) {
                if (labels[f] == child_label[pa]) cells_a.push_back(geom.center(f));
                if (labels[f] == child_label[pb]) cells_b.push_back(geom.center(f));
            }
            for (const auto& xa : cells_a)
                for (const auto& xb : cells_b) {
                    double d2 = 0.0;
                    for (std::size_t ax = 0; ax < xa.size(); ++ax)
                        d2 += (xa[ax] - xb[ax]) * (xa[ax] - xb[ax]);
                    best = std::min(best, std::sqrt(d2));
                }
        }
    return best;
}

}  // namespace

double estimate_cs(const GriddedDensity& gd, const GridSplit& split, double alpha, int delta_steps,
                   double delta_max_fraction) {
    if (!(alpha > 0.0)) throw std::invalid_argument("estimate_cs: alpha must be positive");
    double headroom = 0.0;
    for (const auto& child : split.children)
        headroom = std::max(headroom, child.peak_value - split.level);
    double delta_max = delta_max_fraction * headroom;
    if (!(delta_max > 0.0)) return std::numeric_limits<double>::infinity();

    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < delta_steps; ++s) {
        double delta = delta_max * std::pow(0.5, s);
        auto dist = child_distance(gd, split, split.level + delta);
        if (dist) best = std::min(best, *dist / std::pow(delta, 1.0 / alpha));
    }
    return best;
}

EpsSigma delta_to_eps_sigma(double delta, double lambda, double L, double alpha) {
    if (alpha > 1.0)
        throw std::invalid_argument("delta_to_eps_sigma: no conversion is defined for alpha > 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("delta_to_eps_sigma: alpha must be in (0,1]");
    if (!(delta > 0.0 && delta < lambda))
        throw std::invalid_argument("delta_to_eps_sigma: requires 0 < delta < lambda");
    if (!(L > 0.0)) throw std::invalid_argument("delta_to_eps_sigma: L must be positive");
    return EpsSigma{lambda - delta, delta / (3.0 * lambda), std::pow(delta / (3.0 * L), 1.0 / alpha)};
}

}  // namespace treeclust
