#pragma once

// Brute-force reference implementations used to pin expected values in tests.
// These must stay independent of the library code paths they check.

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "treeclust/geometry.hpp"
#include "treeclust/util.hpp"

namespace oracles {

inline double dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// Exhaustive O(n) closed-ball scan.
inline std::vector<int> neighbors_scan(const treeclust::Dataset& ds, std::span<const double> c, double r) {
    std::vector<int> out;
    for (int i = 0; i < ds.size(); ++i)
        if (dist(ds.point(i), c) <= r) out.push_back(i);
    return out;
}

// BFS over the explicit adjacency matrix.
inline std::vector<std::vector<int>> bfs_components(const treeclust::Dataset& ds,
                                                    const std::vector<int>& active, double threshold,
                                                    bool strict) {
    std::vector<char> is_active(ds.size(), 0);
    for (int i : active) is_active[i] = 1;
    std::vector<int> label(ds.size(), -1);
    std::vector<std::vector<int>> comps;
    for (int s = 0; s < ds.size(); ++s) {
        if (!is_active[s] || label[s] >= 0) continue;
        int id = static_cast<int>(comps.size());
        comps.emplace_back();
        std::queue<int> q;
        q.push(s);
        label[s] = id;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            comps[id].push_back(u);
            for (int v = 0; v < ds.size(); ++v) {
                if (!is_active[v] || label[v] >= 0 || v == u) continue;
                double d = dist(ds.point(u), ds.point(v));
                if (strict ? d < threshold : d <= threshold) {
                    label[v] = id;
                    q.push(v);
                }
            }
        }
    }
    for (auto& c : comps) std::sort(c.begin(), c.end());
    std::sort(comps.begin(), comps.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return comps;
}

inline treeclust::Dataset random_uniform(int n, int d, treeclust::Rng& rng, double lo = 0.0, double hi = 1.0) {
    std::vector<double> coords(static_cast<std::size_t>(n) * d);
    for (auto& v : coords) v = rng.uniform(lo, hi);
    return treeclust::Dataset(std::move(coords), d);
}

}  // namespace oracles
