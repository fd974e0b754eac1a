#include "latentscale/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "latentscale/errors.hpp"

namespace latentscale {

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // Root becomes the smaller of the two roots.
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
        return true;
    }

private:
    std::vector<std::size_t> parent_;
};

// Component ids ordered by smallest member; roots are already minimal members.
Labeling label_by_root(DisjointSets& ds, std::size_t m, std::size_t* count) {
    Labeling labels(m, -1);
    std::vector<int> id_of_root(m, -1);
    int next = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t r = ds.find(i);
        if (id_of_root[r] < 0) id_of_root[r] = next++;
        labels[i] = id_of_root[r];
    }
    if (count) *count = static_cast<std::size_t>(next);
    return labels;
}

struct Edge {
    std::size_t u;
    std::size_t v;
    double w;
};

}  // namespace

std::size_t Dendrogram::cluster_count_at(double h) const {
    std::size_t applied = 0;
    for (const Merge& mg : merges)
        if (mg.height <= h) ++applied;
    return leaves - applied;
}

ComponentCount eps_component_count(const PointSet& points, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps_component_count: eps must be positive");
    const std::size_t m = points.size();
    DisjointSets ds(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            if (distance(points[i], points[j]) <= eps) ds.unite(i, j);
    ComponentCount out;
    out.labels = label_by_root(ds, m, &out.count);
    return out;
}

ComponentCount eps_component_count(const DiscreteMeasure& measure, double eps) {
    return eps_component_count(measure.atoms(), eps);
}

Dendrogram single_linkage(const PointSet& points) {
    const std::size_t m = points.size();
    if (m == 0) throw std::invalid_argument("single_linkage: no points");
    Dendrogram dg;
    dg.leaves = m;
    if (m == 1) return dg;

    // Prim's minimum spanning tree on the complete Euclidean graph.
    std::vector<Edge> edges;
    edges.reserve(m - 1);
    std::vector<bool> in_tree(m, false);
    std::vector<double> best(m, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> from(m, 0);
    std::size_t current = 0;
    in_tree[0] = true;
    for (std::size_t step = 1; step < m; ++step) {
        std::size_t next = m;
        for (std::size_t j = 0; j < m; ++j) {
            if (in_tree[j]) continue;
            const double dj = distance(points[current], points[j]);
            if (dj < best[j]) {
                best[j] = dj;
                from[j] = current;
            }
            if (next == m || best[j] < best[next]) next = j;
        }
        in_tree[next] = true;
        edges.push_back({std::min(from[next], next), std::max(from[next], next), best[next]});
        current = next;
    }
    std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.w < b.w; });

    DisjointSets ds(m);
    std::vector<std::size_t> node_of_root(m), size_of_root(m, 1);
    std::iota(node_of_root.begin(), node_of_root.end(), 0);

    std::size_t pos = 0;
    while (pos < edges.size()) {
        std::size_t end = pos;
        while (end < edges.size() && edges[end].w == edges[pos].w) ++end;
        // Within a tie group pick merges by the (left, right) node ids they
        // would produce, smallest first.
        std::vector<bool> used(end - pos, false);
        for (std::size_t done = 0; done < end - pos; ++done) {
            std::size_t pick = end;
            std::pair<std::size_t, std::size_t> pick_key{};
            for (std::size_t e = pos; e < end; ++e) {
                if (used[e - pos]) continue;
                std::size_t a = node_of_root[ds.find(edges[e].u)];
                std::size_t b = node_of_root[ds.find(edges[e].v)];
                if (b < a) std::swap(a, b);
                if (pick == end || std::make_pair(a, b) < pick_key) {
                    pick = e;
                    pick_key = {a, b};
                }
            }
            used[pick - pos] = true;
            const std::size_t ra = ds.find(edges[pick].u);
            const std::size_t rb = ds.find(edges[pick].v);
            const std::size_t size = size_of_root[ra] + size_of_root[rb];
            ds.unite(ra, rb);
            const std::size_t root = ds.find(ra);
            dg.merges.push_back({pick_key.first, pick_key.second, edges[pick].w, size});
            node_of_root[root] = m + dg.merges.size() - 1;
            size_of_root[root] = size;
        }
        pos = end;
    }
    return dg;
}

Dendrogram single_linkage(const DiscreteMeasure& measure) { return single_linkage(measure.atoms()); }

Labeling cut_dendrogram(const Dendrogram& dg, std::size_t k) {
    const std::size_t m = dg.leaves;
    if (k < 1 || k > m) throw std::invalid_argument("cut_dendrogram: K must lie in [1, m]");
    if (dg.merges.size() + 1 != m) throw std::invalid_argument("cut_dendrogram: malformed dendrogram");
    // Any leaf of each node stands in for the node.
    std::vector<std::size_t> leaf_of(2 * m - 1);
    std::iota(leaf_of.begin(), leaf_of.begin() + static_cast<std::ptrdiff_t>(m), 0);
    DisjointSets ds(m);
    for (std::size_t i = 0; i < m - 1; ++i) {
        const Merge& mg = dg.merges[i];
        if (mg.left >= m + i || mg.right >= m + i)
            throw std::invalid_argument("cut_dendrogram: merge refers to a future node");
        leaf_of[m + i] = leaf_of[mg.left];
        if (i < m - k) ds.unite(leaf_of[mg.left], leaf_of[mg.right]);
    }
    return label_by_root(ds, m, nullptr);
}

KSuggestion suggest_k(const Dendrogram& dg, std::size_t k_max, std::size_t window) {
    if (k_max < 1) throw std::invalid_argument("suggest_k: k_max must be >= 1");
    KSuggestion out;
    const std::size_t count = dg.merges.size();
    const std::size_t w = std::min(count, window);
    const std::size_t first = count - w;
    double best_gap = 0.0;
    for (std::size_t i = first; i + 1 < count; ++i) {
        const double gap = std::abs(dg.merges[i + 1].height - dg.merges[i].height);
        const std::size_t k = dg.leaves - (i + 1);
        out.gaps.push_back({k, gap});
        if (gap > 0.0 && gap >= best_gap) {
            best_gap = gap;
            out.k = k;
        }
    }
    out.k = std::clamp<std::size_t>(out.k, 1, k_max);
    return out;
}

double box_smooth_density(const DiscreteMeasure& measure, double delta, std::span<const double> x) {
    if (!(delta > 0.0)) throw std::invalid_argument("box_smooth_density: delta must be positive");
    if (x.size() != measure.dim()) throw std::invalid_argument("box_smooth_density: dimension mismatch");
    double mass = 0.0;
    for (std::size_t j = 0; j < measure.size(); ++j) {
        auto a = measure.atom(j);
        bool inside = true;
        for (std::size_t k = 0; k < x.size() && inside; ++k) inside = std::abs(x[k] - a[k]) <= delta;
        if (inside) mass += measure.weight(j);
    }
    return mass * std::pow(2.0 * delta, -static_cast<double>(x.size()));
}

ComponentSets extract_components(const DiscreteMeasure& measure, double delta, double threshold) {
    if (!(delta > 0.0)) throw std::invalid_argument("extract_components: delta must be positive");
    if (!(threshold >= 0.0)) throw std::invalid_argument("extract_components: threshold must be >= 0");
    std::vector<std::size_t> kept;
    PointSet kept_points(measure.dim());
    for (std::size_t j = 0; j < measure.size(); ++j) {
        if (box_smooth_density(measure, delta, measure.atom(j)) > threshold) {
            kept.push_back(j);
            kept_points.push_back(measure.atom(j));
        }
    }
    if (kept.empty())
        throw empty_result_error("extract_components: no atom exceeds the level-set threshold");

    const double eps = 2.0 * std::sqrt(static_cast<double>(measure.dim())) * delta;
    const ComponentCount cc = eps_component_count(kept_points, eps);
    ComponentSets out;
    out.sets.resize(cc.count);
    out.points.assign(cc.count, PointSet(measure.dim()));
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const auto c = static_cast<std::size_t>(cc.labels[i]);
        out.sets[c].push_back(kept[i]);
        out.points[c].push_back(measure.atom(kept[i]));
    }
    return out;
}

LevelSetParams default_level_set_params(double sigma, std::size_t n, std::size_t dim) {
    if (!(sigma > 0.0) || n == 0 || dim == 0)
        throw std::invalid_argument("default_level_set_params: bad arguments");
    const double d = static_cast<double>(dim);
    LevelSetParams p;
    p.delta = sigma / 2.0;
    p.threshold = std::pow(2.0, -d) * std::pow(p.delta, -(d + 1.0)) / std::sqrt(d) /
                  std::sqrt(static_cast<double>(n));
    return p;
}

std::size_t voronoi_label(std::span<const double> x, const ComponentSets& sets) {
    if (sets.size() == 0) throw std::invalid_argument("voronoi_label: no sets");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < sets.size(); ++k) {
        const PointSet& pts = sets.points[k];
        for (std::size_t j = 0; j < pts.size(); ++j) {
            const double dist = squared_distance(x, pts[j]);
            if (dist < best_d) {
                best_d = dist;
                best = k;
            }
        }
    }
    return best;
}

}  // namespace latentscale
