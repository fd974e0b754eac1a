#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "latentscale/measure.hpp"

namespace latentscale {

// Cluster assignments; -1 marks noise where an operation allows it.
using Labeling = std::vector<int>;

struct ComponentCount {
    std::size_t count = 0;
    Labeling labels;
};

struct Merge {
    std::size_t left = 0;   // smaller node id
    std::size_t right = 0;
    double height = 0.0;
    std::size_t size = 0;

    bool operator==(const Merge&) const = default;
};

// Single-linkage merge history. Leaves are 0..m-1, the node created by
// merges[i] has id m + i.
struct Dendrogram {
    std::size_t leaves = 0;
    std::vector<Merge> merges;

    // Number of clusters left after applying every merge with height <= h.
    std::size_t cluster_count_at(double h) const;

    bool operator==(const Dendrogram&) const = default;
};

// Disjoint groups of atom indices with their coordinates.
struct ComponentSets {
    std::vector<std::vector<std::size_t>> sets;
    std::vector<PointSet> points;

    std::size_t size() const noexcept { return sets.size(); }
};

struct GapEntry {
    std::size_t k = 0;   // clusters remaining just below the gap
    double gap = 0.0;
};

struct KSuggestion {
    std::size_t k = 1;
    std::vector<GapEntry> gaps;
};

// Connected components of the graph joining atoms at Euclidean distance
// <= eps, i.e. DBSCAN with minPts = 1. Components are numbered in order of
// their smallest atom index.
ComponentCount eps_component_count(const PointSet& points, double eps);
ComponentCount eps_component_count(const DiscreteMeasure& measure, double eps);

Dendrogram single_linkage(const PointSet& points);
Dendrogram single_linkage(const DiscreteMeasure& measure);

// Undo the last K - 1 merges. Labels are ordered by smallest member index.
Labeling cut_dendrogram(const Dendrogram& dg, std::size_t k);

// Picks K from the largest absolute height gap among the final
// min(m - 1, window) merges, clamped to [1, k_max]. Falls back to K = 1 when
// no gap is positive.
KSuggestion suggest_k(const Dendrogram& dg, std::size_t k_max = 10, std::size_t window = 15);

// (G * I_delta)(x) with the box kernel I_delta = (2 delta)^-d 1{|x|_inf <= delta}.
double box_smooth_density(const DiscreteMeasure& measure, double delta, std::span<const double> x);

// Keeps atoms whose box-smoothed density exceeds `threshold` and groups them
// by eps-connectivity at eps = 2 sqrt(d) delta. Throws empty_result_error when
// no atom survives.
ComponentSets extract_components(const DiscreteMeasure& measure, double delta, double threshold);

struct LevelSetParams {
    double delta = 0.0;
    double threshold = 0.0;
};

// delta = sigma / 2 and t = 2^-d delta^-(d+1) d^-1/2 n^-1/2.
LevelSetParams default_level_set_params(double sigma, std::size_t n, std::size_t dim);

// Index of the nearest set (minimum distance to any member atom); ties go to
// the smaller index.
std::size_t voronoi_label(std::span<const double> x, const ComponentSets& sets);

}  // namespace latentscale
