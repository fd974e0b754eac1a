#pragma once

#include <cmath>
#include <stdexcept>
#include <numbers>
#include <vector>

#include "latentscale/measure.hpp"

namespace testing {

using namespace latentscale;

inline PointSet points_1d(const std::vector<double>& xs) { return PointSet(1, xs); }

inline DiscreteMeasure measure_1d(const std::vector<double>& atoms, const std::vector<double>& weights) {
    return DiscreteMeasure(points_1d(atoms), weights);
}

inline Dataset dataset_1d(const std::vector<double>& ys) {
    Dataset d;
    d.points = points_1d(ys);
    return d;
}

inline Dataset dataset_2d(const std::vector<double>& xy) {
    Dataset d;
    d.points = PointSet(2, xy);
    return d;
}

// Direct N(0, sigma^2 I_d) density, no log-space tricks.
inline double normal_pdf(double r2, double sigma, std::size_t d) {
    return std::exp(-r2 / (2.0 * sigma * sigma)) / std::pow(2.0 * std::numbers::pi * sigma * sigma, 0.5 * d);
}

// sum_j w_j phi_sigma(x - theta_j) evaluated naively.
inline double naive_density(const DiscreteMeasure& g, double sigma, std::span<const double> x) {
    double p = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) p += g.weight(j) * normal_pdf(squared_distance(x, g.atom(j)), sigma, g.dim());
    return p;
}

}  // namespace testing
