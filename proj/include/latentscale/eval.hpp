#pragma once

#include <cstddef>

#include "latentscale/measure.hpp"
#include "latentscale/structure.hpp"

namespace latentscale {

struct PartitionPair {
    Labeling labels_a;
    Labeling labels_b;
};

// Adjusted Rand index from the contingency table. Noise labels are rejected.
double ari(const PartitionPair& pair);
double ari(const Labeling& a, const Labeling& b);

// W1 in one dimension: the integral of |F_G - F_H|.
double w1_1d(const DiscreteMeasure& g, const DiscreteMeasure& h);

// Exact optimal transport cost (sum pi_ij |x_i - y_j|^p)^(1/p) solved as a
// min-cost flow. Throws unsupported_error when m_G * m_H > max_atoms^2.
double w1_exact_small(const DiscreteMeasure& g, const DiscreteMeasure& h, std::size_t max_atoms = 64,
                      double cost_exponent = 1.0);

// ||phi_sigma * G - phi_sigma * H||_1 by trapezoid quadrature over the joint
// atom hull +- 10 sigma with step sigma / 100.
double smoothing_l1_distance_1d(const DiscreteMeasure& g, const DiscreteMeasure& h, double sigma);

// Lipschitz constant of G -> phi_sigma * G from W1 to L1 in d = 1: sqrt(2/pi) / sigma.
double smoothing_lipschitz_1d(double sigma);

}  // namespace latentscale
