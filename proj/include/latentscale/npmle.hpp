#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "latentscale/measure.hpp"

namespace latentscale {

struct SolverConfig {
    std::size_t m_init = 200;          // initial support size, capped at n
    std::size_t max_iter = 2000;       // outer (EM) iterations
    double loglik_tol = 1e-8;          // per-sample gain that counts as a stall
    double dual_tol = 1e-2;            // certificate slack on D - 1
    double prune_weight = 1e-8;
    double merge_radius_factor = 1e-3; // merge radius in units of sigma
    std::size_t probe_grid_size = 0;   // 0: 512 * d
    double insert_weight = 1e-3;
    std::uint64_t seed = 0;
    BoundingBox theta_box;             // empty: data box with margin 0.1

    // Throws std::invalid_argument when the fields are inconsistent.
    void validate() const;
};

// Fills m_init, probe_grid_size and theta_box from the data when unset.
SolverConfig resolve_config(const SolverConfig& cfg, const Dataset& data);

struct FitResult {
    MixtureModel model;
    double loglik = 0.0;
    double dual_gap = 0.0;   // max over probes of D - 1
    double min_atom_gradient = 0.0; // min over atoms of D
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> loglik_trace;

    double sigma() const noexcept { return model.sigma(); }
    const DiscreteMeasure& measure() const noexcept { return model.mixing(); }
};

/// Gradient (directional-derivative) function of the log-likelihood at a
/// mixing measure,
///   D(theta) = (1/n) sum_i phi_sigma(Y_i - theta) / (phi_sigma * G)(Y_i).
/// The measure is optimal iff D <= 1 everywhere, with equality on its support.
double gradient_function(const DiscreteMeasure& measure, double sigma, const Dataset& data,
                         std::span<const double> theta);

/// D evaluated at every row of `probes`, sharing one pass over the data.
std::vector<double> gradient_function(const DiscreteMeasure& measure, double sigma,
                                      const Dataset& data, const PointSet& probes);

/// Nonparametric maximum likelihood estimate of the mixing measure at a
/// fixed bandwidth.
///
/// Runs EM over atom locations and weights starting from a seeded subsample
/// of the data. Between EM steps tiny atoms are pruned and near-coincident
/// atoms merged; when EM stalls while the gradient function still exceeds
/// one somewhere on the probe set, a new atom is inserted at the worst probe.
/// Every accepted step is non-decreasing in log-likelihood.
FitResult fit_npmle(const Dataset& data, double sigma, const SolverConfig& cfg);

/// Convex restriction of the same problem to a fixed support: multiplicative
/// weight updates w_j <- w_j D(theta_j) until max_j w_j |D(theta_j) - 1| <= tol.
/// Atoms whose final weight is below 1e-10 are dropped.
DiscreteMeasure fit_npmle_grid(const Dataset& data, double sigma, const PointSet& grid,
                               std::size_t max_iter = 20000, double tol = 1e-9);

/// Regular 1-D grid lo, lo + step, ... up to hi (inclusive within rounding).
PointSet uniform_grid_1d(double lo, double hi, double step);

/// Upper bound on the number of atoms of a 1-D NPMLE:
///   1.90 + (Y_max + 10) r / (0.85 sigma^2),  r = (Y_max - Y_min) / 2.
double atom_count_bound(const Dataset& data, double sigma);

}  // namespace latentscale
