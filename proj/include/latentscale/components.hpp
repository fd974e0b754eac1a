#pragma once

#include <span>
#include <string>
#include <vector>

#include "latentscale/measure.hpp"
#include "latentscale/structure.hpp"

namespace latentscale {

struct Component {
    double lambda = 0.0;
    DiscreteMeasure measure;

    bool operator==(const Component&) const = default;
};

// Mixture split into weighted class-conditional densities
// f_k = phi_sigma * G(. | E_k) with masses lambda_k = G(E_k).
struct ComponentModel {
    double sigma = 1.0;
    std::vector<Component> components;
    std::string source;

    std::size_t size() const noexcept { return components.size(); }
    std::size_t dim() const noexcept { return components.empty() ? 0 : components.front().measure.dim(); }

    bool operator==(const ComponentModel&) const = default;
};

// Every atom must carry a label in 0..K-1 and every class must be nonempty.
ComponentModel decompose(const DiscreteMeasure& measure, const Labeling& atom_labels, double sigma);

// Assigns each atom to the Voronoi cell of the nearest extracted level-set
// component, then decomposes.
ComponentModel decompose_by_level_sets(const DiscreteMeasure& measure, double sigma, double delta,
                                       double threshold);

double class_conditional_log_density(const ComponentModel& model, std::size_t k,
                                     std::span<const double> x);

// log sum_k lambda_k f_k(x).
double model_log_density(const ComponentModel& model, std::span<const double> x);

// argmax_k log lambda_k + log f_k(x); ties go to the smaller k.
std::size_t bayes_classify(const ComponentModel& model, std::span<const double> x);

Labeling classify_dataset(const ComponentModel& model, const Dataset& data);

}  // namespace latentscale
