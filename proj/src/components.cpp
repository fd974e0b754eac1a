#include "latentscale/components.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace latentscale {

ComponentModel decompose(const DiscreteMeasure& measure, const Labeling& atom_labels, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("decompose: sigma must be positive");
    if (atom_labels.size() != measure.size())
        throw std::invalid_argument("decompose: one label per atom required");
    int k_count = 0;
    for (int l : atom_labels) {
        if (l < 0) throw std::invalid_argument("decompose: unlabeled atom");
        k_count = std::max(k_count, l + 1);
    }

    const auto kc = static_cast<std::size_t>(k_count);
    std::vector<PointSet> atoms(kc, PointSet(measure.dim()));
    std::vector<std::vector<double>> weights(kc);
    std::vector<double> lambda(kc, 0.0);
    for (std::size_t j = 0; j < measure.size(); ++j) {
        const auto k = static_cast<std::size_t>(atom_labels[j]);
        atoms[k].push_back(measure.atom(j));
        weights[k].push_back(measure.weight(j));
        lambda[k] += measure.weight(j);
    }

    ComponentModel model;
    model.sigma = sigma;
    for (std::size_t k = 0; k < kc; ++k) {
        if (atoms[k].size() == 0)
            throw std::invalid_argument("decompose: class " + std::to_string(k) + " is empty");
        // A class of zero-mass atoms keeps a uniform conditional.
        if (lambda[k] == 0.0) weights[k].assign(weights[k].size(), 1.0);
        model.components.push_back({lambda[k], DiscreteMeasure(std::move(atoms[k]), std::move(weights[k]))});
    }
    return model;
}

ComponentModel decompose_by_level_sets(const DiscreteMeasure& measure, double sigma, double delta,
                                       double threshold) {
    const ComponentSets sets = extract_components(measure, delta, threshold);
    Labeling labels(measure.size());
    for (std::size_t j = 0; j < measure.size(); ++j)
        labels[j] = static_cast<int>(voronoi_label(measure.atom(j), sets));
    ComponentModel model = decompose(measure, labels, sigma);
    model.source = "level-set";
    return model;
}

double class_conditional_log_density(const ComponentModel& model, std::size_t k,
                                     std::span<const double> x) {
    if (k >= model.size()) throw std::invalid_argument("class_conditional_log_density: k out of range");
    return mixture_log_density(model.components[k].measure, model.sigma, x);
}

double model_log_density(const ComponentModel& model, std::span<const double> x) {
    std::vector<double> terms(model.size());
    for (std::size_t k = 0; k < model.size(); ++k) {
        const double lambda = model.components[k].lambda;
        terms[k] = lambda > 0.0 ? std::log(lambda) + class_conditional_log_density(model, k, x)
                                : -std::numeric_limits<double>::infinity();
    }
    return log_sum_exp(terms);
}

std::size_t bayes_classify(const ComponentModel& model, std::span<const double> x) {
    if (model.size() == 0) throw std::invalid_argument("bayes_classify: empty model");
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < model.size(); ++k) {
        const double lambda = model.components[k].lambda;
        if (lambda <= 0.0) continue;
        const double score = std::log(lambda) + class_conditional_log_density(model, k, x);
        if (score > best_score) {
            best_score = score;
            best = k;
        }
    }
    return best;
}

Labeling classify_dataset(const ComponentModel& model, const Dataset& data) {
    if (data.dim() != model.dim()) throw std::invalid_argument("classify_dataset: dimension mismatch");
    Labeling out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        out[i] = static_cast<int>(bayes_classify(model, data.points[i]));
    return out;
}

}  // namespace latentscale
