#include "latentscale/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace latentscale {

PointSet::PointSet(std::size_t dim, std::vector<double> values)
    : dim_(dim), values_(std::move(values)) {
    if (dim_ == 0) throw std::invalid_argument("PointSet: dimension must be >= 1");
    if (values_.size() % dim_ != 0)
        throw std::invalid_argument("PointSet: value count is not a multiple of the dimension");
}

void PointSet::push_back(std::span<const double> p) {
    if (dim_ == 0) dim_ = p.size();
    if (p.size() != dim_) throw std::invalid_argument("PointSet: dimension mismatch");
    values_.insert(values_.end(), p.begin(), p.end());
}

double distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

void Dataset::validate() const {
    if (points.size() == 0) throw std::invalid_argument("dataset is empty");
    for (double v : points.values())
        if (!std::isfinite(v)) throw std::invalid_argument("dataset contains non-finite values");
    if (labels && labels->size() != points.size())
        throw std::invalid_argument("label count does not match row count");
}

DiscreteMeasure::DiscreteMeasure(PointSet atoms, std::vector<double> weights, double merge_tol) {
    const std::size_t m = atoms.size();
    if (m == 0) throw std::invalid_argument("DiscreteMeasure: needs at least one atom");
    if (weights.size() != m) throw std::invalid_argument("DiscreteMeasure: weight count mismatch");
    for (double v : atoms.values())
        if (!std::isfinite(v)) throw std::invalid_argument("DiscreteMeasure: non-finite atom");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::invalid_argument("DiscreteMeasure: weights must be finite and >= 0");
        total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("DiscreteMeasure: weights sum to zero");

    const double tol2 = merge_tol * merge_tol;
    atoms_ = PointSet(atoms.dim());
    atoms_.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        auto a = atoms.row(j);
        std::size_t hit = atoms_.size();
        for (std::size_t k = 0; k < atoms_.size(); ++k) {
            if (squared_distance(atoms_.row(k), a) <= tol2) {
                hit = k;
                break;
            }
        }
        if (hit == atoms_.size()) {
            atoms_.push_back(a);
            weights_.push_back(weights[j]);
        } else {
            weights_[hit] += weights[j];
        }
    }
    for (double& w : weights_) w /= total;
}

DiscreteMeasure DiscreteMeasure::dirac(std::span<const double> location) {
    PointSet atoms(location.size());
    atoms.push_back(location);
    return DiscreteMeasure(std::move(atoms), {1.0});
}

std::vector<double> DiscreteMeasure::mean() const {
    std::vector<double> out(dim(), 0.0);
    for (std::size_t j = 0; j < size(); ++j) {
        auto a = atom(j);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += weights_[j] * a[k];
    }
    return out;
}

MixtureModel::MixtureModel(double sigma, DiscreteMeasure mixing) : sigma_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("MixtureModel: sigma must be positive and finite");
    if (mixing.size() == 0) throw std::invalid_argument("MixtureModel: empty mixing measure");
    mixing_ = DiscreteMeasure(mixing.atoms(), mixing.weights(), duplicate_factor * sigma);
}

bool BoundingBox::contains(std::span<const double> x) const {
    for (std::size_t k = 0; k < lower.size(); ++k)
        if (x[k] < lower[k] || x[k] > upper[k]) return false;
    return true;
}

void BoundingBox::clamp(std::span<double> x) const {
    for (std::size_t k = 0; k < lower.size(); ++k) x[k] = std::clamp(x[k], lower[k], upper[k]);
}

double log_gaussian_kernel(double r2, double sigma, std::size_t dim) {
    const double s2 = sigma * sigma;
    return -0.5 * r2 / s2 - 0.5 * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi * s2);
}

double log_sum_exp(std::span<const double> v) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : v) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double x : v) {
        const double z = x - mx;
        // exp(-60) is below double resolution relative to the leading term.
        if (z > -60.0) s += std::exp(z);
    }
    return mx + std::log(s);
}

double mixture_log_density(const DiscreteMeasure& mixing, double sigma,
                           std::span<const double> x) {
    if (x.size() != mixing.dim())
        throw std::invalid_argument("mixture_log_density: dimension mismatch");
    const std::size_t m = mixing.size();
    std::vector<double> terms(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double w = mixing.weight(j);
        terms[j] = w > 0.0 ? std::log(w) + log_gaussian_kernel(squared_distance(x, mixing.atom(j)),
                                                               sigma, x.size())
                           : -std::numeric_limits<double>::infinity();
    }
    return log_sum_exp(terms);
}

double mixture_log_density(const MixtureModel& model, std::span<const double> x) {
    return mixture_log_density(model.mixing(), model.sigma(), x);
}

double log_likelihood(const MixtureModel& model, const Dataset& data) {
    if (data.size() == 0) throw std::invalid_argument("log_likelihood: empty dataset");
    if (data.dim() != model.dim()) throw std::invalid_argument("log_likelihood: dimension mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) total += mixture_log_density(model, data.points[i]);
    return total;
}

BoundingBox data_bounding_box(const Dataset& data, double margin_factor) {
    if (!(margin_factor >= 0.0)) throw std::invalid_argument("margin_factor must be >= 0");
    if (data.size() == 0) throw std::invalid_argument("data_bounding_box: empty dataset");
    const std::size_t d = data.dim();
    BoundingBox box{std::vector<double>(d, std::numeric_limits<double>::infinity()),
                    std::vector<double>(d, -std::numeric_limits<double>::infinity())};
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto p = data.points[i];
        for (std::size_t k = 0; k < d; ++k) {
            box.lower[k] = std::min(box.lower[k], p[k]);
            box.upper[k] = std::max(box.upper[k], p[k]);
        }
    }
    for (std::size_t k = 0; k < d; ++k) {
        const double range = box.upper[k] - box.lower[k];
        const double pad = range > 0.0 ? margin_factor * range : margin_factor * 1.0;
        box.lower[k] -= pad;
        box.upper[k] += pad;
    }
    return box;
}

}  // namespace latentscale
