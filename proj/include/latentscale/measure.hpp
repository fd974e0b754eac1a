#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace latentscale {

// Row-major n x d block of coordinates. Rows are points in R^d.
class PointSet {
public:
    PointSet() = default;
    explicit PointSet(std::size_t dim) : dim_(dim) {}
    PointSet(std::size_t dim, std::vector<double> values);

    std::size_t size() const noexcept { return dim_ == 0 ? 0 : values_.size() / dim_; }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return values_.empty(); }

    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * dim_, dim_};
    }
    std::span<double> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }
    std::span<const double> operator[](std::size_t i) const { return row(i); }

    void push_back(std::span<const double> p);
    void reserve(std::size_t rows) { values_.reserve(rows * dim_); }

    const std::vector<double>& values() const noexcept { return values_; }

    bool operator==(const PointSet&) const = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> values_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double t = a[k] - b[k];
        s += t * t;
    }
    return s;
}

double distance(std::span<const double> a, std::span<const double> b);

// Samples Y_1..Y_n with optional ground-truth labels.
struct Dataset {
    PointSet points;
    std::optional<std::vector<int>> labels;
    std::string name;

    std::size_t size() const noexcept { return points.size(); }
    std::size_t dim() const noexcept { return points.dim(); }

    // Throws std::invalid_argument on n == 0, non-finite values or a label
    // vector of the wrong length.
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

// Probability measure on finitely many distinct atoms.
class DiscreteMeasure {
public:
    DiscreteMeasure() = default;

    // Weights are normalised to sum to one. Atoms closer than merge_tol
    // (Euclidean) are folded into the earlier atom by summing weights; with
    // the default only exact duplicates are merged.
    DiscreteMeasure(PointSet atoms, std::vector<double> weights, double merge_tol = 0.0);

    static DiscreteMeasure dirac(std::span<const double> location);

    std::size_t size() const noexcept { return atoms_.size(); }
    std::size_t dim() const noexcept { return atoms_.dim(); }
    const PointSet& atoms() const noexcept { return atoms_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    std::span<const double> atom(std::size_t j) const { return atoms_.row(j); }
    double weight(std::size_t j) const { return weights_[j]; }

    std::vector<double> mean() const;

    bool operator==(const DiscreteMeasure&) const = default;

private:
    PointSet atoms_;
    std::vector<double> weights_;
};

// Gaussian location mixture p = phi_sigma * G.
class MixtureModel {
public:
    MixtureModel() = default;
    // Atoms closer than duplicate_factor * sigma are merged on construction.
    MixtureModel(double sigma, DiscreteMeasure mixing);

    double sigma() const noexcept { return sigma_; }
    const DiscreteMeasure& mixing() const noexcept { return mixing_; }
    std::size_t dim() const noexcept { return mixing_.dim(); }

    static constexpr double duplicate_factor = 1e-9;

    bool operator==(const MixtureModel&) const = default;

private:
    double sigma_ = 1.0;
    DiscreteMeasure mixing_;
};

struct BoundingBox {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t dim() const noexcept { return lower.size(); }
    bool contains(std::span<const double> x) const;
    void clamp(std::span<double> x) const;
};

// log of the isotropic normal density N(0, sigma^2 I_d) at squared radius r2.
double log_gaussian_kernel(double r2, double sigma, std::size_t dim);

// Max-shifted log(sum exp(v)). Returns -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> v);

double mixture_log_density(const MixtureModel& model, std::span<const double> x);
double mixture_log_density(const DiscreteMeasure& mixing, double sigma,
                           std::span<const double> x);

double log_likelihood(const MixtureModel& model, const Dataset& data);

BoundingBox data_bounding_box(const Dataset& data, double margin_factor = 0.1);

}  // namespace latentscale
