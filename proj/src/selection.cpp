#include "latentscale/selection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace latentscale {

double bic_score(double loglik, std::size_t dim, std::size_t k_hat, std::size_t n) {
    return -2.0 * loglik + static_cast<double>(dim) * static_cast<double>(k_hat) *
                               std::log(static_cast<double>(n));
}

std::vector<double> default_sigma_grid(const Dataset& data, std::size_t count) {
    if (count < 2) throw std::invalid_argument("default_sigma_grid: count must be >= 2");
    data.validate();
    const std::size_t n = data.size();
    const std::size_t d = data.dim();
    double var_sum = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += data.points[i][k];
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = data.points[i][k] - mean;
            ss += t * t;
        }
        var_sum += ss / static_cast<double>(n);
    }
    const double s = std::sqrt(var_sum / static_cast<double>(d));
    if (!(s > 0.0)) throw std::invalid_argument("default_sigma_grid: data has zero variance");

    std::vector<double> grid(count);
    const double lo = std::log(0.05 * s);
    const double hi = std::log(s);
    for (std::size_t i = 0; i < count; ++i)
        grid[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    grid.front() = 0.05 * s;
    grid.back() = s;
    return grid;
}

std::uint64_t stream_seed(std::uint64_t seed, std::size_t index) {
    return seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(index);
}

namespace {

SweepRecord fit_one(const Dataset& data, double sigma, SolverConfig cfg, std::size_t index) {
    cfg.seed = stream_seed(cfg.seed, index);
    SweepRecord rec;
    rec.sigma = sigma;
    try {
        rec.fit = fit_npmle(data, sigma, cfg);
    } catch (const std::invalid_argument& e) {
        std::ostringstream msg;
        msg << "sigma " << sigma << ": " << e.what();
        throw std::invalid_argument(msg.str());
    } catch (const std::exception& e) {
        std::ostringstream msg;
        msg << "sigma " << sigma << ": " << e.what();
        throw std::runtime_error(msg.str());
    }
    rec.loglik = rec.fit.loglik;
    rec.k_hat = eps_component_count(rec.fit.measure(), 2.0 * sigma).count;
    rec.bic = bic_score(rec.loglik, data.dim(), rec.k_hat, data.size());
    return rec;
}

}  // namespace

std::vector<SweepRecord> sweep(const Dataset& data, const std::vector<double>& sigmas,
                               const SolverConfig& cfg, std::size_t threads) {
    if (sigmas.empty()) throw std::invalid_argument("sweep: empty bandwidth grid");
    for (double s : sigmas)
        if (!(s > 0.0)) throw std::invalid_argument("sweep: bandwidths must be positive");

    std::vector<SweepRecord> records(sigmas.size());
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, sigmas.size());
    if (workers == 1) {
        for (std::size_t i = 0; i < sigmas.size(); ++i) records[i] = fit_one(data, sigmas[i], cfg, i);
        return records;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < sigmas.size(); i = next++) {
                    try {
                        records[i] = fit_one(data, sigmas[i], cfg, i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    return records;
}

double select_sigma(const std::vector<SweepRecord>& records) {
    if (records.empty()) throw std::invalid_argument("select_sigma: no records");
    const SweepRecord* best = &records.front();
    for (const SweepRecord& r : records)
        if (r.bic < best->bic || (r.bic == best->bic && r.sigma < best->sigma)) best = &r;
    return best->sigma;
}

PipelineResult run_pipeline(const Dataset& data, const std::vector<double>& sigmas,
                            const SolverConfig& cfg, const PipelineOptions& options) {
    data.validate();
    PipelineResult out;
    out.records = sweep(data, sigmas, cfg, options.threads);
    out.sigma_hat = select_sigma(out.records);

    // Over-smoothed refit on its own stream, after the sweep streams.
    SolverConfig over = cfg;
    over.seed = stream_seed(cfg.seed, sigmas.size());
    out.oversmoothed_fit = fit_npmle(data, 2.0 * out.sigma_hat, over);
    const DiscreteMeasure& atoms = out.oversmoothed_fit.measure();
    out.k_hat_oversmoothed = eps_component_count(atoms, 4.0 * out.sigma_hat).count;

    out.dendrogram = single_linkage(atoms);
    if (atoms.size() >= 2) out.suggestion = suggest_k(out.dendrogram, options.k_max);
    out.k_suggested = out.suggestion.k;

    if (options.k_override) {
        const std::size_t k = *options.k_override;
        if (k < 1 || k > atoms.size())
            throw std::invalid_argument("run_pipeline: k override " + std::to_string(k) +
                                        " exceeds the " + std::to_string(atoms.size()) +
                                        " fitted atoms");
        out.k_used = k;
        out.k_overridden = true;
    } else {
        out.k_used = std::min(out.k_suggested, atoms.size());
    }

    const Labeling atom_labels = cut_dendrogram(out.dendrogram, out.k_used);
    out.component_model = decompose(atoms, atom_labels, out.oversmoothed_fit.sigma());
    out.component_model.source = out.k_overridden ? "override" : "dendrogram-gap";
    out.labels = classify_dataset(out.component_model, data);
    return out;
}

}  // namespace latentscale
