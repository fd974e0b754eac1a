#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "latentscale/components.hpp"
#include "latentscale/npmle.hpp"
#include "latentscale/structure.hpp"

namespace latentscale {

struct SweepRecord {
    double sigma = 0.0;
    FitResult fit;
    double loglik = 0.0;
    std::size_t k_hat = 1;
    double bic = 0.0;
};

struct PipelineResult {
    std::vector<SweepRecord> records;
    double sigma_hat = 0.0;
    FitResult oversmoothed_fit;
    Dendrogram dendrogram;
    KSuggestion suggestion;
    std::size_t k_hat_oversmoothed = 1;  // eps-component count of the 2 sigma_hat fit
    std::size_t k_suggested = 1;
    std::size_t k_used = 1;
    bool k_overridden = false;
    ComponentModel component_model;
    Labeling labels;
};

struct PipelineOptions {
    std::optional<std::size_t> k_override;
    std::size_t k_max = 10;
    std::size_t threads = 1;
};

// -2 loglik + d K ln n.
double bic_score(double loglik, std::size_t dim, std::size_t k_hat, std::size_t n);

// `count` geometrically spaced bandwidths from 0.05 s to s, where s is the
// root-mean-square of the per-coordinate standard deviations.
std::vector<double> default_sigma_grid(const Dataset& data, std::size_t count = 16);

// Seed of the i-th independent solver stream; stream 0 is the base seed.
std::uint64_t stream_seed(std::uint64_t seed, std::size_t index);

// Fits every bandwidth; record order follows `sigmas`. With threads > 1 the
// fits run concurrently, each with its own seeded stream.
std::vector<SweepRecord> sweep(const Dataset& data, const std::vector<double>& sigmas,
                               const SolverConfig& cfg, std::size_t threads = 1);

// Bandwidth of the smallest BIC; ties go to the smaller bandwidth.
double select_sigma(const std::vector<SweepRecord>& records);

PipelineResult run_pipeline(const Dataset& data, const std::vector<double>& sigmas,
                            const SolverConfig& cfg, const PipelineOptions& options = {});

}  // namespace latentscale
