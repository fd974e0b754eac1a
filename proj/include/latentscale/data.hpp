#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "latentscale/measure.hpp"

namespace latentscale {

// Synthetic densities p0 = phi_sigma_true * G0 over planar supports.
struct GeneratorSpec {
    std::string name;          // four-squares | circles-2 | circles-3 | two-moons | four-modes
    std::size_t n = 500;
    double sigma_true = 0.5;
    std::uint64_t seed = 0;
    // four-modes only: 4 centres (x, y) and weights. Defaults apply when empty.
    std::vector<double> centers;
    std::vector<double> weights;
};

const std::vector<std::string>& generator_names();

// Number of latent components of a named generator.
std::size_t generator_components(const std::string& name);

// Mixture weights of a named generator (two-moons renormalised to 1/3, 2/3).
std::vector<double> generator_weights(const GeneratorSpec& spec);

Dataset generate(const GeneratorSpec& spec);

// CSV with a header row `x0,...,x{d-1}[,label]`; values with 17 significant
// digits. A file without a header is read as unlabeled coordinates.
Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& data, const std::filesystem::path& path);

// Parses CSV text directly; `source` only labels error messages.
Dataset parse_csv(const std::string& text, const std::string& source = "<memory>");
std::string format_csv(const Dataset& data);

// Integer labels from the `label` column (or the sole/last column when there
// is no header).
std::vector<int> load_labels(const std::filesystem::path& path);
std::string format_labels(const std::vector<int>& labels);

// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace latentscale
