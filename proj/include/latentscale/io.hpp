#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "latentscale/components.hpp"
#include "latentscale/data.hpp"
#include "latentscale/npmle.hpp"
#include "latentscale/selection.hpp"
#include "latentscale/structure.hpp"

namespace latentscale {

using json = nlohmann::ordered_json;

json to_json(const DiscreteMeasure& measure);
json to_json(const MixtureModel& model);
json to_json(const FitResult& fit);
json to_json(const Dendrogram& dg);
json to_json(const ComponentSets& sets);
json to_json(const ComponentModel& model);
json to_json(const KSuggestion& suggestion);
json to_json(const PipelineResult& result);
json to_json(const GeneratorSpec& spec);

// Readers throw format_error on schema violations.
DiscreteMeasure measure_from_json(const json& j);
MixtureModel mixture_from_json(const json& j);
Dendrogram dendrogram_from_json(const json& j);
// Accepts a ComponentModel document or a PipelineResult holding one.
ComponentModel component_model_from_json(const json& j);

json parse_json(const std::string& text, const std::string& source = "<memory>");

// Table with header sigma,loglik,k_hat,bic,atoms,dual_gap.
std::string format_sweep_table(const std::vector<SweepRecord>& records);

// Human-readable gap listing, one "K=<k> gap=<g>" line per window entry.
std::string format_gap_report(const KSuggestion& suggestion);

// Flat rendering: leaves on the x axis in dendrogram order, merge height on y.
std::string dendrogram_svg(const Dendrogram& dg);

}  // namespace latentscale
