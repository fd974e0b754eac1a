#include "latentscale/io.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "latentscale/errors.hpp"

namespace latentscale {

namespace {

json atoms_json(const PointSet& atoms) {
    json out = json::array();
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        const auto row = atoms.row(j);
        out.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return out;
}

const json& require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw format_error(std::string("missing field \"") + key + "\"");
    return j.at(key);
}

template <typename T>
T get_as(const json& j, const char* key) {
    try {
        return require(j, key).get<T>();
    } catch (const json::exception& e) {
        throw format_error(std::string("field \"") + key + "\": " + e.what());
    }
}

DiscreteMeasure read_atoms(const json& j) {
    const json& atoms = require(j, "atoms");
    const auto weights = get_as<std::vector<double>>(j, "weights");
    if (!atoms.is_array()) throw format_error("field \"atoms\" must be an array");
    if (atoms.size() != weights.size()) throw format_error("atoms and weights differ in length");
    if (atoms.empty()) throw format_error("measure has no atoms");
    std::size_t dim = 0;
    std::vector<double> flat;
    for (const json& row : atoms) {
        std::vector<double> v;
        try {
            v = row.get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw format_error(std::string("atom: ") + e.what());
        }
        if (dim == 0) dim = v.size();
        if (v.empty() || v.size() != dim) throw format_error("atoms have inconsistent dimension");
        flat.insert(flat.end(), v.begin(), v.end());
    }
    try {
        return DiscreteMeasure(PointSet(dim, std::move(flat)), weights);
    } catch (const std::invalid_argument& e) {
        throw format_error(e.what());
    }
}

}  // namespace

json to_json(const DiscreteMeasure& measure) {
    json out;
    out["atoms"] = atoms_json(measure.atoms());
    out["weights"] = measure.weights();
    return out;
}

json to_json(const MixtureModel& model) {
    json out;
    out["sigma"] = model.sigma();
    out["atoms"] = atoms_json(model.mixing().atoms());
    out["weights"] = model.mixing().weights();
    return out;
}

json to_json(const FitResult& fit) {
    json out = to_json(fit.model);
    out["loglik"] = fit.loglik;
    out["dual_gap"] = fit.dual_gap;
    out["iterations"] = fit.iterations;
    out["converged"] = fit.converged;
    return out;
}

json to_json(const Dendrogram& dg) {
    json merges = json::array();
    for (const Merge& m : dg.merges) merges.push_back(json::array({m.left, m.right, m.height, m.size}));
    json out;
    out["leaves"] = dg.leaves;
    out["merges"] = std::move(merges);
    return out;
}

json to_json(const ComponentSets& sets) {
    json out = json::array();
    for (const auto& s : sets.sets) out.push_back(s);
    return out;
}

json to_json(const ComponentModel& model) {
    json comps = json::array();
    for (const Component& c : model.components) {
        json cj;
        cj["lambda"] = c.lambda;
        cj["atoms"] = atoms_json(c.measure.atoms());
        cj["weights"] = c.measure.weights();
        comps.push_back(std::move(cj));
    }
    json out;
    out["sigma"] = model.sigma;
    out["components"] = std::move(comps);
    if (!model.source.empty()) out["source"] = model.source;
    return out;
}

json to_json(const KSuggestion& suggestion) {
    json gaps = json::array();
    for (const GapEntry& g : suggestion.gaps) gaps.push_back({{"k", g.k}, {"gap", g.gap}});
    return {{"k", suggestion.k}, {"gaps", std::move(gaps)}};
}

json to_json(const PipelineResult& result) {
    json records = json::array();
    for (const SweepRecord& r : result.records) {
        json rj;
        rj["sigma"] = r.sigma;
        rj["loglik"] = r.loglik;
        rj["k_hat"] = r.k_hat;
        rj["bic"] = r.bic;
        rj["fit"] = to_json(r.fit);
        records.push_back(std::move(rj));
    }
    json out;
    out["sigma_hat"] = result.sigma_hat;
    out["k_hat_oversmoothed"] = result.k_hat_oversmoothed;
    out["k_suggested"] = result.k_suggested;
    out["k_used"] = result.k_used;
    out["k_source"] = result.k_overridden ? "override" : "dendrogram-gap";
    out["gap_report"] = to_json(result.suggestion);
    out["records"] = std::move(records);
    out["oversmoothed_fit"] = to_json(result.oversmoothed_fit);
    out["dendrogram"] = to_json(result.dendrogram);
    out["component_model"] = to_json(result.component_model);
    out["labels"] = result.labels;
    return out;
}

json to_json(const GeneratorSpec& spec) {
    json out;
    out["name"] = spec.name;
    out["n"] = spec.n;
    out["sigma_true"] = spec.sigma_true;
    out["seed"] = spec.seed;
    out["weights"] = generator_weights(spec);
    return out;
}

DiscreteMeasure measure_from_json(const json& j) { return read_atoms(j); }

MixtureModel mixture_from_json(const json& j) {
    const auto sigma = get_as<double>(j, "sigma");
    if (!(sigma > 0.0)) throw format_error("sigma must be positive");
    return MixtureModel(sigma, read_atoms(j));
}

Dendrogram dendrogram_from_json(const json& j) {
    Dendrogram dg;
    dg.leaves = get_as<std::size_t>(j, "leaves");
    const json& merges = require(j, "merges");
    if (!merges.is_array()) throw format_error("field \"merges\" must be an array");
    for (const json& m : merges) {
        if (!m.is_array() || m.size() != 4) throw format_error("merge record must be [left,right,height,size]");
        try {
            dg.merges.push_back({m[0].get<std::size_t>(), m[1].get<std::size_t>(), m[2].get<double>(),
                                 m[3].get<std::size_t>()});
        } catch (const json::exception& e) {
            throw format_error(std::string("merge record: ") + e.what());
        }
        const Merge& last = dg.merges.back();
        const std::size_t limit = dg.leaves + dg.merges.size() - 1;
        if (last.left >= limit || last.right >= limit)
            throw format_error("merge record references an unknown node");
    }
    if (dg.leaves > 0 && dg.merges.size() >= dg.leaves) throw format_error("too many merge records");
    return dg;
}

ComponentModel component_model_from_json(const json& j) {
    if (j.is_object() && j.contains("component_model")) return component_model_from_json(j.at("component_model"));
    ComponentModel model;
    model.sigma = get_as<double>(j, "sigma");
    if (!(model.sigma > 0.0)) throw format_error("sigma must be positive");
    const json& comps = require(j, "components");
    if (!comps.is_array() || comps.empty()) throw format_error("field \"components\" must be a nonempty array");
    for (const json& c : comps) {
        Component comp;
        comp.lambda = get_as<double>(c, "lambda");
        if (!(comp.lambda >= 0.0)) throw format_error("lambda must be nonnegative");
        comp.measure = read_atoms(c);
        if (!model.components.empty() && comp.measure.dim() != model.dim())
            throw format_error("components differ in dimension");
        model.components.push_back(std::move(comp));
    }
    if (j.contains("source") && j.at("source").is_string()) model.source = j.at("source").get<std::string>();
    return model;
}

json parse_json(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw format_error(source + ": " + e.what());
    }
}

std::string format_sweep_table(const std::vector<SweepRecord>& records) {
    std::string out = "sigma,loglik,k_hat,bic,atoms,dual_gap\n";
    char buf[256];
    for (const SweepRecord& r : records) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu,%.17g,%zu,%.17g\n", r.sigma, r.loglik, r.k_hat, r.bic,
                      r.fit.measure().size(), r.fit.dual_gap);
        out += buf;
    }
    return out;
}

std::string format_gap_report(const KSuggestion& suggestion) {
    std::ostringstream out;
    for (const GapEntry& g : suggestion.gaps) out << "  K=" << g.k << " gap=" << g.gap << '\n';
    return out.str();
}

std::string dendrogram_svg(const Dendrogram& dg) {
    const std::size_t m = dg.leaves;
    const std::size_t nodes = m + dg.merges.size();
    std::vector<double> x(nodes, 0.0), y(nodes, 0.0);

    // Leaf order from a depth-first walk of each root, left child first.
    std::vector<bool> has_parent(nodes, false);
    for (const Merge& mg : dg.merges) has_parent[mg.left] = has_parent[mg.right] = true;
    std::size_t next_leaf = 0;
    for (std::size_t root = nodes; root-- > 0;) {
        if (has_parent[root]) continue;
        std::vector<std::size_t> stack{root};
        while (!stack.empty()) {
            const std::size_t v = stack.back();
            stack.pop_back();
            if (v < m) {
                x[v] = static_cast<double>(next_leaf++);
            } else {
                stack.push_back(dg.merges[v - m].right);
                stack.push_back(dg.merges[v - m].left);
            }
        }
    }
    double top = 0.0;
    for (std::size_t i = 0; i < dg.merges.size(); ++i) {
        const Merge& mg = dg.merges[i];
        x[m + i] = 0.5 * (x[mg.left] + x[mg.right]);
        y[m + i] = mg.height;
        top = std::max(top, mg.height);
    }
    if (top <= 0.0) top = 1.0;

    const double width = 40.0 + 12.0 * static_cast<double>(std::max<std::size_t>(m, 1));
    const double height = 320.0;
    auto px = [&](double v) { return 20.0 + 12.0 * v + 6.0; };
    auto py = [&](double h) { return height - 20.0 - (height - 40.0) * h / top; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\">\n<g stroke=\"black\" fill=\"none\" stroke-width=\"1\">\n";
    for (std::size_t i = 0; i < dg.merges.size(); ++i) {
        const Merge& mg = dg.merges[i];
        const double h = py(y[m + i]);
        out << "<polyline points=\"" << px(x[mg.left]) << ',' << py(y[mg.left]) << ' ' << px(x[mg.left]) << ','
            << h << ' ' << px(x[mg.right]) << ',' << h << ' ' << px(x[mg.right]) << ',' << py(y[mg.right])
            << "\"/>\n";
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

}  // namespace latentscale
