#include "latentscale/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "latentscale/components.hpp"
#include "latentscale/data.hpp"
#include "latentscale/errors.hpp"
#include "latentscale/eval.hpp"
#include "latentscale/io.hpp"
#include "latentscale/npmle.hpp"
#include "latentscale/selection.hpp"
#include "latentscale/structure.hpp"

namespace latentscale {

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string dataset;
    std::size_t n = 500;
    double sigma_true = 0.5;
    std::uint64_t seed = 0;
    std::string in, out, model, svg, truth, labels_out;
    double sigma = 0.0;
    std::vector<double> sigmas;
    std::size_t grid_count = 16;
    std::size_t k = 0;
    std::size_t k_max = 10;
    std::size_t threads = 1;
    std::size_t max_iter = 2000;
    std::string timestamp = "off";
};

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void stamp(json& doc, const Options& o) {
    if (o.timestamp == "on") doc["timestamp"] = utc_timestamp();
}

void emit(const std::string& path, const std::string& contents, std::ostream& out) {
    if (path.empty() || path == "-")
        out << contents;
    else
        write_file_atomic(path, contents);
}

SolverConfig solver_config(const Options& o) {
    SolverConfig cfg;
    cfg.seed = o.seed;
    cfg.max_iter = o.max_iter;
    return cfg;
}

std::vector<double> sigma_grid(const Options& o, const Dataset& data) {
    return o.sigmas.empty() ? default_sigma_grid(data, o.grid_count) : o.sigmas;
}

int cmd_gen(const Options& o, std::ostream& out) {
    GeneratorSpec spec;
    spec.name = o.dataset;
    spec.n = o.n;
    spec.sigma_true = o.sigma_true;
    spec.seed = o.seed;
    const Dataset data = generate(spec);
    write_file_atomic(o.out, format_csv(data));
    json sidecar;
    sidecar["spec"] = to_json(spec);
    stamp(sidecar, o);
    const fs::path side = fs::path(o.out).replace_extension(".spec.json");
    write_file_atomic(side, sidecar.dump(2) + "\n");
    out << "wrote " << data.size() << " rows to " << o.out << "\n";
    return exit_ok;
}

int cmd_fit(const Options& o, std::ostream& out) {
    const Dataset data = load_csv(o.in);
    const FitResult fit = fit_npmle(data, o.sigma, solver_config(o));
    json doc = to_json(fit);
    stamp(doc, o);
    emit(o.out, doc.dump(2) + "\n", out);
    return exit_ok;
}

int cmd_sweep(const Options& o, std::ostream& out) {
    const Dataset data = load_csv(o.in);
    const auto records = sweep(data, sigma_grid(o, data), solver_config(o), o.threads);
    emit(o.out, format_sweep_table(records), out);
    return exit_ok;
}

int cmd_cluster(const Options& o, std::ostream& out) {
    const Dataset data = load_csv(o.in);
    PipelineOptions popt;
    if (o.k > 0) popt.k_override = o.k;
    popt.k_max = o.k_max;
    popt.threads = o.threads;
    const PipelineResult result = run_pipeline(data, sigma_grid(o, data), solver_config(o), popt);

    out << "sigma_hat: " << result.sigma_hat << "\n"
        << "k_hat(2*sigma_hat): " << result.k_hat_oversmoothed << "\n"
        << "k_suggested: " << result.k_suggested << "\n"
        << "gap_report:\n"
        << format_gap_report(result.suggestion)
        << "k_used: " << result.k_used << (result.k_overridden ? " (override)" : " (dendrogram-gap)") << "\n";

    json doc = to_json(result);
    stamp(doc, o);
    if (!o.out.empty()) write_file_atomic(o.out, doc.dump(2) + "\n");
    if (!o.labels_out.empty()) write_file_atomic(o.labels_out, format_labels(result.labels));
    return exit_ok;
}

int cmd_predict(const Options& o, std::ostream& out) {
    const ComponentModel model = component_model_from_json(parse_json(read_file(o.model), o.model));
    const Dataset data = load_csv(o.in);
    emit(o.out, format_labels(classify_dataset(model, data)), out);
    return exit_ok;
}

int cmd_dendro(const Options& o, std::ostream& out) {
    const json doc = parse_json(read_file(o.in), o.in);
    Dendrogram dg;
    if (doc.contains("dendrogram"))
        dg = dendrogram_from_json(doc.at("dendrogram"));
    else if (doc.contains("merges"))
        dg = dendrogram_from_json(doc);
    else
        dg = single_linkage(measure_from_json(doc));
    emit(o.out, to_json(dg).dump(2) + "\n", out);
    if (!o.svg.empty()) write_file_atomic(o.svg, dendrogram_svg(dg));
    return exit_ok;
}

int cmd_eval(const Options& o, std::ostream& out) {
    const auto pred = load_labels(o.in);
    const auto truth = load_labels(o.truth);
    json doc;
    doc["ari"] = ari(pred, truth);
    doc["n"] = pred.size();
    emit(o.out, doc.dump() + "\n", out);
    return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Multiscale NPMLE clustering", "latentscale"};
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all", "Show help for every command");

    auto add_seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "Random seed")->capture_default_str(); };
    auto add_threads = [&](CLI::App* c) {
        c->add_option("--threads", o.threads, "Worker threads for the bandwidth sweep")
            ->envname("LATENTSCALE_THREADS")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    };
    auto add_timestamp = [&](CLI::App* c) {
        c->add_option("--timestamp", o.timestamp, "Stamp JSON outputs with the UTC time")
            ->check(CLI::IsMember({"on", "off"}))
            ->capture_default_str();
    };
    auto add_solver = [&](CLI::App* c) {
        add_seed(c);
        c->add_option("--max-iter", o.max_iter, "Solver iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
    };
    auto add_grid = [&](CLI::App* c) {
        c->add_option("--sigmas", o.sigmas, "Comma-separated bandwidth grid")->delimiter(',')->check(CLI::PositiveNumber);
        c->add_option("--grid-count", o.grid_count, "Size of the default geometric grid")
            ->check(CLI::Range(std::size_t{2}, std::size_t{1000}))
            ->capture_default_str();
    };

    auto* gen = app.add_subcommand("gen", "Sample a synthetic dataset");
    gen->add_option("--dataset", o.dataset, "Generator name")->required()->check(CLI::IsMember(generator_names()));
    gen->add_option("--n", o.n, "Sample size")->check(CLI::PositiveNumber)->capture_default_str();
    gen->add_option("--sigma-true", o.sigma_true, "Noise bandwidth")->check(CLI::NonNegativeNumber)->capture_default_str();
    gen->add_option("--out", o.out, "Output CSV; provenance goes to <out>.spec.json")->required();
    add_seed(gen);
    add_timestamp(gen);

    auto* fit = app.add_subcommand("fit", "Fit the NPMLE at one bandwidth");
    fit->add_option("--in", o.in, "Input CSV")->required();
    fit->add_option("--sigma", o.sigma, "Bandwidth")->required()->check(CLI::PositiveNumber);
    fit->add_option("--out", o.out, "Output JSON (default: stdout)");
    add_solver(fit);
    add_timestamp(fit);

    auto* sw = app.add_subcommand("sweep", "Fit across a bandwidth grid and tabulate BIC");
    sw->add_option("--in", o.in, "Input CSV")->required();
    sw->add_option("--out", o.out, "Output CSV table (default: stdout)");
    add_grid(sw);
    add_solver(sw);
    add_threads(sw);

    auto* cl = app.add_subcommand("cluster", "Run the full multiscale clustering pipeline");
    cl->add_option("--in", o.in, "Input CSV")->required();
    cl->add_option("--out", o.out, "PipelineResult JSON");
    cl->add_option("--labels-out", o.labels_out, "In-sample labels CSV");
    cl->add_option("--k", o.k, "Number of clusters (overrides the dendrogram suggestion)")->check(CLI::PositiveNumber);
    cl->add_option("--k-max", o.k_max, "Upper clamp for the suggested K")->check(CLI::PositiveNumber)->capture_default_str();
    add_grid(cl);
    add_solver(cl);
    add_threads(cl);
    add_timestamp(cl);

    auto* pr = app.add_subcommand("predict", "Label rows with a stored component model");
    pr->add_option("--model", o.model, "ComponentModel or PipelineResult JSON")->required();
    pr->add_option("--in", o.in, "Input CSV")->required();
    pr->add_option("--out", o.out, "Labels CSV (default: stdout)");

    auto* dd = app.add_subcommand("dendro", "Export the single-linkage dendrogram of fitted atoms");
    dd->add_option("--in", o.in, "Fit, measure, dendrogram or PipelineResult JSON")->required();
    dd->add_option("--out", o.out, "Merge-record JSON (default: stdout)");
    dd->add_option("--svg", o.svg, "Also write a flat SVG rendering");

    auto* ev = app.add_subcommand("eval", "Adjusted Rand index between two labelings");
    ev->add_option("--in", o.in, "Predicted labels CSV")->required();
    ev->add_option("--truth", o.truth, "Reference labels CSV (or dataset CSV with a label column)")->required();
    ev->add_option("--out", o.out, "Report JSON (default: stdout)");

    std::vector<const char*> argv{"latentscale"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        CLI::App* active = &app;
        for (CLI::App* sub : app.get_subcommands()) active = sub;
        err << active->help();
        return exit_usage;
    }

    try {
        if (*gen) return cmd_gen(o, out);
        if (*fit) return cmd_fit(o, out);
        if (*sw) return cmd_sweep(o, out);
        if (*cl) return cmd_cluster(o, out);
        if (*pr) return cmd_predict(o, out);
        if (*dd) return cmd_dendro(o, out);
        if (*ev) return cmd_eval(o, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_runtime;
    }
    return exit_usage;
}

}  // namespace latentscale
