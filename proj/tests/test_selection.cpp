#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "latentscale/data.hpp"
#include "latentscale/eval.hpp"
#include "latentscale/selection.hpp"

using namespace latentscale;
using namespace testing;

namespace {

SweepRecord record(double sigma, double loglik, std::size_t k_hat, std::size_t n, std::size_t d) {
    SweepRecord r;
    r.sigma = sigma;
    r.loglik = loglik;
    r.k_hat = k_hat;
    r.bic = bic_score(loglik, d, k_hat, n);
    return r;
}

Dataset small_squares(std::uint64_t seed) {
    GeneratorSpec s;
    s.name = "four-squares";
    s.n = 200;
    s.sigma_true = 0.1;
    s.seed = seed;
    return generate(s);
}

}  // namespace

TEST_CASE("default bandwidth grid") {
    const Dataset unit = dataset_1d({-1.0, 1.0});
    const auto g2 = default_sigma_grid(unit, 2);
    REQUIRE(g2.size() == 2);
    CHECK(g2[0] == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(g2[1] == doctest::Approx(1.0).epsilon(1e-15));
    const auto g3 = default_sigma_grid(unit, 3);
    CHECK(g3[1] == doctest::Approx(std::sqrt(0.05)).epsilon(1e-14));
    CHECK(g3[1] == doctest::Approx(0.2236).epsilon(1e-4));

    // RMS of per-coordinate standard deviations: sqrt((1 + 4) / 2).
    const Dataset two = dataset_2d({-1.0, -2.0, 1.0, 2.0});
    const auto g = default_sigma_grid(two);
    CHECK(g.size() == 16);
    CHECK(g.back() == doctest::Approx(std::sqrt(2.5)));
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);

    CHECK_THROWS_AS(default_sigma_grid(dataset_1d({2.0, 2.0}), 4), std::invalid_argument);
    CHECK_THROWS_AS(default_sigma_grid(unit, 1), std::invalid_argument);
}

TEST_CASE("BIC arithmetic and bandwidth choice") {
    CHECK(bic_score(-500.0, 2, 4, 100) == doctest::Approx(1036.84).epsilon(1e-5));
    CHECK(bic_score(-510.0, 2, 2, 100) == doctest::Approx(1038.42).epsilon(1e-5));
    CHECK(select_sigma({record(0.1, -500.0, 4, 100, 2), record(0.2, -510.0, 2, 100, 2)}) == 0.1);
    CHECK(select_sigma({record(0.1, -500.0, 4, 100, 2), record(0.2, -500.0, 2, 100, 2)}) == 0.2);
    CHECK(select_sigma({record(0.7, -1.0, 1, 10, 1)}) == 0.7);
    // exact tie goes to the smaller bandwidth, regardless of order
    CHECK(select_sigma({record(0.4, -50.0, 2, 100, 2), record(0.3, -50.0, 2, 100, 2)}) == 0.3);
    CHECK_THROWS_AS(select_sigma({}), std::invalid_argument);
}

TEST_CASE("stream seeds") {
    CHECK(stream_seed(17, 0) == 17);
    std::set<std::uint64_t> seen;
    for (std::size_t i = 0; i < 100; ++i) seen.insert(stream_seed(5, i));
    CHECK(seen.size() == 100);
}

TEST_CASE("a one-bandwidth sweep is a fit plus a count") {
    const Dataset data = small_squares(1);
    SolverConfig cfg;
    cfg.seed = 3;
    const auto recs = sweep(data, {0.3}, cfg);
    REQUIRE(recs.size() == 1);
    const FitResult fit = fit_npmle(data, 0.3, cfg);
    CHECK(recs[0].fit.model == fit.model);
    CHECK(recs[0].loglik == fit.loglik);
    CHECK(recs[0].k_hat == eps_component_count(fit.measure(), 0.6).count);
    CHECK(recs[0].bic == bic_score(recs[0].loglik, 2, recs[0].k_hat, data.size()));
}

TEST_CASE("a very wide bandwidth gives one group") {
    const Dataset data = dataset_1d({-1.0, -0.4, 0.0, 0.3, 1.0, 0.8});
    SolverConfig cfg;
    const auto recs = sweep(data, {5.0}, cfg);
    CHECK(recs[0].k_hat == 1);
}

TEST_CASE("sweep errors") {
    const Dataset data = dataset_1d({0.0, 1.0});
    SolverConfig cfg;
    CHECK_THROWS_AS(sweep(data, {}, cfg), std::invalid_argument);
    CHECK_THROWS_AS(sweep(data, {0.5, -1.0}, cfg), std::invalid_argument);
    cfg.dual_tol = -1.0;
    try {
        sweep(data, {0.25}, cfg);
        FAIL("expected the solver to reject the configuration");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("sigma 0.25") != std::string::npos);
    }
}

TEST_CASE("threaded sweep equals the sequential one") {
    const Dataset data = small_squares(2);
    SolverConfig cfg;
    cfg.seed = 9;
    const std::vector<double> sigmas{0.15, 0.3, 0.6, 1.2, 2.4};
    const auto a = sweep(data, sigmas, cfg, 1);
    const auto b = sweep(data, sigmas, cfg, 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].sigma == sigmas[i]);
        CHECK(a[i].fit.model == b[i].fit.model);
        CHECK(a[i].bic == b[i].bic);
    }
}

TEST_CASE("pipeline on well separated squares") {
    const Dataset data = small_squares(1);
    SolverConfig cfg;
    cfg.seed = 1;
    const auto grid = default_sigma_grid(data, 8);
    PipelineOptions opt;
    opt.k_override = 4;
    const PipelineResult r = run_pipeline(data, grid, cfg, opt);

    CHECK(std::find(grid.begin(), grid.end(), r.sigma_hat) != grid.end());
    CHECK(r.oversmoothed_fit.sigma() == 2.0 * r.sigma_hat);
    CHECK(r.k_used == 4);
    CHECK(r.k_overridden);
    CHECK(r.component_model.size() == 4);
    CHECK(r.component_model.source == "override");
    CHECK(ari(r.labels, *data.labels) >= 0.9);
    for (const SweepRecord& rec : r.records) {
        CHECK(rec.bic == bic_score(rec.loglik, data.dim(), rec.k_hat, data.size()));
        CHECK(rec.k_hat >= 1);
    }

    SUBCASE("bit reproducible") {
        const PipelineResult again = run_pipeline(data, grid, cfg, opt);
        CHECK(again.labels == r.labels);
        CHECK(again.component_model == r.component_model);
        CHECK(again.dendrogram == r.dendrogram);
        CHECK(again.oversmoothed_fit.model == r.oversmoothed_fit.model);
    }
    SUBCASE("one cluster") {
        opt.k_override = 1;
        const PipelineResult one = run_pipeline(data, grid, cfg, opt);
        CHECK(one.component_model.size() == 1);
        for (int l : one.labels) CHECK(l == 0);
    }
    SUBCASE("override beyond the atom count") {
        opt.k_override = r.oversmoothed_fit.measure().size() + 1;
        CHECK_THROWS_AS(run_pipeline(data, grid, cfg, opt), std::invalid_argument);
    }
    SUBCASE("suggested K is used without an override") {
        const PipelineResult s = run_pipeline(data, grid, cfg, {});
        CHECK_FALSE(s.k_overridden);
        CHECK(s.k_used == s.k_suggested);
        CHECK(s.component_model.source == "dendrogram-gap");
        CHECK(s.component_model.size() == s.k_used);
    }
}
