#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "latentscale/components.hpp"

using namespace latentscale;
using namespace testing;

namespace {

ComponentModel symmetric_pair(double l0, double l1) {
    ComponentModel m;
    m.sigma = 1.0;
    m.components.push_back({l0, measure_1d({-5.0}, {1.0})});
    m.components.push_back({l1, measure_1d({5.0}, {1.0})});
    return m;
}

int classify_at(const ComponentModel& m, double x) {
    return static_cast<int>(bayes_classify(m, std::span<const double>(&x, 1)));
}

}  // namespace

TEST_CASE("decompose splits mass and renormalises") {
    const DiscreteMeasure g = measure_1d({0.0, 1.0, 10.0}, {0.3, 0.2, 0.5});
    const ComponentModel m = decompose(g, {0, 0, 1}, 1.0);
    REQUIRE(m.size() == 2);
    CHECK(m.components[0].lambda == doctest::Approx(0.5));
    CHECK(m.components[1].lambda == doctest::Approx(0.5));
    CHECK(m.components[0].measure.weight(0) == doctest::Approx(0.6));
    CHECK(m.components[0].measure.weight(1) == doctest::Approx(0.4));
    CHECK(m.components[1].measure.weight(0) == doctest::Approx(1.0));

    const ComponentModel one = decompose(g, {0, 0, 0}, 1.0);
    REQUIRE(one.size() == 1);
    CHECK(one.components[0].lambda == doctest::Approx(1.0));
    CHECK(one.components[0].measure == g);
}

TEST_CASE("decompose is equivariant to relabeling") {
    const DiscreteMeasure g = measure_1d({0.0, 1.0, 10.0, 11.0}, {0.1, 0.2, 0.3, 0.4});
    const ComponentModel a = decompose(g, {0, 0, 1, 2}, 1.0);
    const ComponentModel b = decompose(g, {2, 2, 0, 1}, 1.0);
    CHECK(a.components[0] == b.components[2]);
    CHECK(a.components[1] == b.components[0]);
    CHECK(a.components[2] == b.components[1]);
}

TEST_CASE("decompose rejects bad labelings") {
    const DiscreteMeasure g = measure_1d({0.0, 1.0}, {0.5, 0.5});
    CHECK_THROWS_AS(decompose(g, {0, 2}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(decompose(g, {0, -1}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(decompose(g, {0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(decompose(g, {0, 0}, 0.0), std::invalid_argument);
}

TEST_CASE("class conditional densities") {
    const DiscreteMeasure g = measure_1d({0.0, 3.0}, {0.4, 0.6});
    const ComponentModel one = decompose(g, {0, 0}, 0.8);
    const double x = 1.1;
    const std::span<const double> xs(&x, 1);
    CHECK(class_conditional_log_density(one, 0, xs) == doctest::Approx(mixture_log_density(g, 0.8, xs)).epsilon(1e-14));

    ComponentModel m;
    m.sigma = 1.0;
    m.components.push_back({1.0, measure_1d({0.0}, {1.0})});
    const double zero = 0.0;
    CHECK(class_conditional_log_density(m, 0, std::span<const double>(&zero, 1)) == doctest::Approx(-0.918939).epsilon(1e-6));
    CHECK_THROWS_AS(class_conditional_log_density(m, 1, xs), std::invalid_argument);
}

TEST_CASE("components reconstruct the mixture") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> atoms, w;
    for (int j = 0; j < 12; ++j) {
        atoms.push_back(3.0 * z(rng));
        atoms.push_back(3.0 * z(rng));
        w.push_back(u(rng));
    }
    const DiscreteMeasure g(PointSet(2, atoms), w);
    Labeling labels;
    for (int j = 0; j < 12; ++j) labels.push_back(j % 4);
    const ComponentModel m = decompose(g, labels, 0.9);
    double total = 0.0;
    for (const auto& c : m.components) total += c.lambda;
    CHECK(std::abs(total - 1.0) <= 1e-12);

    for (int i = 0; i < 200; ++i) {
        const std::vector<double> x{3.0 * z(rng), 3.0 * z(rng)};
        double sum = 0.0;
        for (std::size_t k = 0; k < m.size(); ++k)
            sum += m.components[k].lambda * std::exp(class_conditional_log_density(m, k, x));
        const double full = naive_density(g, 0.9, x);
        CHECK(std::abs(sum - full) <= 1e-12 * full);
        CHECK(std::abs(std::exp(model_log_density(m, x)) - full) <= 1e-12 * full);
    }
}

TEST_CASE("Bayes classifier on symmetric components") {
    const ComponentModel even = symmetric_pair(0.5, 0.5);
    CHECK(classify_at(even, -4.0) == 0);
    CHECK(classify_at(even, 4.0) == 1);
    CHECK(classify_at(even, 0.0) == 0);
    CHECK(classify_at(symmetric_pair(0.9, 0.1), 0.0) == 0);
    CHECK(classify_at(symmetric_pair(0.1, 0.9), 0.0) == 1);
    // log(0.9/0.1) / 10 is where the boundary moves.
    CHECK(classify_at(symmetric_pair(0.9, 0.1), 0.2) == 0);
    CHECK(classify_at(symmetric_pair(0.9, 0.1), 0.25) == 1);
}

TEST_CASE("Bayes classifier ignores a common lambda scale") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-8.0, 8.0);
    ComponentModel a = symmetric_pair(0.3, 0.7);
    ComponentModel b = a;
    for (auto& c : b.components) c.lambda *= 7.5;
    for (int i = 0; i < 200; ++i) {
        const double x = u(rng);
        CHECK(classify_at(a, x) == classify_at(b, x));
    }
}

TEST_CASE("classifying datasets") {
    const ComponentModel even = symmetric_pair(0.5, 0.5);
    CHECK(classify_dataset(even, dataset_1d({-4.0, 4.0})) == Labeling{0, 1});

    ComponentModel single;
    single.sigma = 1.0;
    single.components.push_back({1.0, measure_1d({0.0, 2.0}, {0.5, 0.5})});
    CHECK(classify_dataset(single, dataset_1d({-3.0, 0.0, 7.0})) == Labeling{0, 0, 0});
    CHECK_THROWS_AS(classify_dataset(even, dataset_2d({0.0, 0.0})), std::invalid_argument);
}

TEST_CASE("well separated atoms classify into their own component") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);
    std::uniform_real_distribution<double> weight(1e-3, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> atoms;
        Labeling labels;
        std::vector<double> w;
        for (int k = 0; k < 3; ++k)
            for (int j = 0; j < 3; ++j) {
                atoms.push_back(8.0 * k + jitter(rng));
                labels.push_back(k);
                w.push_back(weight(rng));
            }
        // Components are at least 7 sigma apart with sigma = 1.
        const DiscreteMeasure g = measure_1d(atoms, w);
        const ComponentModel m = decompose(g, labels, 1.0);
        Dataset own;
        own.points = g.atoms();
        CHECK(classify_dataset(m, own) == labels);
    }
}

TEST_CASE("classification is row-permutation equivariant") {
    const ComponentModel m = decompose(measure_1d({-2.0, 0.0, 3.0}, {0.2, 0.3, 0.5}), {0, 1, 2}, 0.7);
    const Dataset a = dataset_1d({-2.5, -0.8, 0.4, 1.6, 2.2, 4.0});
    const Dataset b = dataset_1d({4.0, 1.6, -2.5, 2.2, 0.4, -0.8});
    const Labeling la = classify_dataset(m, a);
    const Labeling lb = classify_dataset(m, b);
    const std::vector<int> perm{5, 3, 0, 4, 2, 1};
    for (std::size_t i = 0; i < perm.size(); ++i) CHECK(lb[i] == la[perm[i]]);
}

TEST_CASE("level-set decomposition") {
    const DiscreteMeasure g = measure_1d({0.0, 0.5, 10.0, 20.0}, {0.45, 0.45, 0.09, 0.01});
    // delta 1: the atom at 20 has smoothed density 0.005 and is dropped; it
    // joins the Voronoi cell of its nearest kept set.
    const ComponentModel m = decompose_by_level_sets(g, 1.0, 1.0, 0.01);
    REQUIRE(m.size() == 2);
    CHECK(m.source == "level-set");
    CHECK(m.components[0].lambda == doctest::Approx(0.9));
    CHECK(m.components[1].lambda == doctest::Approx(0.1));
    CHECK(m.components[1].measure.size() == 2);
}
