#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "latentscale/data.hpp"
#include "latentscale/errors.hpp"

using namespace latentscale;
using namespace testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "latentscale_test_data";
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

GeneratorSpec spec(const std::string& name, std::size_t n, double sigma_true, std::uint64_t seed) {
    GeneratorSpec s;
    s.name = name;
    s.n = n;
    s.sigma_true = sigma_true;
    s.seed = seed;
    return s;
}

}  // namespace

TEST_CASE("generator label frequencies follow the mixing weights") {
    const std::size_t n = 20000;
    const Dataset d = generate(spec("four-squares", n, 0.5, 3));
    REQUIRE(d.labels);
    std::vector<double> freq(4, 0.0);
    for (int l : *d.labels) freq[static_cast<std::size_t>(l)] += 1.0 / n;
    const std::vector<double> expected{0.4, 0.3, 0.2, 0.1};
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(freq[k] - expected[k]) <= 3.0 / std::sqrt(double(n)));
}

TEST_CASE("noiseless circles lie on their radii") {
    const Dataset d = generate(spec("circles-2", 500, 0.0, 1));
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double r = std::hypot(d.points[i][0], d.points[i][1]);
        const double target = (*d.labels)[i] == 0 ? 1.0 : 3.0;
        CHECK(std::abs(r - target) <= 1e-12);
    }
    const Dataset c3 = generate(spec("circles-3", 300, 0.0, 2));
    for (std::size_t i = 0; i < c3.size(); ++i) {
        const double r = std::hypot(c3.points[i][0], c3.points[i][1]);
        CHECK(std::abs(r - std::vector<double>{1.0, 5.0, 9.0}[(*c3.labels)[i]]) <= 1e-12);
    }
}

TEST_CASE("noiseless moons and squares stay on their supports") {
    const Dataset moons = generate(spec("two-moons", 400, 0.0, 4));
    for (std::size_t i = 0; i < moons.size(); ++i) {
        const double x = moons.points[i][0], y = moons.points[i][1];
        if ((*moons.labels)[i] == 0) {
            CHECK(std::abs(std::hypot(x, y) - 1.0) <= 1e-12);
            CHECK(y >= -1e-12);
        } else {
            CHECK(std::abs(std::hypot(1.0 - x, 0.5 - y) - 1.0) <= 1e-12);
            CHECK(y <= 0.5 + 1e-12);
        }
    }
    const Dataset sq = generate(spec("four-squares", 400, 0.0, 4));
    const double cx[4] = {1.5, -1.5, 1.5, -1.5}, cy[4] = {1.5, -1.5, -1.5, 1.5};
    for (std::size_t i = 0; i < sq.size(); ++i) {
        const int k = (*sq.labels)[i];
        CHECK(std::abs(sq.points[i][0] - cx[k]) <= 1.0);
        CHECK(std::abs(sq.points[i][1] - cy[k]) <= 1.0);
    }
}

TEST_CASE("generator weights and names") {
    const auto w = generator_weights(spec("two-moons", 1, 0.5, 0));
    CHECK(w[0] == doctest::Approx(1.0 / 3.0));
    CHECK(w[1] == doctest::Approx(2.0 / 3.0));
    CHECK(generator_components("circles-3") == 3);
    CHECK_THROWS_AS(generate(spec("spirals", 10, 0.5, 0)), std::invalid_argument);
    CHECK_THROWS_AS(generate(spec("four-squares", 0, 0.5, 0)), std::invalid_argument);
    for (const auto& name : generator_names()) {
        const Dataset d = generate(spec(name, 200, 0.5, 9));
        CHECK_NOTHROW(d.validate());
        for (int l : *d.labels) {
            CHECK(l >= 0);
            CHECK(l < static_cast<int>(generator_components(name)));
        }
    }
}

TEST_CASE("four modes uses its default centres") {
    const Dataset d = generate(spec("four-modes", 4000, 0.0, 1));
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(std::abs(std::abs(d.points[i][0]) - 2.0) == 0.0);
        CHECK(std::abs(std::abs(d.points[i][1]) - 2.0) == 0.0);
    }
    GeneratorSpec custom = spec("four-modes", 10, 0.1, 1);
    custom.centers = {0.0, 0.0};
    CHECK_THROWS_AS(generate(custom), std::invalid_argument);
}

TEST_CASE("sample mean approaches the weighted centroid") {
    // 0.4(1.5,1.5) + 0.3(-1.5,-1.5) + 0.2(1.5,-1.5) + 0.1(-1.5,1.5) = (0.3, 0)
    const double centroid[2] = {0.3, 0.0};
    // Per-coordinate variance: centre spread + Unif[-1,1] + noise.
    const double var[2] = {2.25 - 0.09 + 1.0 / 3.0 + 0.25, 2.25 + 1.0 / 3.0 + 0.25};
    const std::size_t n = 2000;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Dataset d = generate(spec("four-squares", n, 0.5, seed));
        for (int k = 0; k < 2; ++k) {
            double m = 0.0;
            for (std::size_t i = 0; i < n; ++i) m += d.points[i][k];
            m /= n;
            CHECK(std::abs(m - centroid[k]) <= 5.0 * std::sqrt(var[k]) / std::sqrt(double(n)));
        }
    }
}

TEST_CASE("generation is deterministic") {
    CHECK(format_csv(generate(spec("circles-3", 300, 0.5, 42))) == format_csv(generate(spec("circles-3", 300, 0.5, 42))));
    CHECK(format_csv(generate(spec("circles-3", 300, 0.5, 42))) != format_csv(generate(spec("circles-3", 300, 0.5, 43))));
}

TEST_CASE("CSV round trip preserves every bit") {
    const Dataset d = generate(spec("two-moons", 250, 0.5, 8));
    const fs::path p = scratch("roundtrip.csv");
    save_csv(d, p);
    const Dataset back = load_csv(p);
    CHECK(back.points == d.points);
    CHECK(back.labels == d.labels);
    CHECK(load_labels(p) == *d.labels);

    Dataset unlabeled;
    unlabeled.points = PointSet(1, {0.1, 1.0 / 3.0, -2e-300});
    const Dataset u = parse_csv(format_csv(unlabeled));
    CHECK(u.points == unlabeled.points);
    CHECK_FALSE(u.labels);
}

TEST_CASE("CSV with a label header") {
    const Dataset d = parse_csv("x0,x1,label\n1,2,0\n3,4,1\n5,6,0\n");
    CHECK(d.size() == 3);
    CHECK(d.dim() == 2);
    REQUIRE(d.labels);
    CHECK(*d.labels == std::vector<int>{0, 1, 0});
    const Dataset bare = parse_csv("1.5,2\n3,4\n");
    CHECK(bare.dim() == 2);
    CHECK_FALSE(bare.labels);
}

TEST_CASE("CSV errors") {
    CHECK_THROWS_AS(load_csv(scratch("does_not_exist.csv")), not_found_error);
    try {
        parse_csv("x0,x1\n1,2\n3,abc\n");
        FAIL("expected a parse error");
    } catch (const parse_error& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_csv("x0,x1\n1,2\n3\n"), format_error);
    CHECK_THROWS_AS(parse_csv("x0,label\n1,0.5\n"), parse_error);
    CHECK_THROWS_AS(parse_csv("x0\n"), format_error);
    CHECK_THROWS_AS(parse_csv("label\n1\n"), format_error);
}

TEST_CASE("labels files") {
    const fs::path p = scratch("labels.csv");
    write_file_atomic(p, format_labels({2, 0, 1}));
    CHECK(load_labels(p) == std::vector<int>{2, 0, 1});
    write_text(p, "3\n4\n");
    CHECK(load_labels(p) == std::vector<int>{3, 4});
    write_text(p, "a,b\n1,2\n");
    CHECK_THROWS_AS(load_labels(p), format_error);
    CHECK_FALSE(fs::exists(fs::path(p.string() + ".tmp")));
}
