#include "latentscale/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "latentscale/errors.hpp"

namespace latentscale {

namespace {

constexpr double kPi = std::numbers::pi;

// Draws a latent location theta from component k of the named G0.
void draw_latent(const GeneratorSpec& spec, std::size_t k, std::mt19937_64& rng, double out[2]) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::string& name = spec.name;
    if (name == "four-squares") {
        static constexpr double centres[4][2] = {{1.5, 1.5}, {-1.5, -1.5}, {1.5, -1.5}, {-1.5, 1.5}};
        std::uniform_real_distribution<double> side(-1.0, 1.0);
        out[0] = centres[k][0] + side(rng);
        out[1] = centres[k][1] + side(rng);
    } else if (name == "circles-2" || name == "circles-3") {
        static constexpr double radii2[2] = {1.0, 3.0};
        static constexpr double radii3[3] = {1.0, 5.0, 9.0};
        const double radius = name == "circles-2" ? radii2[k] : radii3[k];
        const double t = 2.0 * kPi * unit(rng);
        out[0] = radius * std::cos(t);
        out[1] = radius * std::sin(t);
    } else if (name == "two-moons") {
        const double t = kPi * unit(rng);
        if (k == 0) {
            out[0] = std::cos(t);
            out[1] = std::sin(t);
        } else {
            out[0] = 1.0 - std::cos(t);
            out[1] = 0.5 - std::sin(t);
        }
    } else {  // four-modes
        out[0] = spec.centers[2 * k];
        out[1] = spec.centers[2 * k + 1];
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_row(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

bool parse_double(std::string_view s, double& v) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

bool parse_int(std::string_view s, int& v) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::pair<std::size_t, std::vector<std::string_view>>> rows;  // (line, cells)
};

// Cells view into `text`, which must outlive the table.
CsvTable tokenize(const std::string& text, const std::string& source) {
    CsvTable table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool first = true;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = trim(std::string_view(text).substr(pos, end - pos));
        ++line_no;
        pos = end + 1;
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        auto cells = split_row(line);
        if (first) {
            first = false;
            double probe = 0.0;
            const bool numeric = std::all_of(cells.begin(), cells.end(),
                                             [&](std::string_view c) { return parse_double(c, probe); });
            if (!numeric) {
                for (auto c : cells) table.header.emplace_back(c);
                continue;
            }
        }
        table.rows.emplace_back(line_no, std::move(cells));
    }
    if (table.rows.empty()) throw format_error(source + ": no data rows");
    return table;
}

}  // namespace

const std::vector<std::string>& generator_names() {
    static const std::vector<std::string> names = {"four-squares", "circles-2", "circles-3",
                                                   "two-moons", "four-modes"};
    return names;
}

std::size_t generator_components(const std::string& name) {
    if (name == "four-squares" || name == "four-modes") return 4;
    if (name == "circles-2" || name == "two-moons") return 2;
    if (name == "circles-3") return 3;
    throw std::invalid_argument("unknown generator: " + name);
}

std::vector<double> generator_weights(const GeneratorSpec& spec) {
    const std::string& name = spec.name;
    if (name == "four-squares") return {0.4, 0.3, 0.2, 0.1};
    if (name == "circles-2") return {0.5, 0.5};
    if (name == "circles-3") return {0.3, 0.3, 0.4};
    // The printed weights 0.3 and 0.6 do not sum to one.
    if (name == "two-moons") return {0.3 / 0.9, 0.6 / 0.9};
    if (name == "four-modes") {
        if (spec.weights.empty()) return {0.4, 0.3, 0.2, 0.1};
        if (spec.weights.size() != 4) throw std::invalid_argument("four-modes needs 4 weights");
        return spec.weights;
    }
    throw std::invalid_argument("unknown generator: " + name);
}

Dataset generate(const GeneratorSpec& spec_in) {
    GeneratorSpec spec = spec_in;
    if (spec.n == 0) throw std::invalid_argument("generate: n must be >= 1");
    if (!(spec.sigma_true >= 0.0)) throw std::invalid_argument("generate: sigma_true must be >= 0");
    if (spec.name == "four-modes") {
        if (spec.centers.empty()) spec.centers = {-2.0, -2.0, 2.0, -2.0, -2.0, 2.0, 2.0, 2.0};
        if (spec.centers.size() != 8) throw std::invalid_argument("four-modes needs 4 centres");
    }
    const std::vector<double> weights = generator_weights(spec);

    std::mt19937_64 rng(spec.seed);
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::normal_distribution<double> noise(0.0, 1.0);

    Dataset data;
    data.name = spec.name;
    data.points = PointSet(2);
    data.points.reserve(spec.n);
    std::vector<int> labels;
    labels.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const std::size_t k = pick(rng);
        double p[2];
        draw_latent(spec, k, rng, p);
        p[0] += spec.sigma_true * noise(rng);
        p[1] += spec.sigma_true * noise(rng);
        data.points.push_back(p);
        labels.push_back(static_cast<int>(k));
    }
    data.labels = std::move(labels);
    return data;
}

Dataset parse_csv(const std::string& text, const std::string& source) {
    const CsvTable table = tokenize(text, source);
    const std::size_t width = table.header.empty() ? table.rows.front().second.size() : table.header.size();
    const bool labelled = !table.header.empty() && lower(table.header.back()) == "label";
    const std::size_t dim = labelled ? width - 1 : width;
    if (dim == 0) throw format_error(source + ": no coordinate columns");

    Dataset data;
    data.name = std::filesystem::path(source).stem().string();
    data.points = PointSet(dim);
    data.points.reserve(table.rows.size());
    std::vector<int> labels;
    std::vector<double> row(dim);
    for (const auto& [line, cells] : table.rows) {
        if (cells.size() != width)
            throw parse_error(source + ": inconsistent width, expected " + std::to_string(width) +
                                  " columns but found " + std::to_string(cells.size()),
                              line);
        for (std::size_t k = 0; k < dim; ++k)
            if (!parse_double(cells[k], row[k]) || !std::isfinite(row[k]))
                throw parse_error(source + ": malformed value '" + std::string(cells[k]) + "'", line);
        data.points.push_back(row);
        if (labelled) {
            int label = 0;
            if (!parse_int(cells.back(), label))
                throw parse_error(source + ": malformed label '" + std::string(cells.back()) + "'", line);
            labels.push_back(label);
        }
    }
    if (labelled) data.labels = std::move(labels);
    return data;
}

std::string format_csv(const Dataset& data) {
    std::string out;
    const std::size_t d = data.dim();
    for (std::size_t k = 0; k < d; ++k) {
        if (k) out += ',';
        out += "x" + std::to_string(k);
    }
    if (data.labels) out += ",label";
    out += '\n';
    char buf[32];
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto p = data.points[i];
        for (std::size_t k = 0; k < d; ++k) {
            if (k) out += ',';
            std::snprintf(buf, sizeof buf, "%.17g", p[k]);
            out += buf;
        }
        if (data.labels) out += "," + std::to_string((*data.labels)[i]);
        out += '\n';
    }
    return out;
}

Dataset load_csv(const std::filesystem::path& path) {
    return parse_csv(read_file(path), path.string());
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
    write_file_atomic(path, format_csv(data));
}

std::vector<int> load_labels(const std::filesystem::path& path) {
    const std::string source = path.string();
    const std::string text = read_file(path);
    const CsvTable table = tokenize(text, source);
    std::size_t column = table.rows.front().second.size() - 1;
    if (!table.header.empty()) {
        const auto it = std::find_if(table.header.begin(), table.header.end(),
                                     [](const std::string& h) { return lower(h) == "label"; });
        if (it == table.header.end()) throw format_error(source + ": no label column");
        column = static_cast<std::size_t>(it - table.header.begin());
    }
    std::vector<int> labels;
    labels.reserve(table.rows.size());
    for (const auto& [line, cells] : table.rows) {
        int v = 0;
        if (column >= cells.size() || !parse_int(cells[column], v))
            throw parse_error(source + ": malformed label", line);
        labels.push_back(v);
    }
    return labels;
}

std::string format_labels(const std::vector<int>& labels) {
    std::string out = "label\n";
    for (int l : labels) out += std::to_string(l) + '\n';
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw not_found_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace latentscale
