#include "latentscale/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include "latentscale/errors.hpp"

namespace latentscale {

namespace {

double choose2(double x) { return x * (x - 1.0) / 2.0; }

std::vector<std::size_t> dense_ids(const Labeling& labels, std::size_t* count) {
    std::map<int, std::size_t> ids;
    std::vector<std::size_t> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) throw std::invalid_argument("ari: noise labels are not allowed");
        auto [it, inserted] = ids.emplace(labels[i], ids.size());
        out[i] = it->second;
    }
    *count = ids.size();
    return out;
}

}  // namespace

double ari(const Labeling& a, const Labeling& b) {
    if (a.size() != b.size()) throw std::invalid_argument("ari: labelings differ in length");
    if (a.size() < 2) throw std::invalid_argument("ari: needs at least two elements");
    std::size_t ka = 0, kb = 0;
    const auto ia = dense_ids(a, &ka);
    const auto ib = dense_ids(b, &kb);

    std::vector<double> table(ka * kb, 0.0), rows(ka, 0.0), cols(kb, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        table[ia[i] * kb + ib[i]] += 1.0;
        rows[ia[i]] += 1.0;
        cols[ib[i]] += 1.0;
    }
    double index = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (double c : table) index += choose2(c);
    for (double r : rows) sum_a += choose2(r);
    for (double c : cols) sum_b += choose2(c);
    const double expected = sum_a * sum_b / choose2(static_cast<double>(a.size()));
    const double max_index = 0.5 * (sum_a + sum_b);
    // Both partitions trivial in the same way (all-in-one or all singletons).
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

double ari(const PartitionPair& pair) { return ari(pair.labels_a, pair.labels_b); }

double w1_1d(const DiscreteMeasure& g, const DiscreteMeasure& h) {
    if (g.dim() != 1 || h.dim() != 1) throw unsupported_error("w1_1d: measures must be 1-dimensional");
    // (position, signed mass) events swept left to right.
    std::vector<std::pair<double, double>> events;
    for (std::size_t j = 0; j < g.size(); ++j) events.emplace_back(g.atom(j)[0], g.weight(j));
    for (std::size_t j = 0; j < h.size(); ++j) events.emplace_back(h.atom(j)[0], -h.weight(j));
    std::sort(events.begin(), events.end());
    double diff = 0.0, total = 0.0;
    for (std::size_t e = 0; e + 1 < events.size(); ++e) {
        diff += events[e].second;
        total += std::abs(diff) * (events[e + 1].first - events[e].first);
    }
    return total;
}

double w1_exact_small(const DiscreteMeasure& g, const DiscreteMeasure& h, std::size_t max_atoms,
                      double cost_exponent) {
    if (g.dim() != h.dim()) throw std::invalid_argument("w1_exact_small: dimension mismatch");
    if (!(cost_exponent >= 1.0)) throw std::invalid_argument("w1_exact_small: exponent must be >= 1");
    const std::size_t a = g.size();
    const std::size_t b = h.size();
    if (a * b > max_atoms * max_atoms)
        throw unsupported_error("w1_exact_small: problem exceeds the atom cap");

    // Dense residual network: source, a supply nodes, b demand nodes, sink.
    const std::size_t src = 0, sink = a + b + 1, nodes = a + b + 2;
    constexpr double kInf = std::numeric_limits<double>::infinity();
    constexpr double kTiny = 1e-15;
    std::vector<double> cap(nodes * nodes, 0.0), cost(nodes * nodes, 0.0);
    auto at = [nodes](std::size_t u, std::size_t v) { return u * nodes + v; };
    std::vector<double> ground(a * b);
    for (std::size_t i = 0; i < a; ++i) {
        cap[at(src, 1 + i)] = g.weight(i);
        for (std::size_t j = 0; j < b; ++j) {
            const double c = std::pow(distance(g.atom(i), h.atom(j)), cost_exponent);
            ground[i * b + j] = c;
            cap[at(1 + i, 1 + a + j)] = kInf;
            cost[at(1 + i, 1 + a + j)] = c;
            cost[at(1 + a + j, 1 + i)] = -c;
        }
    }
    for (std::size_t j = 0; j < b; ++j) cap[at(1 + a + j, sink)] = h.weight(j);

    std::vector<double> potential(nodes, 0.0), dist(nodes);
    std::vector<std::size_t> prev(nodes);
    std::vector<bool> done(nodes);
    double remaining = 1.0;
    for (std::size_t round = 0; round < 100 * nodes * nodes && remaining > 1e-14; ++round) {
        std::fill(dist.begin(), dist.end(), kInf);
        std::fill(done.begin(), done.end(), false);
        dist[src] = 0.0;
        for (std::size_t it = 0; it < nodes; ++it) {
            std::size_t u = nodes;
            for (std::size_t v = 0; v < nodes; ++v)
                if (!done[v] && dist[v] < kInf && (u == nodes || dist[v] < dist[u])) u = v;
            if (u == nodes) break;
            done[u] = true;
            for (std::size_t v = 0; v < nodes; ++v) {
                if (done[v] || cap[at(u, v)] <= kTiny) continue;
                const double reduced = std::max(0.0, cost[at(u, v)] + potential[u] - potential[v]);
                if (dist[u] + reduced < dist[v]) {
                    dist[v] = dist[u] + reduced;
                    prev[v] = u;
                }
            }
        }
        if (!(dist[sink] < kInf)) break;
        for (std::size_t v = 0; v < nodes; ++v)
            if (dist[v] < kInf) potential[v] += dist[v];

        double push = kInf;
        for (std::size_t v = sink; v != src; v = prev[v]) push = std::min(push, cap[at(prev[v], v)]);
        for (std::size_t v = sink; v != src; v = prev[v]) {
            cap[at(prev[v], v)] -= push;
            cap[at(v, prev[v])] += push;
        }
        remaining -= push;
    }

    // Flow on supply->demand arcs is the residual capacity of the reverse arcs.
    double total = 0.0;
    for (std::size_t i = 0; i < a; ++i)
        for (std::size_t j = 0; j < b; ++j) total += cap[at(1 + a + j, 1 + i)] * ground[i * b + j];
    return cost_exponent == 1.0 ? total : std::pow(total, 1.0 / cost_exponent);
}

double smoothing_l1_distance_1d(const DiscreteMeasure& g, const DiscreteMeasure& h, double sigma) {
    if (g.dim() != 1 || h.dim() != 1)
        throw unsupported_error("smoothing_l1_distance_1d: measures must be 1-dimensional");
    if (!(sigma > 0.0)) throw std::invalid_argument("smoothing_l1_distance_1d: sigma must be positive");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const DiscreteMeasure* m : {&g, &h})
        for (std::size_t j = 0; j < m->size(); ++j) {
            lo = std::min(lo, m->atom(j)[0]);
            hi = std::max(hi, m->atom(j)[0]);
        }
    lo -= 10.0 * sigma;
    hi += 10.0 * sigma;
    const double step = sigma / 100.0;
    const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / step));
    auto f = [&](double x) {
        const double p = std::exp(mixture_log_density(g, sigma, std::span<const double>(&x, 1)));
        const double q = std::exp(mixture_log_density(h, sigma, std::span<const double>(&x, 1)));
        return std::abs(p - q);
    };
    double total = 0.5 * (f(lo) + f(lo + static_cast<double>(count) * step));
    for (std::size_t i = 1; i < count; ++i) total += f(lo + static_cast<double>(i) * step);
    return total * step;
}

double smoothing_lipschitz_1d(double sigma) { return std::sqrt(2.0 / std::numbers::pi) / sigma; }

}  // namespace latentscale
