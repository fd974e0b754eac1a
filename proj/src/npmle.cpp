#include "latentscale/npmle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "latentscale/errors.hpp"

namespace latentscale {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// exp(-60) relative to the leading term is far below double resolution.
constexpr double kNegligible = -60.0;

// Mutable solver state; converted to a DiscreteMeasure only at the end.
struct Support {
    std::size_t dim = 0;
    std::vector<double> atoms;  // m x dim, row-major
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    std::span<const double> atom(std::size_t j) const { return {atoms.data() + j * dim, dim}; }
    std::span<double> atom(std::size_t j) { return {atoms.data() + j * dim, dim}; }

    void push(std::span<const double> a, double w) {
        atoms.insert(atoms.end(), a.begin(), a.end());
        weights.push_back(w);
    }
};

// Sufficient statistics of one E-step: log-likelihood, per-atom responsibility
// mass and responsibility-weighted coordinate sums.
struct Evaluation {
    double loglik = kNegInf;
    std::vector<double> mass;
    std::vector<double> moment;  // m x dim
};

class Estimator {
public:
    Estimator(const Dataset& data, double sigma)
        : data_(data),
          n_(data.size()),
          dim_(data.dim()),
          inv_two_s2_(0.5 / (sigma * sigma)),
          log_norm_(-0.5 * static_cast<double>(data.dim()) *
                    std::log(2.0 * std::numbers::pi * sigma * sigma)) {}

    // One pass over the data. Statistics are only accumulated when requested.
    Evaluation evaluate(const Support& s, bool with_stats = true) const {
        const std::size_t m = s.size();
        Evaluation ev;
        if (with_stats) {
            ev.mass.assign(m, 0.0);
            ev.moment.assign(m * dim_, 0.0);
        }
        std::vector<double> logw(m);
        for (std::size_t j = 0; j < m; ++j)
            logw[j] = s.weights[j] > 0.0 ? std::log(s.weights[j]) : kNegInf;

        std::vector<double> t(m);
        double total = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            auto y = data_.points[i];
            double mx = kNegInf;
            for (std::size_t j = 0; j < m; ++j) {
                t[j] = logw[j] - squared_distance(y, s.atom(j)) * inv_two_s2_;
                mx = std::max(mx, t[j]);
            }
            double sum = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                const double z = t[j] - mx;
                t[j] = z < kNegligible ? 0.0 : std::exp(z);
                sum += t[j];
            }
            total += mx + std::log(sum) + log_norm_;
            if (with_stats) {
                const double inv = 1.0 / sum;
                for (std::size_t j = 0; j < m; ++j) {
                    const double r = t[j] * inv;
                    if (r == 0.0) continue;
                    ev.mass[j] += r;
                    double* mo = ev.moment.data() + j * dim_;
                    for (std::size_t k = 0; k < dim_; ++k) mo[k] += r * y[k];
                }
            }
        }
        ev.loglik = total;
        return ev;
    }

    std::vector<double> log_densities(const Support& s) const {
        const std::size_t m = s.size();
        std::vector<double> out(n_), t(m);
        for (std::size_t i = 0; i < n_; ++i) {
            auto y = data_.points[i];
            for (std::size_t j = 0; j < m; ++j)
                t[j] = (s.weights[j] > 0.0 ? std::log(s.weights[j]) : kNegInf) -
                       squared_distance(y, s.atom(j)) * inv_two_s2_;
            out[i] = log_sum_exp(t) + log_norm_;
        }
        return out;
    }

    // D at each probe given log p(Y_i).
    std::vector<double> gradient(const std::vector<double>& logp,
                                 std::span<const double> probes) const {
        const std::size_t count = probes.size() / dim_;
        std::vector<double> out(count), t(n_);
        const double log_n = std::log(static_cast<double>(n_));
        for (std::size_t p = 0; p < count; ++p) {
            std::span<const double> theta(probes.data() + p * dim_, dim_);
            for (std::size_t i = 0; i < n_; ++i)
                t[i] = log_norm_ - squared_distance(data_.points[i], theta) * inv_two_s2_ - logp[i];
            out[p] = std::exp(log_sum_exp(t) - log_n);
        }
        return out;
    }

    std::size_t n() const { return n_; }

private:
    const Dataset& data_;
    std::size_t n_;
    std::size_t dim_;
    double inv_two_s2_;
    double log_norm_;
};

Support em_update(const Support& s, const Evaluation& ev, std::size_t n, const BoundingBox& box) {
    Support out = s;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < s.size(); ++j) {
        out.weights[j] = ev.mass[j] * inv_n;
        if (ev.mass[j] > 0.0) {
            auto a = out.atom(j);
            for (std::size_t k = 0; k < s.dim; ++k) a[k] = ev.moment[j * s.dim + k] / ev.mass[j];
            box.clamp(a);
        }
    }
    return out;
}

void normalise(Support& s) {
    double total = 0.0;
    for (double w : s.weights) total += w;
    for (double& w : s.weights) w /= total;
}

// One squared-extrapolation cycle (SQUAREM, scheme S3) around the EM map.
// Two plain EM steps give x1, x2; the extrapolated point is polished by a
// further EM step and kept only if it beats x2. Updates `sup`/`ev` in place
// and appends every accepted log-likelihood to `trace`.
void accelerated_em_step(const Estimator& est, const BoundingBox& box, Support& sup, Evaluation& ev,
                         std::vector<double>& trace) {
    const std::size_t n = est.n();
    Support x1 = em_update(sup, ev, n, box);
    Evaluation e1 = est.evaluate(x1);
    Support x2 = em_update(x1, e1, n, box);
    Evaluation e2 = est.evaluate(x2);
    trace.push_back(e1.loglik);
    trace.push_back(e2.loglik);

    const std::size_t m = sup.size();
    const std::size_t len = m * (sup.dim + 1);
    auto param = [&](const Support& s, std::size_t idx) {
        return idx < m ? s.weights[idx] : s.atoms[idx - m];
    };
    double rr = 0.0, vv = 0.0;
    for (std::size_t idx = 0; idx < len; ++idx) {
        const double r = param(x1, idx) - param(sup, idx);
        const double v = param(x2, idx) - 2.0 * param(x1, idx) + param(sup, idx);
        rr += r * r;
        vv += v * v;
    }
    double alpha = vv > 0.0 ? -std::sqrt(rr / vv) : -1.0;
    if (alpha < -1.0 && std::isfinite(alpha)) {
        for (int attempt = 0; attempt < 4 && alpha < -1.0; ++attempt, alpha = 0.5 * (alpha - 1.0)) {
            Support xa = sup;
            bool feasible = true;
            for (std::size_t idx = 0; idx < len; ++idx) {
                const double r = param(x1, idx) - param(sup, idx);
                const double v = param(x2, idx) - 2.0 * param(x1, idx) + param(sup, idx);
                const double value = param(sup, idx) - 2.0 * alpha * r + alpha * alpha * v;
                if (idx < m) {
                    if (value < 0.0) {
                        feasible = false;
                        break;
                    }
                    xa.weights[idx] = value;
                } else {
                    xa.atoms[idx - m] = value;
                }
            }
            if (!feasible) continue;
            normalise(xa);
            for (std::size_t j = 0; j < m; ++j) box.clamp(xa.atom(j));
            Evaluation ea = est.evaluate(xa);
            if (!(ea.loglik > e2.loglik)) continue;
            Support x3 = em_update(xa, ea, n, box);
            Evaluation e3 = est.evaluate(x3);
            if (e3.loglik >= e2.loglik) {
                trace.push_back(e3.loglik);
                sup = std::move(x3);
                ev = std::move(e3);
                return;
            }
        }
    }
    sup = std::move(x2);
    ev = std::move(e2);
}

// Drops zero-weight atoms; these never change the likelihood.
void drop_empty(Support& s) {
    Support out;
    out.dim = s.dim;
    for (std::size_t j = 0; j < s.size(); ++j)
        if (s.weights[j] > 0.0) out.push(s.atom(j), s.weights[j]);
    s = std::move(out);
}

// Prune tiny atoms and fold atoms within `radius` into their weighted mean.
// Returns false when nothing changed.
bool consolidate(Support& s, double prune_weight, double radius) {
    bool changed = false;
    Support kept;
    kept.dim = s.dim;
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (s.weights[j] < prune_weight && s.size() > 1) {
            changed = true;
            continue;
        }
        kept.push(s.atom(j), s.weights[j]);
    }
    if (kept.size() == 0) return false;

    const double r2 = radius * radius;
    std::vector<bool> absorbed(kept.size(), false);
    Support merged;
    merged.dim = s.dim;
    std::vector<double> acc(s.dim);
    for (std::size_t j = 0; j < kept.size(); ++j) {
        if (absorbed[j]) continue;
        double w = kept.weights[j];
        auto aj = kept.atom(j);
        for (std::size_t k = 0; k < s.dim; ++k) acc[k] = w * aj[k];
        for (std::size_t l = j + 1; l < kept.size(); ++l) {
            if (absorbed[l] || squared_distance(aj, kept.atom(l)) > r2) continue;
            absorbed[l] = true;
            changed = true;
            const double wl = kept.weights[l];
            auto al = kept.atom(l);
            for (std::size_t k = 0; k < s.dim; ++k) acc[k] += wl * al[k];
            w += wl;
        }
        if (w > 0.0)
            for (double& v : acc) v /= w;
        else
            std::copy(aj.begin(), aj.end(), acc.begin());
        merged.push(acc, w);
    }
    normalise(merged);
    s = std::move(merged);
    return changed;
}

std::vector<double> random_probes(const BoundingBox& box, std::size_t count, std::mt19937_64& rng) {
    const std::size_t d = box.dim();
    std::vector<double> out;
    out.reserve(count * d);
    for (std::size_t p = 0; p < count; ++p)
        for (std::size_t k = 0; k < d; ++k) {
            std::uniform_real_distribution<double> u(box.lower[k], box.upper[k]);
            out.push_back(u(rng));
        }
    return out;
}

}  // namespace

void SolverConfig::validate() const {
    if (m_init == 0) throw std::invalid_argument("m_init must be positive");
    if (max_iter == 0) throw std::invalid_argument("max_iter must be positive");
    if (!(loglik_tol > 0.0)) throw std::invalid_argument("loglik_tol must be positive");
    if (!(dual_tol > 0.0)) throw std::invalid_argument("dual_tol must be positive");
    if (!(prune_weight >= 0.0) || prune_weight >= 1.0 / static_cast<double>(m_init))
        throw std::invalid_argument("prune_weight must lie in [0, 1/m_init)");
    if (!(merge_radius_factor > 0.0)) throw std::invalid_argument("merge_radius_factor must be positive");
    if (!(insert_weight > 0.0 && insert_weight < 1.0))
        throw std::invalid_argument("insert_weight must lie in (0, 1)");
    if (theta_box.lower.size() != theta_box.upper.size())
        throw std::invalid_argument("theta_box bounds differ in dimension");
    for (std::size_t k = 0; k < theta_box.dim(); ++k)
        if (!(theta_box.lower[k] <= theta_box.upper[k]))
            throw std::invalid_argument("theta_box lower bound exceeds upper bound");
}

SolverConfig resolve_config(const SolverConfig& cfg, const Dataset& data) {
    SolverConfig out = cfg;
    out.m_init = std::min(cfg.m_init, data.size());
    if (out.probe_grid_size == 0) out.probe_grid_size = 512 * data.dim();
    if (out.theta_box.dim() == 0) out.theta_box = data_bounding_box(data, 0.1);
    if (out.theta_box.dim() != data.dim())
        throw std::invalid_argument("theta_box dimension does not match the data");
    return out;
}

std::vector<double> gradient_function(const DiscreteMeasure& measure, double sigma,
                                      const Dataset& data, const PointSet& probes) {
    if (measure.dim() != data.dim() || probes.dim() != data.dim())
        throw std::invalid_argument("gradient_function: dimension mismatch");
    if (data.size() == 0) throw std::invalid_argument("gradient_function: empty dataset");
    Support s{measure.dim(), measure.atoms().values(), measure.weights()};
    Estimator est(data, sigma);
    return est.gradient(est.log_densities(s), probes.values());
}

double gradient_function(const DiscreteMeasure& measure, double sigma, const Dataset& data,
                         std::span<const double> theta) {
    PointSet p(theta.size());
    p.push_back(theta);
    return gradient_function(measure, sigma, data, p).front();
}

FitResult fit_npmle(const Dataset& data, double sigma, const SolverConfig& config) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("fit_npmle: sigma must be positive");
    data.validate();
    const SolverConfig cfg = resolve_config(config, data);
    cfg.validate();

    const std::size_t n = data.size();
    const std::size_t d = data.dim();
    const double nd = static_cast<double>(n);
    // Structural moves may lose at most this much likelihood.
    const double guard = 1e-10 * nd;
    std::mt19937_64 rng(cfg.seed);

    // Seeded subsample of distinct rows as the initial support.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = 0; i < cfg.m_init; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(order[i], order[pick(rng)]);
    }
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cfg.m_init));
    Support sup;
    sup.dim = d;
    for (std::size_t i = 0; i < cfg.m_init; ++i) {
        std::vector<double> a(data.points[order[i]].begin(), data.points[order[i]].end());
        cfg.theta_box.clamp(a);
        sup.push(a, 1.0 / static_cast<double>(cfg.m_init));
    }
    consolidate(sup, 0.0, MixtureModel::duplicate_factor * sigma);

    std::vector<double> probes(data.points.values());
    {
        auto extra = random_probes(cfg.theta_box, cfg.probe_grid_size, rng);
        probes.insert(probes.end(), extra.begin(), extra.end());
    }

    Estimator est(data, sigma);
    Evaluation ev = est.evaluate(sup);
    FitResult result;
    result.loglik_trace.push_back(ev.loglik);

    const double radius = cfg.merge_radius_factor * sigma;
    auto try_structural = [&](Support candidate) {
        if (!consolidate(candidate, cfg.prune_weight, radius)) return false;
        Evaluation cev = est.evaluate(candidate);
        if (cev.loglik < ev.loglik - guard) return false;
        sup = std::move(candidate);
        ev = std::move(cev);
        result.loglik_trace.push_back(ev.loglik);
        return true;
    };

    double gap = std::numeric_limits<double>::infinity();
    double min_atom_d = 0.0;
    std::size_t iter = 0;
    bool converged = false;
    while (iter < cfg.max_iter) {
        ++iter;
        const double before = ev.loglik;
        accelerated_em_step(est, cfg.theta_box, sup, ev, result.loglik_trace);
        if (std::any_of(sup.weights.begin(), sup.weights.end(), [](double w) { return w == 0.0; })) {
            drop_empty(sup);
            ev = est.evaluate(sup);
        }
        const double gain = (ev.loglik - before) / nd;

        if (iter % 25 == 0) try_structural(sup);
        if (gain >= cfg.loglik_tol) continue;

        // Stalled: consolidate, then consult the certificate.
        try_structural(sup);
        const std::vector<double> logp = est.log_densities(sup);
        const std::vector<double> dprobe = est.gradient(logp, probes);
        const std::vector<double> datom = est.gradient(logp, sup.atoms);
        const auto worst = std::max_element(dprobe.begin(), dprobe.end());
        gap = *worst - 1.0;
        min_atom_d = *std::min_element(datom.begin(), datom.end());
        if (gap <= cfg.dual_tol && min_atom_d >= 1.0 - cfg.dual_tol) {
            converged = true;
            break;
        }

        bool progressed = false;
        if (min_atom_d < 1.0 - cfg.dual_tol && sup.size() > 1) {
            // Atoms the certificate rejects: removing them is an ascent
            // direction to first order.
            Support cand;
            cand.dim = d;
            for (std::size_t j = 0; j < sup.size(); ++j)
                if (datom[j] >= 1.0 - cfg.dual_tol) cand.push(sup.atom(j), sup.weights[j]);
            if (cand.size() > 0) {
                normalise(cand);
                Evaluation cev = est.evaluate(cand);
                if (cev.loglik >= ev.loglik - guard) {
                    sup = std::move(cand);
                    ev = std::move(cev);
                    result.loglik_trace.push_back(ev.loglik);
                    progressed = true;
                }
            }
        }

        if (gap > cfg.dual_tol) {
            const std::size_t at = static_cast<std::size_t>(worst - dprobe.begin());
            std::span<const double> theta(probes.data() + at * d, d);
            for (double eps = cfg.insert_weight; eps > 1e-12; eps *= 0.5) {
                Support cand = sup;
                for (double& w : cand.weights) w *= 1.0 - eps;
                cand.push(theta, eps);
                Evaluation cev = est.evaluate(cand);
                if (cev.loglik > ev.loglik) {
                    sup = std::move(cand);
                    ev = std::move(cev);
                    result.loglik_trace.push_back(ev.loglik);
                    progressed = true;
                    break;
                }
            }
        }
        if (!progressed && gain <= 0.0) break;
    }

    if (!converged) {
        try_structural(sup);
        const std::vector<double> logp = est.log_densities(sup);
        const std::vector<double> dprobe = est.gradient(logp, probes);
        const std::vector<double> datom = est.gradient(logp, sup.atoms);
        gap = *std::max_element(dprobe.begin(), dprobe.end()) - 1.0;
        min_atom_d = *std::min_element(datom.begin(), datom.end());
    }

    PointSet atoms(d, sup.atoms);
    result.model = MixtureModel(sigma, DiscreteMeasure(std::move(atoms), sup.weights));
    result.loglik = log_likelihood(result.model, data);
    result.dual_gap = gap;
    result.min_atom_gradient = min_atom_d;
    result.iterations = iter;
    result.converged = converged;
    return result;
}

DiscreteMeasure fit_npmle_grid(const Dataset& data, double sigma, const PointSet& grid,
                               std::size_t max_iter, double tol) {
    if (grid.size() == 0) throw std::invalid_argument("fit_npmle_grid: empty grid");
    if (!(sigma > 0.0)) throw std::invalid_argument("fit_npmle_grid: sigma must be positive");
    data.validate();
    if (grid.dim() != data.dim()) throw std::invalid_argument("fit_npmle_grid: dimension mismatch");

    const std::size_t n = data.size();
    const std::size_t m = grid.size();
    // Row-scaled kernel matrix; the per-row scale cancels in D.
    std::vector<double> kernel(n * m);
    std::vector<double> row(m);
    for (std::size_t i = 0; i < n; ++i) {
        double mx = kNegInf;
        for (std::size_t j = 0; j < m; ++j) {
            row[j] = -0.5 * squared_distance(data.points[i], grid[j]) / (sigma * sigma);
            mx = std::max(mx, row[j]);
        }
        for (std::size_t j = 0; j < m; ++j) kernel[i * m + j] = std::exp(row[j] - mx);
    }

    std::vector<double> w(m, 1.0 / static_cast<double>(m));
    std::vector<double> grad(m), inv_p(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t it = 0; it < max_iter; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            const double* k = kernel.data() + i * m;
            // Four fixed lanes keep the sum order deterministic.
            double p0 = 0.0, p1 = 0.0, p2 = 0.0, p3 = 0.0;
            std::size_t j = 0;
            for (; j + 4 <= m; j += 4) {
                p0 += w[j] * k[j];
                p1 += w[j + 1] * k[j + 1];
                p2 += w[j + 2] * k[j + 2];
                p3 += w[j + 3] * k[j + 3];
            }
            for (; j < m; ++j) p0 += w[j] * k[j];
            inv_p[i] = 1.0 / ((p0 + p1) + (p2 + p3));
        }
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* k = kernel.data() + i * m;
            const double s = inv_p[i] * inv_n;
            for (std::size_t j = 0; j < m; ++j) grad[j] += k[j] * s;
        }
        double worst = 0.0;
        for (std::size_t j = 0; j < m; ++j) worst = std::max(worst, w[j] * std::abs(grad[j] - 1.0));
        if (worst <= tol) break;
        for (std::size_t j = 0; j < m; ++j) {
            w[j] *= grad[j];
            // Decaying weights would otherwise sink into subnormals.
            if (w[j] < 1e-250) w[j] = 0.0;
        }
    }

    PointSet atoms(grid.dim());
    std::vector<double> kept;
    for (std::size_t j = 0; j < m; ++j) {
        if (w[j] < 1e-10) continue;
        atoms.push_back(grid[j]);
        kept.push_back(w[j]);
    }
    return DiscreteMeasure(std::move(atoms), std::move(kept));
}

PointSet uniform_grid_1d(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) throw std::invalid_argument("uniform_grid_1d: bad range");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = lo + static_cast<double>(i) * step;
    return PointSet(1, std::move(v));
}

double atom_count_bound(const Dataset& data, double sigma) {
    if (data.dim() != 1) throw unsupported_error("atom_count_bound: only defined for d = 1");
    if (data.size() < 2) throw std::invalid_argument("atom_count_bound: needs n >= 2");
    if (!(sigma > 0.0)) throw std::invalid_argument("atom_count_bound: sigma must be positive");
    const auto& v = data.points.values();
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double r = (*hi - *lo) / 2.0;
    return 1.90 + (*hi + 10.0) * r / (0.85 * sigma * sigma);
}

}  // namespace latentscale
