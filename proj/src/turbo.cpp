#include "qasched/turbo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "qasched/errors.hpp"
#include "qasched/rng.hpp"

namespace qasched {

void BudgetConfig::validate() const {
    if (t_prog < 0 || t_readout < 0 || t_overhead < 0 || qpu_limit < 0)
        throw InvalidArgument("BudgetConfig: times must be nonnegative");
    if (r_min < 1 || r_max < r_min) throw InvalidArgument("BudgetConfig: need 1 <= r_min <= r_max");
    if (max_evals < 1) throw InvalidArgument("BudgetConfig: max_evals must be >= 1");
    if (xi < 0) throw InvalidArgument("BudgetConfig: xi must be nonnegative");
    if (n_init < 0 || restarts < 1) throw InvalidArgument("BudgetConfig: bad n_init or restarts");
}

double TrustRegion::lower(int j) const { return std::max(0.0, center[j] - sides[j]); }
double TrustRegion::upper(int j) const { return std::min(1.0, center[j] + sides[j]); }

bool TrustRegion::contains(std::span<const double> u) const {
    if (u.size() != center.size()) return false;
    for (std::size_t j = 0; j < u.size(); ++j)
        if (u[j] < lower(static_cast<int>(j)) || u[j] > upper(static_cast<int>(j))) return false;
    return true;
}

double TrustRegion::side_geomean() const {
    if (sides.empty()) return 0.0;
    double acc = 0.0;
    for (double s : sides) acc += std::log(s);
    return std::exp(acc / static_cast<double>(sides.size()));
}

TrustRegion make_trust_region(std::vector<double> center, const TrustRegionConfig& config) {
    if (!(config.rho > 0.0 && config.rho < 1.0)) throw InvalidArgument("trust region: rho must be in (0,1)");
    if (config.patience < 1) throw InvalidArgument("trust region: patience must be >= 1");
    if (!(config.delta_min > 0.0) || config.delta_min > config.delta_init || config.delta_init > config.delta_max)
        throw InvalidArgument("trust region: need 0 < delta_min <= delta_init <= delta_max");
    TrustRegion tr;
    tr.sides.assign(center.size(), config.delta_init);
    tr.center = std::move(center);
    tr.config = config;
    return tr;
}

TrEvent update(TurboState& state, std::vector<double> u_new, double e_new) {
    auto& tr = state.tr;
    if (tr.center.size() != u_new.size()) throw InvalidArgument("update: trust region not initialized for this point");
    state.inputs.push_back(u_new);
    state.energies.push_back(e_new);

    const auto& c = tr.config;
    if (e_new < state.f_best) {
        state.f_best = e_new;
        state.incumbent = std::move(u_new);
        tr.center = state.incumbent;
        tr.no_improve = 0;
        bool grew = false;
        for (double& s : tr.sides) {
            const double next = std::min(s / c.rho, c.delta_max);
            grew |= next != s;
            s = next;
        }
        return grew ? TrEvent::expand : TrEvent::improve;
    }
    if (++tr.no_improve < c.patience) return TrEvent::none;
    tr.no_improve = 0;
    tr.center = state.incumbent;
    const bool crosses = std::any_of(tr.sides.begin(), tr.sides.end(),
                                     [&](double s) { return s * c.rho < c.delta_min; });
    if (crosses) {
        std::fill(tr.sides.begin(), tr.sides.end(), c.delta_init);
        return TrEvent::restart;
    }
    for (double& s : tr.sides) s = std::max(s * c.rho, c.delta_min);
    return TrEvent::shrink;
}

double expected_improvement(double mean, double sd, double f_best, double xi) {
    if (!(sd > 0.0)) return 0.0;
    const double imp = f_best - mean - xi;
    const double z = imp / sd;
    const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return std::max(0.0, imp * cdf + sd * pdf);
}

std::vector<double> maximize_ei(const TrustRegion& tr, const PosteriorFn& posterior, double f_best, double xi,
                                int restarts, Rng& rng, const std::vector<int>& free_dims_in) {
    const int d = static_cast<int>(tr.center.size());
    std::vector<int> free_dims = free_dims_in;
    if (free_dims.empty()) {
        free_dims.resize(d);
        std::iota(free_dims.begin(), free_dims.end(), 0);
    }
    std::vector<double> lo(d), hi(d), center(d);
    for (int j = 0; j < d; ++j) {
        lo[j] = tr.lower(j);
        hi[j] = tr.upper(j);
        center[j] = std::clamp(tr.center[j], lo[j], hi[j]);
    }
    const bool degenerate = std::all_of(free_dims.begin(), free_dims.end(), [&](int j) { return hi[j] <= lo[j]; });
    if (degenerate) return center;

    auto ei = [&](const std::vector<double>& x) {
        const auto [m, s] = posterior(x);
        return expected_improvement(m, s, f_best, xi);
    };

    std::vector<double> best = center;
    double best_val = -1.0;
    for (int r = 0; r < std::max(1, restarts); ++r) {
        std::vector<double> x = center;
        for (int j : free_dims) x[j] = rng.uniform(lo[j], hi[j]);
        double v = ei(x);
        std::vector<double> step(d, 0.0);
        for (int j : free_dims) step[j] = 0.25 * (hi[j] - lo[j]);
        for (int it = 0; it < 200; ++it) {
            bool moved = false;
            for (int j : free_dims) {
                for (double sign : {1.0, -1.0}) {
                    std::vector<double> y = x;
                    y[j] = std::clamp(x[j] + sign * step[j], lo[j], hi[j]);
                    if (y[j] == x[j]) continue;
                    const double vy = ei(y);
                    if (vy > v) {
                        x = std::move(y);
                        v = vy;
                        moved = true;
                        break;
                    }
                }
            }
            if (!moved) {
                double largest = 0.0;
                for (int j : free_dims) largest = std::max(largest, step[j] *= 0.5);
                if (largest < 1e-7) break;
            }
        }
        if (v > best_val) {
            best_val = v;
            best = std::move(x);
        }
    }
    return best;
}

std::vector<double> propose(const TurboState& state, const GpModel& model, const BudgetConfig& cfg, Rng& rng,
                            const std::vector<int>& free_dims) {
    const double mu = model.y_mean();
    const double sc = model.y_scale();
    PosteriorFn post = [&](std::span<const double> x) {
        const auto p = model.posterior(x);
        return std::pair{(p.mean - mu) / sc, std::sqrt(p.var) / sc};
    };
    return maximize_ei(state.tr, post, (state.f_best - mu) / sc, cfg.xi, cfg.restarts, rng, free_dims);
}

int adaptive_reads(double progress, const BudgetConfig& cfg) {
    const double p = std::clamp(progress, 0.0, 1.0);
    return static_cast<int>(std::lround(cfg.r_min + p * (cfg.r_max - cfg.r_min)));
}

double eval_budget(double T, int reads, const BudgetConfig& cfg) {
    return cfg.t_prog + reads * (T + cfg.t_readout + cfg.t_overhead);
}

std::optional<int> next_reads(int index, double T, double qpu_used, const BudgetConfig& cfg, const SearchMask& mask) {
    if (index >= cfg.max_evals) return std::nullopt;
    const int reads = mask.fixed_reads ? *mask.fixed_reads
                                       : adaptive_reads(static_cast<double>(index) / cfg.max_evals, cfg);
    if (qpu_used + eval_budget(T, reads, cfg) > cfg.qpu_limit) return std::nullopt;
    return reads;
}

std::vector<std::vector<double>> latin_hypercube(int n, int dims, Rng& rng) {
    std::vector<std::vector<double>> pts(n, std::vector<double>(dims));
    std::vector<int> perm(n);
    for (int j = 0; j < dims; ++j) {
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(static_cast<std::size_t>(i) + 1)]);
        for (int i = 0; i < n; ++i) pts[i][j] = (perm[i] + rng.uniform()) / n;
    }
    return pts;
}

namespace {

Observation checked(const ScheduleObjective& f, const DesignVector& dv, int reads) {
    Observation obs = f(dv, reads);
    if (!std::isfinite(obs.energy)) throw NumericalFailure("objective returned a non-finite energy");
    return obs;
}

}  // namespace

OptimizationHistory run_turbo(const ScheduleObjective& objective, const ScheduleBounds& bounds,
                              const BudgetConfig& cfg, std::uint64_t seed, const TurboOptions& options) {
    cfg.validate();
    const int d = bounds.dims();
    const auto& mask = options.mask;
    if (mask.fixed_T && (*mask.fixed_T < bounds.t_min || *mask.fixed_T > bounds.t_max))
        throw InvalidArgument("run_turbo: fixed T outside bounds");
    if (mask.fixed_reads && *mask.fixed_reads < 1) throw InvalidArgument("run_turbo: fixed reads must be >= 1");

    std::vector<int> free_dims;
    for (int j = mask.fixed_T ? 1 : 0; j < d; ++j) free_dims.push_back(j);
    double u_fixed_T = 0.0;
    if (mask.fixed_T) u_fixed_T = to_unit(DesignVector{*mask.fixed_T, std::vector<double>(bounds.order, 0.0)}, bounds)[0];

    auto to_design = [&](const std::vector<double>& u) {
        DesignVector dv = from_unit(u, bounds);
        if (mask.fixed_T) dv.T = *mask.fixed_T;
        return dv;
    };

    Rng rng(derive_seed(seed, 0x7475));
    OptimizationHistory h;
    h.method = "turbo";
    TurboState state;

    const int n_init = std::min(cfg.resolved_n_init(d), cfg.max_evals);
    auto init = latin_hypercube(n_init, d, rng);
    for (auto& u : init) {
        if (mask.fixed_T) u[0] = u_fixed_T;
        const DesignVector dv = to_design(u);
        const auto reads = next_reads(state.evals_used, dv.T, state.qpu_time_used, cfg, mask);
        if (!reads) {
            h.complete = false;
            return h;
        }
        const Observation obs = checked(objective, dv, *reads);
        const double t_eval = eval_budget(dv.T, *reads, cfg);
        const bool improved = obs.energy < state.f_best;
        state.inputs.push_back(u);
        state.energies.push_back(obs.energy);
        if (improved) {
            state.f_best = obs.energy;
            state.incumbent = u;
        }
        record_evaluation(h, dv, *reads, obs, t_eval, std::nullopt, improved ? TrEvent::improve : TrEvent::none);
        ++state.evals_used;
        state.qpu_time_used += t_eval;
    }

    state.tr = make_trust_region(state.incumbent, options.tr);
    while (state.evals_used < cfg.max_evals) {
        Eigen::MatrixXd X(state.inputs.size(), d);
        Eigen::VectorXd y(state.energies.size());
        for (std::size_t i = 0; i < state.inputs.size(); ++i) {
            for (int j = 0; j < d; ++j) X(static_cast<Eigen::Index>(i), j) = state.inputs[i][j];
            y[static_cast<Eigen::Index>(i)] = state.energies[i];
        }
        GpFitConfig gp = options.gp;
        gp.seed = derive_seed(seed, 0x10000 + static_cast<std::uint64_t>(state.evals_used));
        const GpModel model = fit_gp(X, y, gp);

        std::vector<double> u = propose(state, model, cfg, rng, free_dims);
        if (mask.fixed_T) u[0] = u_fixed_T;
        const DesignVector dv = to_design(u);
        const auto reads = next_reads(state.evals_used, dv.T, state.qpu_time_used, cfg, mask);
        if (!reads) break;
        const Observation obs = checked(objective, dv, *reads);
        const double t_eval = eval_budget(dv.T, *reads, cfg);
        const TrEvent ev = update(state, std::move(u), obs.energy);
        record_evaluation(h, dv, *reads, obs, t_eval, state.tr.side_geomean(), ev);
        ++state.evals_used;
        state.qpu_time_used += t_eval;
    }
    return h;
}

}  // namespace qasched
