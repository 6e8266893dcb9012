#include "qasched/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qasched/errors.hpp"
#include "qasched/rng.hpp"

namespace qasched {

namespace {

void check_mask(const ScheduleBounds& bounds, const SearchMask& mask) {
    if (mask.fixed_T && (*mask.fixed_T < bounds.t_min || *mask.fixed_T > bounds.t_max))
        throw InvalidArgument("fixed T outside bounds");
    if (mask.fixed_reads && *mask.fixed_reads < 1) throw InvalidArgument("fixed reads must be >= 1");
}

// Evaluates dv if the next slot fits the budget; records the row.
std::optional<Observation> evaluate_slot(OptimizationHistory& h, const ScheduleObjective& f, const DesignVector& dv,
                                         const BudgetConfig& cfg, const SearchMask& mask) {
    const auto reads = next_reads(static_cast<int>(h.rows.size()), dv.T, h.qpu_time_used_us, cfg, mask);
    if (!reads) return std::nullopt;
    const Observation obs = f(dv, *reads);
    if (!std::isfinite(obs.energy)) throw NumericalFailure("objective returned a non-finite energy");
    const bool improved = h.best_index < 0 || obs.energy < h.best_energy;
    record_evaluation(h, dv, *reads, obs, eval_budget(dv.T, *reads, cfg), std::nullopt,
                      improved ? TrEvent::improve : TrEvent::none);
    return obs;
}

}  // namespace

OptimizationHistory random_search(const ScheduleObjective& objective, const ScheduleBounds& bounds,
                                  const BudgetConfig& cfg, std::uint64_t seed, const SearchMask& mask) {
    cfg.validate();
    check_mask(bounds, mask);
    Rng rng(derive_seed(seed, 0x7273));
    OptimizationHistory h;
    h.method = "rs";
    for (int i = 0; i < cfg.max_evals; ++i) {
        DesignVector dv = sample_random(bounds, rng);
        if (mask.fixed_T) dv.T = *mask.fixed_T;
        if (!evaluate_slot(h, objective, dv, cfg, mask)) break;
    }
    if (h.rows.empty()) h.complete = false;
    return h;
}

OptimizationHistory greedy_search(const ScheduleObjective& objective, const ScheduleBounds& bounds,
                                  const BudgetConfig& cfg, std::uint64_t seed, const SearchMask& mask,
                                  const GsConfig& gs) {
    cfg.validate();
    check_mask(bounds, mask);
    if (!(gs.log_T_step > 0.0) || !(gs.theta_step_rel > 0.0) || !(gs.decay > 0.0 && gs.decay < 1.0))
        throw InvalidArgument("greedy_search: steps must be positive and decay in (0,1)");
    Rng rng(derive_seed(seed, 0x6773));
    OptimizationHistory h;
    h.method = "gs";

    GsState st;
    st.current.T = mask.fixed_T ? *mask.fixed_T
                                : std::clamp(std::sqrt(bounds.t_min * bounds.t_max), bounds.t_min, bounds.t_max);
    st.current.thetas.assign(bounds.order, 0.0);
    st.step_log_T = gs.log_T_step;
    for (int m = 1; m <= bounds.order; ++m) st.step_theta.push_back(gs.theta_step_rel * bounds.theta_bound(m));

    auto start = evaluate_slot(h, objective, st.current, cfg, mask);
    if (!start) {
        h.complete = false;
        return h;
    }
    st.evals_used = 1;
    double current_e = start->energy;

    std::vector<int> coords;
    if (!mask.fixed_T) coords.push_back(0);
    for (int m = 1; m <= bounds.order; ++m) coords.push_back(m);
    if (coords.empty()) return h;

    int idle = 0;  // iterations whose candidates all collapsed onto the current point
    while (st.evals_used < cfg.max_evals && idle < 10000) {
        const int j = coords[rng.index(coords.size())];
        bool accepted = false;
        bool evaluated = false;
        for (double sign : {1.0, -1.0}) {
            DesignVector cand = st.current;
            if (j == 0) {
                cand.T = std::clamp(std::exp(std::log(cand.T) + sign * st.step_log_T), bounds.t_min, bounds.t_max);
            } else {
                const double w = bounds.theta_bound(j);
                cand.thetas[j - 1] = std::clamp(cand.thetas[j - 1] + sign * st.step_theta[j - 1], -w, w);
            }
            if (cand == st.current) continue;
            const auto obs = evaluate_slot(h, objective, cand, cfg, mask);
            if (!obs) return h;
            evaluated = true;
            ++st.evals_used;
            if (obs->energy < current_e) {
                st.current = std::move(cand);
                current_e = obs->energy;
                accepted = true;
                break;
            }
            if (st.evals_used >= cfg.max_evals) break;
        }
        idle = evaluated ? 0 : idle + 1;
        if (!accepted) {
            if (j == 0)
                st.step_log_T *= gs.decay;
            else
                st.step_theta[j - 1] *= gs.decay;
        }
    }
    return h;
}

std::pair<double, double> default_beta_range(const IsingModel& m) {
    std::vector<double> reach(m.n_spins, 0.0);
    double smallest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m.n_spins; ++i) {
        reach[i] += std::abs(m.h[i]);
        if (m.h[i] != 0.0) smallest = std::min(smallest, std::abs(m.h[i]));
    }
    for (const auto& c : m.couplings) {
        reach[c.i] += std::abs(c.value);
        reach[c.j] += std::abs(c.value);
        if (c.value != 0.0) smallest = std::min(smallest, std::abs(c.value));
    }
    const double max_delta = 2.0 * (reach.empty() ? 0.0 : *std::max_element(reach.begin(), reach.end()));
    if (!(max_delta > 0.0)) return {1.0, 1.0};
    const double min_delta = 2.0 * smallest;
    return {std::log(2.0) / max_delta, std::log(1000.0) / min_delta};
}

SaRun simulated_annealing_run(const Qubo& q, const SaConfig& cfg) {
    if (cfg.sweeps < 1) throw InvalidArgument("simulated_annealing: sweeps must be >= 1");
    if (cfg.reads < 1) throw InvalidArgument("simulated_annealing: reads must be >= 1");
    const IsingModel m = qubo_to_ising(q);
    auto [hot, cold] = default_beta_range(m);
    if (cfg.beta_hot) hot = *cfg.beta_hot;
    if (cfg.beta_cold) cold = *cfg.beta_cold;
    if (!(hot > 0.0) || !(cold > 0.0)) throw InvalidArgument("simulated_annealing: betas must be positive");

    const int n = m.n_spins;
    std::vector<int> deg(n + 1, 0);
    for (const auto& c : m.couplings) {
        ++deg[c.i + 1];
        ++deg[c.j + 1];
    }
    for (int i = 0; i < n; ++i) deg[i + 1] += deg[i];
    std::vector<int> adj(deg[n]);
    std::vector<double> adj_j(deg[n]);
    {
        std::vector<int> fill(deg.begin(), deg.end() - 1);
        for (const auto& c : m.couplings) {
            adj[fill[c.i]] = c.j;
            adj_j[fill[c.i]++] = c.value;
            adj[fill[c.j]] = c.i;
            adj_j[fill[c.j]++] = c.value;
        }
    }
    std::vector<double> betas(cfg.sweeps);
    for (int k = 0; k < cfg.sweeps; ++k)
        betas[k] = cfg.sweeps == 1 ? cold : hot * std::pow(cold / hot, static_cast<double>(k) / (cfg.sweeps - 1));

    SaRun out;
    out.reads.bitstrings.reserve(cfg.reads);
    out.reads.energies.reserve(cfg.reads);
    out.initial_energies.reserve(cfg.reads);
    std::vector<std::int8_t> spin(n);
    std::vector<double> field(n);
    for (int r = 0; r < cfg.reads; ++r) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
        for (auto& s : spin) s = (rng.next() >> 63) ? 1 : -1;
        out.initial_energies.push_back(qubo_energy(q, spins_to_bits(spin)));
        for (int i = 0; i < n; ++i) {
            double f = m.h[i];
            for (int e = deg[i]; e < deg[i + 1]; ++e) f += adj_j[e] * spin[adj[e]];
            field[i] = f;
        }
        for (int k = 0; k < cfg.sweeps; ++k) {
            const double beta = betas[k];
            for (int i = 0; i < n; ++i) {
                const double x = -2.0 * spin[i] * field[i] * beta;
                bool flip = x <= 0.0;
                if (!flip && x < 40.0) flip = rng.uniform() < std::exp(-x);
                if (!flip) continue;
                const double d = -2.0 * spin[i];
                spin[i] = static_cast<std::int8_t>(-spin[i]);
                for (int e = deg[i]; e < deg[i + 1]; ++e) field[adj[e]] += d * adj_j[e];
            }
        }
        Bitstring bits = spins_to_bits(spin);
        out.reads.energies.push_back(qubo_energy(q, bits));
        out.reads.bitstrings.push_back(std::move(bits));
    }
    return out;
}

ReadSet simulated_annealing(const Qubo& q, const SaConfig& cfg) { return simulated_annealing_run(q, cfg).reads; }

namespace {

bool is_permutation_of(const Tour& t, int n) {
    if (static_cast<int>(t.size()) != n) return false;
    std::vector<char> seen(n, 0);
    for (int c : t) {
        if (c < 0 || c >= n || seen[c]) return false;
        seen[c] = 1;
    }
    return true;
}

Tour order_crossover(const Tour& p1, const Tour& p2, Rng& rng) {
    const int n = static_cast<int>(p1.size());
    int a = static_cast<int>(rng.index(n));
    int b = static_cast<int>(rng.index(n));
    if (a > b) std::swap(a, b);
    Tour child(n, -1);
    std::vector<char> used(n, 0);
    for (int i = a; i <= b; ++i) {
        child[i] = p1[i];
        used[p1[i]] = 1;
    }
    int pos = (b + 1) % n;
    for (int k = 0; k < n; ++k) {
        const int c = p2[(b + 1 + k) % n];
        if (used[c]) continue;
        child[pos] = c;
        used[c] = 1;
        pos = (pos + 1) % n;
    }
    return child;
}

}  // namespace

GaResult genetic_algorithm(const TspInstance& inst, const GaConfig& cfg) {
    if (cfg.population < 2) throw InvalidArgument("genetic_algorithm: population must be >= 2");
    if (cfg.generations < 0 || cfg.tournament < 1) throw InvalidArgument("genetic_algorithm: bad generations or tournament");
    if (cfg.elitism < 0 || cfg.elitism > cfg.population) throw InvalidArgument("genetic_algorithm: bad elitism");
    if (!(cfg.mutation_rate >= 0.0 && cfg.mutation_rate <= 1.0))
        throw InvalidArgument("genetic_algorithm: mutation rate must lie in [0, 1]");
    const int n = inst.n_cities;
    if (n < 1) throw InvalidArgument("genetic_algorithm: empty instance");
    Rng rng(derive_seed(cfg.seed, 0x6761));

    std::vector<Tour> pop;
    for (const auto& t : cfg.initial_population) {
        if (!is_permutation_of(t, n)) throw InvalidArgument("genetic_algorithm: initial tour is not a permutation");
        if (static_cast<int>(pop.size()) < cfg.population) pop.push_back(t);
    }
    while (static_cast<int>(pop.size()) < cfg.population) {
        Tour t(n);
        std::iota(t.begin(), t.end(), 0);
        for (int i = n - 1; i > 0; --i) std::swap(t[i], t[rng.index(static_cast<std::size_t>(i) + 1)]);
        pop.push_back(std::move(t));
    }

    std::vector<double> fit(pop.size());
    auto evaluate = [&] {
        for (std::size_t i = 0; i < pop.size(); ++i) fit[i] = tour_length(inst, pop[i]);
    };
    auto ranking = [&] {
        std::vector<int> idx(pop.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return fit[a] < fit[b]; });
        return idx;
    };
    auto tournament = [&] {
        int best = static_cast<int>(rng.index(pop.size()));
        for (int k = 1; k < cfg.tournament; ++k) {
            const int c = static_cast<int>(rng.index(pop.size()));
            if (fit[c] < fit[best] || (fit[c] == fit[best] && c < best)) best = c;
        }
        return best;
    };

    GaResult res;
    evaluate();
    auto order = ranking();
    res.best_per_generation.push_back(fit[order[0]]);
    for (int g = 0; g < cfg.generations; ++g) {
        std::vector<Tour> next;
        next.reserve(pop.size());
        for (int e = 0; e < cfg.elitism; ++e) next.push_back(pop[order[e]]);
        while (next.size() < pop.size()) {
            const Tour& p1 = pop[tournament()];
            const Tour& p2 = pop[tournament()];
            Tour child = n > 1 ? order_crossover(p1, p2, rng) : p1;
            if (n > 1 && rng.bernoulli(cfg.mutation_rate)) {
                const auto i = rng.index(n);
                const auto j = rng.index(n);
                std::swap(child[i], child[j]);
            }
            next.push_back(std::move(child));
        }
        pop = std::move(next);
        evaluate();
        order = ranking();
        res.best_per_generation.push_back(fit[order[0]]);
    }
    res.tour = pop[order[0]];
    res.length = fit[order[0]];
    return res;
}

}  // namespace qasched
