#include "qasched/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "qasched/embed.hpp"
#include "qasched/errors.hpp"
#include "qasched/rng.hpp"

namespace qasched {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

const char* to_string(Method m) {
    switch (m) {
        case Method::turbo: return "turbo";
        case Method::rs: return "rs";
        case Method::gs: return "gs";
        case Method::sa: return "sa";
        case Method::ga: return "ga";
        case Method::exact: return "exact";
    }
    return "?";
}

const char* to_string(BackendKind b) { return b == BackendKind::sqa_noisy ? "sqa_noisy" : "sqa_noiseless"; }
const char* to_string(ChainMode c) { return c == ChainMode::table ? "table" : "off"; }

Method parse_method(const std::string& s) {
    for (Method m : {Method::turbo, Method::rs, Method::gs, Method::sa, Method::ga, Method::exact})
        if (s == to_string(m)) return m;
    throw InvalidArgument("unknown method '" + s + "'");
}

BackendKind parse_backend(const std::string& s) {
    if (s == "sqa_noiseless") return BackendKind::sqa_noiseless;
    if (s == "sqa_noisy") return BackendKind::sqa_noisy;
    throw InvalidArgument("unknown backend '" + s + "'");
}

ChainMode parse_chains(const std::string& s) {
    if (s == "off") return ChainMode::off;
    if (s == "table") return ChainMode::table;
    throw InvalidArgument("unknown chain mode '" + s + "'");
}

void ExperimentConfig::validate() const {
    if (n_cities.empty() || seeds.empty()) throw InvalidArgument("config: n_cities and seeds must be nonempty");
    for (int n : n_cities)
        if (n < 2) throw InvalidArgument("config: n_cities entries must be >= 2");
    if (repetitions < 1) throw InvalidArgument("config: repetitions must be >= 1");
    (void)default_bounds(bounds.order, bounds.alpha, bounds.t_min, bounds.t_max);
    if (fixed_T && (*fixed_T < bounds.t_min || *fixed_T > bounds.t_max))
        throw InvalidArgument("config: fixed_T outside the schedule bounds");
    if (fixed_reads && *fixed_reads < 1) throw InvalidArgument("config: fixed_reads must be >= 1");
    if (!(chain_strength_rel > 0.0)) throw InvalidArgument("config: chain_strength_rel must be positive");
    if (!(penalty_rel > 0.0)) throw InvalidArgument("config: penalty_rel must be positive");
    budget.validate();
    noise.validate();
    if (sqa.trotter_slices < 2 || !(sqa.sweeps_per_us > 0.0) || !(sqa.beta > 0.0) || sqa.gamma0 < 0.0)
        throw InvalidArgument("config: bad SQA settings");
    if (sqa.grid.points < 2) throw InvalidArgument("config: grid needs at least 2 points");
}

ExperimentConfig desk_profile(ExperimentConfig cfg) {
    cfg.bounds.t_max = 200.0;
    cfg.sqa.sweeps_per_us = 1.0;
    cfg.budget.r_min = 25;
    cfg.budget.r_max = 90;
    cfg.budget.max_evals = 30;
    return cfg;
}

namespace {

ojson num_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

template <class T>
ojson opt_json(const std::optional<T>& v) {
    return v ? ojson(*v) : ojson(nullptr);
}

ojson config_json(const ExperimentConfig& c) {
    ojson j;
    j["n_cities"] = c.n_cities;
    j["seeds"] = c.seeds;
    j["method"] = to_string(c.method);
    j["backend"] = to_string(c.backend);
    j["noise"] = {{"sigma_h_rel", c.noise.sigma_h_rel},
                  {"sigma_j_rel", c.noise.sigma_j_rel},
                  {"rho_ghost", c.noise.rho_ghost},
                  {"sigma_ghost_rel", c.noise.sigma_ghost_rel},
                  {"seed", c.noise.seed}};
    j["bounds"] = {{"t_min", c.bounds.t_min}, {"t_max", c.bounds.t_max}, {"alpha", c.bounds.alpha},
                   {"order", c.bounds.order}};
    j["budget"] = {{"t_prog", c.budget.t_prog},       {"t_readout", c.budget.t_readout},
                   {"t_overhead", c.budget.t_overhead}, {"qpu_limit", num_or_null(c.budget.qpu_limit)},
                   {"max_evals", c.budget.max_evals},   {"r_min", c.budget.r_min},
                   {"r_max", c.budget.r_max},           {"xi", c.budget.xi},
                   {"n_init", c.budget.n_init},         {"restarts", c.budget.restarts}};
    j["fixed_T"] = opt_json(c.fixed_T);
    j["fixed_reads"] = opt_json(c.fixed_reads);
    j["chains"] = to_string(c.chains);
    j["chain_strength_rel"] = c.chain_strength_rel;
    j["repetitions"] = c.repetitions;
    j["penalty_rel"] = c.penalty_rel;
    j["sqa"] = {{"sweeps_per_us", c.sqa.sweeps_per_us}, {"trotter_slices", c.sqa.trotter_slices},
                {"beta", c.sqa.beta},                   {"gamma0", c.sqa.gamma0},
                {"grid_points", c.sqa.grid.points},     {"grid_resolution", c.sqa.grid.resolution},
                {"monotone", c.sqa.grid.monotone}};
    j["sa"] = {{"sweeps", c.sa.sweeps},
               {"reads", c.sa.reads},
               {"beta_hot", opt_json(c.sa.beta_hot)},
               {"beta_cold", opt_json(c.sa.beta_cold)}};
    j["ga"] = {{"population", c.ga.population}, {"generations", c.ga.generations},
               {"tournament", c.ga.tournament}, {"mutation_rate", c.ga.mutation_rate},
               {"elitism", c.ga.elitism}};
    return j;
}

template <class Fn>
void each_key(const nlohmann::json& obj, const char* where, Fn&& fn) {
    if (!obj.is_object()) throw InvalidArgument(std::string("config: '") + where + "' must be an object");
    for (const auto& [k, v] : obj.items())
        if (!fn(k, v)) throw InvalidArgument(std::string("config: unknown key '") + k + "' in " + where);
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(); }

ExperimentConfig config_from_json(const std::string& text, ExperimentConfig c) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    try {
        each_key(j, "config", [&](const std::string& k, const nlohmann::json& v) {
            if (k == "n_cities") {
                c.n_cities = v.is_array() ? v.get<std::vector<int>>() : std::vector<int>{v.get<int>()};
            } else if (k == "seeds") {
                c.seeds = v.is_array() ? v.get<std::vector<std::uint64_t>>()
                                       : std::vector<std::uint64_t>{v.get<std::uint64_t>()};
            } else if (k == "method") {
                c.method = parse_method(v.get<std::string>());
            } else if (k == "backend") {
                c.backend = parse_backend(v.get<std::string>());
            } else if (k == "noise") {
                each_key(v, "noise", [&](const std::string& nk, const nlohmann::json& nv) {
                    if (nk == "sigma_h_rel") c.noise.sigma_h_rel = nv.get<double>();
                    else if (nk == "sigma_j_rel") c.noise.sigma_j_rel = nv.get<double>();
                    else if (nk == "rho_ghost") c.noise.rho_ghost = nv.get<double>();
                    else if (nk == "sigma_ghost_rel") c.noise.sigma_ghost_rel = nv.get<double>();
                    else if (nk == "seed") c.noise.seed = nv.get<std::uint64_t>();
                    else return false;
                    return true;
                });
            } else if (k == "bounds") {
                each_key(v, "bounds", [&](const std::string& bk, const nlohmann::json& bv) {
                    if (bk == "t_min") c.bounds.t_min = bv.get<double>();
                    else if (bk == "t_max") c.bounds.t_max = bv.get<double>();
                    else if (bk == "alpha") c.bounds.alpha = bv.get<double>();
                    else if (bk == "order") c.bounds.order = bv.get<int>();
                    else return false;
                    return true;
                });
            } else if (k == "budget") {
                each_key(v, "budget", [&](const std::string& bk, const nlohmann::json& bv) {
                    auto& b = c.budget;
                    if (bk == "t_prog") b.t_prog = bv.get<double>();
                    else if (bk == "t_readout") b.t_readout = bv.get<double>();
                    else if (bk == "t_overhead") b.t_overhead = bv.get<double>();
                    else if (bk == "qpu_limit")
                        b.qpu_limit = bv.is_null() ? std::numeric_limits<double>::infinity() : bv.get<double>();
                    else if (bk == "max_evals") b.max_evals = bv.get<int>();
                    else if (bk == "r_min") b.r_min = bv.get<int>();
                    else if (bk == "r_max") b.r_max = bv.get<int>();
                    else if (bk == "xi") b.xi = bv.get<double>();
                    else if (bk == "n_init") b.n_init = bv.get<int>();
                    else if (bk == "restarts") b.restarts = bv.get<int>();
                    else return false;
                    return true;
                });
            } else if (k == "fixed_T") {
                c.fixed_T = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
            } else if (k == "fixed_reads") {
                c.fixed_reads = v.is_null() ? std::nullopt : std::optional<int>(v.get<int>());
            } else if (k == "chains") {
                c.chains = parse_chains(v.get<std::string>());
            } else if (k == "chain_strength_rel") {
                c.chain_strength_rel = v.get<double>();
            } else if (k == "repetitions") {
                c.repetitions = v.get<int>();
            } else if (k == "output_dir") {
                c.output_dir = v.get<std::string>();
            } else if (k == "penalty_rel") {
                c.penalty_rel = v.get<double>();
            } else if (k == "sqa") {
                each_key(v, "sqa", [&](const std::string& sk, const nlohmann::json& sv) {
                    if (sk == "sweeps_per_us") c.sqa.sweeps_per_us = sv.get<double>();
                    else if (sk == "trotter_slices") c.sqa.trotter_slices = sv.get<int>();
                    else if (sk == "beta") c.sqa.beta = sv.get<double>();
                    else if (sk == "gamma0") c.sqa.gamma0 = sv.get<double>();
                    else if (sk == "grid_points") c.sqa.grid.points = sv.get<int>();
                    else if (sk == "grid_resolution") c.sqa.grid.resolution = sv.get<double>();
                    else if (sk == "monotone") c.sqa.grid.monotone = sv.get<bool>();
                    else return false;
                    return true;
                });
            } else if (k == "sa") {
                each_key(v, "sa", [&](const std::string& sk, const nlohmann::json& sv) {
                    if (sk == "sweeps") c.sa.sweeps = sv.get<int>();
                    else if (sk == "reads") c.sa.reads = sv.get<int>();
                    else if (sk == "beta_hot") c.sa.beta_hot = sv.is_null() ? std::nullopt : std::optional<double>(sv.get<double>());
                    else if (sk == "beta_cold") c.sa.beta_cold = sv.is_null() ? std::nullopt : std::optional<double>(sv.get<double>());
                    else return false;
                    return true;
                });
            } else if (k == "ga") {
                each_key(v, "ga", [&](const std::string& gk, const nlohmann::json& gv) {
                    if (gk == "population") c.ga.population = gv.get<int>();
                    else if (gk == "generations") c.ga.generations = gv.get<int>();
                    else if (gk == "tournament") c.ga.tournament = gv.get<int>();
                    else if (gk == "mutation_rate") c.ga.mutation_rate = gv.get<double>();
                    else if (gk == "elitism") c.ga.elitism = gv.get<int>();
                    else return false;
                    return true;
                });
            } else {
                return false;
            }
            return true;
        });
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    return c;
}

ScheduleProblem::ScheduleProblem(const TspInstance& inst, const ExperimentConfig& cfg, std::uint64_t run_seed)
    : inst_(inst), cfg_(cfg), run_seed_(run_seed) {
    const double d = inst_.max_distance();
    qubo_ = build_qubo(inst_, d > 0.0 ? cfg_.penalty_rel * d : 1.0);
    ising_ = qubo_to_ising(qubo_);
    optimum_ = inst_.n_cities <= kHeldKarpMaxCities ? exact_solve(inst_).length
                                                    : std::numeric_limits<double>::quiet_NaN();
    if (cfg_.chains == ChainMode::table) {
        const EmbeddingStats s = clique_stats(inst_.n_cities);
        ChainLayout layout;
        layout.lengths = chain_lengths_for_total(s.logical, s.physical);
        double scale = std::max(ising_.max_abs_field(), ising_.max_abs_coupling());
        layout.kappa = cfg_.chain_strength_rel * (scale > 0.0 ? scale : 1.0);
        layout_ = std::move(layout);
    }
}

ReadSet ScheduleProblem::sample(const DesignVector& dv, int reads, std::uint64_t call_index) const {
    AnnealRequest req;
    req.model = ising_;
    if (cfg_.backend == BackendKind::sqa_noisy) {
        NoiseConfig nc = cfg_.noise;
        nc.seed = derive_seed(derive_seed(cfg_.noise.seed, run_seed_), call_index);
        req.model = perturb_ising(ising_, nc);
    }
    if (layout_) req.model = chain_extend(req.model, *layout_);
    req.grid = render_grid(dv, cfg_.sqa.grid);
    req.reads = reads;
    req.sweeps_per_us = cfg_.sqa.sweeps_per_us;
    req.trotter_slices = cfg_.sqa.trotter_slices;
    req.beta = cfg_.sqa.beta;
    req.gamma0 = cfg_.sqa.gamma0;
    req.seed = derive_seed(derive_seed(run_seed_, 0x5a), call_index);
    ReadSet rs = sqa_sample(req);
    if (layout_) return resolve_readset(rs, *layout_, qubo_, derive_seed(derive_seed(run_seed_, 0xc4), call_index));
    rescore(rs, qubo_);
    return rs;
}

Observation ScheduleProblem::operator()(const DesignVector& dv, int reads) {
    const ReadSet rs = sample(dv, reads, log_.size());
    EvalStats st;
    st.reads = static_cast<int>(rs.size());
    st.chains = !rs.chain_breaks.empty();
    if (st.chains) st.cbf = cbf(rs).fraction;
    Observation obs;
    obs.energy = std::numeric_limits<double>::infinity();
    const double tol = 1e-9 * std::max(1.0, std::abs(optimum_));
    for (std::size_t r = 0; r < rs.size(); ++r) {
        obs.energy = std::min(obs.energy, rs.energies[r]);
        const DecodedTour dt = decode_tour(rs.bitstrings[r], inst_.n_cities);
        if (!dt.feasible) continue;
        ++st.feasible_reads;
        if (!obs.feasible_energy || rs.energies[r] < *obs.feasible_energy) obs.feasible_energy = rs.energies[r];
        const double len = tour_length(inst_, dt.tour);
        if (!st.best_tour_length || len < *st.best_tour_length) st.best_tour_length = len;
        if (len <= optimum_ + tol) ++st.ground_reads;
    }
    log_.push_back(st);
    return obs;
}

ScheduleObjective ScheduleProblem::objective() {
    return [this](const DesignVector& dv, int reads) { return (*this)(dv, reads); };
}

RunResult run_cell(const ExperimentConfig& cfg, int n, std::uint64_t seed, int repetition) {
    const TspInstance inst = generate_instance(n, seed);
    const std::uint64_t run_seed = derive_seed(derive_seed(seed, static_cast<std::uint64_t>(n)), repetition);
    RunResult out;
    MetricReport& r = out.report;
    r.method = to_string(cfg.method);
    r.n_cities = n;
    r.seed = seed;
    r.repetition = repetition;
    const bool schedule_method = cfg.method == Method::turbo || cfg.method == Method::rs || cfg.method == Method::gs;
    r.backend = schedule_method ? to_string(cfg.backend) : "classical";
    const bool has_ref = n <= kHeldKarpMaxCities;
    const double ref = has_ref ? exact_solve(inst).length : 0.0;
    r.reference_energy = ref;
    auto set_gap = [&](std::optional<double> best) {
        if (!best || !has_ref || !(ref > 0.0)) return;
        // same tour summed in a different order
        r.gap_percent = *best <= ref + kGroundStateTol * std::max(1.0, ref) ? 0.0 : gap_percent(*best, ref);
    };

    if (schedule_method) {
        ScheduleProblem problem(inst, cfg, run_seed);
        SearchMask mask{cfg.fixed_T, cfg.fixed_reads};
        OptimizationHistory h;
        if (cfg.method == Method::turbo) {
            TurboOptions opt;
            opt.mask = mask;
            h = run_turbo(problem.objective(), cfg.bounds, cfg.budget, run_seed, opt);
        } else if (cfg.method == Method::rs) {
            h = random_search(problem.objective(), cfg.bounds, cfg.budget, run_seed, mask);
        } else {
            h = greedy_search(problem.objective(), cfg.bounds, cfg.budget, run_seed, mask);
        }
        long long reads = 0, feasible = 0;
        std::optional<double> best_len;
        for (const auto& st : problem.log()) {
            reads += st.reads;
            feasible += st.feasible_reads;
            if (st.best_tour_length && (!best_len || *st.best_tour_length < *best_len)) best_len = st.best_tour_length;
        }
        r.reads_total = reads;
        r.p_succ = reads > 0 ? static_cast<double>(feasible) / static_cast<double>(reads) : 0.0;
        r.evaluations = static_cast<int>(h.rows.size());
        r.qpu_time_us = h.qpu_time_used_us;
        if (h.best_index >= 0) {
            const EvalStats& at = problem.log()[static_cast<std::size_t>(h.best_index)];
            r.cbf = at.cbf;
            r.t_f_us = h.best_design.T;
            r.reads_at_best = at.reads;
            if (has_ref) r.tts_us = tts(r.t_f_us, static_cast<double>(at.ground_reads) / at.reads);
        }
        r.best_energy = best_len ? *best_len : (h.best_index >= 0 ? h.best_energy : 0.0);
        set_gap(best_len);
        out.history = std::move(h);
        return out;
    }

    if (cfg.method == Method::sa) {
        SaConfig sc = cfg.sa;
        sc.seed = run_seed;
        const double d = inst.max_distance();
        const Qubo q = build_qubo(inst, d > 0.0 ? cfg.penalty_rel * d : 1.0);
        const ReadSet rs = simulated_annealing(q, sc);
        std::optional<double> best_len;
        for (const auto& b : rs.bitstrings) {
            const DecodedTour dt = decode_tour(b, n);
            if (!dt.feasible) continue;
            const double len = tour_length(inst, dt.tour);
            if (!best_len || len < *best_len) best_len = len;
        }
        r.p_succ = success_probability(rs, n);
        r.reads_total = static_cast<long long>(rs.size());
        r.best_energy = best_len ? *best_len : *std::min_element(rs.energies.begin(), rs.energies.end());
        set_gap(best_len);
        return out;
    }
    if (cfg.method == Method::ga) {
        GaConfig gc = cfg.ga;
        gc.seed = run_seed;
        const GaResult g = genetic_algorithm(inst, gc);
        r.p_succ = 1.0;
        r.best_energy = g.length;
        set_gap(g.length);
        return out;
    }
    const TourSolution s = exact_solve(inst);
    r.p_succ = 1.0;
    r.best_energy = s.length;
    set_gap(s.length);
    return out;
}

namespace {

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
    mean = sd = 0.0;
    if (v.empty()) return;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) return;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << v;
    return os.str();
}

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<MetricReport>& reports) {
    std::vector<std::tuple<std::string, std::string, int>> keys;
    std::map<std::tuple<std::string, std::string, int>, std::vector<const MetricReport*>> groups;
    for (const auto& r : reports) {
        auto key = std::make_tuple(r.method, r.backend, r.n_cities);
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) keys.push_back(key);
        it->second.push_back(&r);
    }
    std::vector<AggregateRow> rows;
    for (const auto& key : keys) {
        const auto& g = groups[key];
        AggregateRow a;
        std::tie(a.method, a.backend, a.n_cities) = key;
        a.runs = static_cast<int>(g.size());
        std::vector<double> e, p, c, t, rb, gap, tt;
        for (const MetricReport* r : g) {
            e.push_back(r->best_energy);
            p.push_back(r->p_succ);
            c.push_back(r->cbf);
            t.push_back(r->t_f_us);
            rb.push_back(r->reads_at_best);
            if (r->gap_percent) {
                gap.push_back(*r->gap_percent);
                if (*r->gap_percent < 0.005) ++a.optimal_runs;
            }
            if (r->tts_us) tt.push_back(*r->tts_us);
        }
        double unused = 0.0;
        mean_std(e, a.best_energy_mean, a.best_energy_std);
        mean_std(p, a.p_succ_mean, a.p_succ_std);
        mean_std(c, a.cbf_mean, a.cbf_std);
        mean_std(t, a.t_f_mean, a.t_f_std);
        mean_std(rb, a.reads_at_best_mean, unused);
        a.gap_runs = static_cast<int>(gap.size());
        mean_std(gap, a.gap_mean, a.gap_std);
        a.tts_runs = static_cast<int>(tt.size());
        mean_std(tt, a.tts_mean, unused);
        rows.push_back(a);
    }
    return rows;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
    std::ostringstream os;
    os << "method,backend,N,runs,best_energy_mean,best_energy_std,p_succ_mean,p_succ_std,cbf_mean,cbf_std,"
          "T_f_mean,T_f_std,reads_at_best_mean,gap_runs,gap_mean,gap_std,optimal_runs,tts_runs,tts_mean\n";
    for (const auto& a : rows) {
        os << a.method << ',' << a.backend << ',' << a.n_cities << ',' << a.runs << ','
           << format_double(a.best_energy_mean) << ',' << format_double(a.best_energy_std) << ','
           << format_double(a.p_succ_mean) << ',' << format_double(a.p_succ_std) << ','
           << format_double(a.cbf_mean) << ',' << format_double(a.cbf_std) << ',' << format_double(a.t_f_mean)
           << ',' << format_double(a.t_f_std) << ',' << format_double(a.reads_at_best_mean) << ',' << a.gap_runs
           << ',' << format_double(a.gap_mean) << ',' << format_double(a.gap_std) << ',' << a.optimal_runs << ','
           << a.tts_runs << ',' << format_double(a.tts_mean) << '\n';
    }
    return os.str();
}

std::string format_table(const std::vector<AggregateRow>& rows, const std::string& layout) {
    std::ostringstream os;
    if (layout == "schedule") {
        os << "N,Method,Best Energy,p_succ,CBF,T_us,readout\n";
        for (const auto& a : rows)
            os << a.n_cities << ',' << a.method << ',' << fixed(a.best_energy_mean, 2) << ','
               << fixed(a.p_succ_mean, 4) << ',' << fixed(a.cbf_mean, 4) << ',' << fixed(a.t_f_mean, 2) << ','
               << std::llround(a.reads_at_best_mean) << '\n';
    } else if (layout == "solver") {
        os << "N,Method,Gap (%),Best energy\n";
        for (const auto& a : rows)
            os << a.n_cities << ',' << a.method << ',' << (a.gap_runs ? fixed(a.gap_mean, 2) : "--") << ','
               << fixed(a.best_energy_mean, 2) << '\n';
    } else if (layout == "noise") {
        os << "N,Method,Gap (%),p_succ,Best energy\n";
        for (const auto& a : rows)
            os << a.n_cities << ',' << a.method << '/' << a.backend << ','
               << (a.gap_runs ? fixed(a.gap_mean, 2) : "--") << ',' << fixed(a.p_succ_mean, 4) << ','
               << fixed(a.best_energy_mean, 2) << '\n';
    } else {
        throw InvalidArgument("unknown table layout '" + layout + "'");
    }
    return os.str();
}

std::string resolve_output_dir(const std::string& configured) {
    if (!configured.empty()) return configured;
    if (const char* env = std::getenv("ANNEAL_OUT_DIR"); env && *env) return env;
    return "out";
}

namespace {

void write_text(const fs::path& p, const std::string& text, std::vector<std::string>& files) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IoError("cannot write " + p.string());
    f << text;
    if (!f) throw IoError("write failed for " + p.string());
    files.push_back(p.string());
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult res;
    fs::path dir;
    const std::string cfg_text = config_to_json(cfg);
    if (cfg.write_files) {
        dir = resolve_output_dir(cfg.output_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        const fs::path probe = dir / ".write_probe";
        {
            std::ofstream f(probe);
            if (ec || !f) throw IoError("output directory not writable: " + dir.string());
        }
        fs::remove(probe, ec);
    }

    for (int n : cfg.n_cities)
        for (std::uint64_t seed : cfg.seeds)
            for (int rep = 0; rep < cfg.repetitions; ++rep) {
                RunResult run = run_cell(cfg, n, seed, rep);
                if (cfg.write_files) {
                    const std::string stem = std::string(to_string(cfg.method)) + "_" + run.report.backend + "_N" +
                                             std::to_string(n) + "_seed" + std::to_string(seed) + "_rep" +
                                             std::to_string(rep);
                    if (run.history) {
                        std::ostringstream os;
                        write_history_csv(os, *run.history, cfg.bounds.order, {"config: " + cfg_text});
                        write_text(dir / (stem + "_history.csv"), os.str(), res.files);
                    }
                    ojson j = ojson::parse(report_to_json(run.report));
                    j["complete"] = run.history ? run.history->complete : true;
                    j["config"] = config_json(cfg);
                    write_text(dir / (stem + "_report.json"), j.dump(2) + "\n", res.files);
                }
                res.reports.push_back(std::move(run.report));
            }

    res.summary = aggregate(res.reports);
    if (cfg.write_files) {
        std::ostringstream rc;
        rc << "# config: " << cfg_text << '\n' << report_csv_header() << '\n';
        for (const auto& r : res.reports) rc << report_csv_row(r) << '\n';
        write_text(dir / "reports.csv", rc.str(), res.files);
        write_text(dir / "summary.csv", "# config: " + cfg_text + "\n" + aggregate_csv(res.summary), res.files);
        ojson s;
        s["config"] = config_json(cfg);
        s["summary"] = ojson::array();
        for (const auto& a : res.summary)
            s["summary"].push_back({{"method", a.method},
                                    {"backend", a.backend},
                                    {"N", a.n_cities},
                                    {"runs", a.runs},
                                    {"best_energy_mean", a.best_energy_mean},
                                    {"best_energy_std", a.best_energy_std},
                                    {"p_succ_mean", a.p_succ_mean},
                                    {"p_succ_std", a.p_succ_std},
                                    {"cbf_mean", a.cbf_mean},
                                    {"cbf_std", a.cbf_std},
                                    {"T_f_mean", a.t_f_mean},
                                    {"T_f_std", a.t_f_std},
                                    {"gap_runs", a.gap_runs},
                                    {"gap_mean", a.gap_mean},
                                    {"gap_std", a.gap_std},
                                    {"optimal_runs", a.optimal_runs},
                                    {"tts_runs", a.tts_runs},
                                    {"tts_mean", a.tts_mean}});
        write_text(dir / "summary.json", s.dump(2) + "\n", res.files);
    }
    return res;
}

std::vector<MetricReport> load_reports(const std::string& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
    std::vector<fs::path> paths;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (e.is_regular_file() && name.size() > 12 && name.ends_with("_report.json")) paths.push_back(e.path());
    }
    std::sort(paths.begin(), paths.end());
    std::vector<MetricReport> out;
    for (const auto& p : paths) {
        std::ifstream f(p);
        if (!f) throw IoError("cannot read " + p.string());
        std::stringstream ss;
        ss << f.rdbuf();
        out.push_back(report_from_json(ss.str()));
    }
    return out;
}

}  // namespace qasched
