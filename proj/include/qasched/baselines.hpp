#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qasched/backend.hpp"
#include "qasched/history.hpp"
#include "qasched/schedule.hpp"
#include "qasched/tsp_qubo.hpp"
#include "qasched/turbo.hpp"

namespace qasched {

/// Independent draws from sample_random, one per evaluation slot.
OptimizationHistory random_search(const ScheduleObjective& objective, const ScheduleBounds& bounds,
                                  const BudgetConfig& cfg, std::uint64_t seed, const SearchMask& mask = {});

struct GsConfig {
    double log_T_step = 0.4054651081081644;  // ln 1.5
    double theta_step_rel = 0.1;              // fraction of alpha / m
    double decay = 0.7;
};

struct GsState {
    DesignVector current;
    double step_log_T = 0.0;
    std::vector<double> step_theta;
    int evals_used = 0;
};

/// Starts at T = sqrt(T_min T_max), theta = 0. Each step perturbs one random
/// coordinate by +step then -step and accepts only strict decreases; when
/// both signs fail that coordinate's step decays.
OptimizationHistory greedy_search(const ScheduleObjective& objective, const ScheduleBounds& bounds,
                                  const BudgetConfig& cfg, std::uint64_t seed, const SearchMask& mask = {},
                                  const GsConfig& gs = {});

struct SaConfig {
    int sweeps = 1000;
    int reads = 2000;
    std::optional<double> beta_hot;   // default: ln 2 / largest flip cost
    std::optional<double> beta_cold;  // default: ln 1000 / smallest flip cost
    std::uint64_t seed = 0;
};

struct SaRun {
    ReadSet reads;
    std::vector<double> initial_energies;
};

/// Metropolis single-flip annealing on the Ising image of `q` with a
/// geometric inverse-temperature ramp. Energies are qubo_energy values.
SaRun simulated_annealing_run(const Qubo& q, const SaConfig& cfg);
ReadSet simulated_annealing(const Qubo& q, const SaConfig& cfg);

/// (beta_hot, beta_cold) chosen from the coefficient range of `m`.
std::pair<double, double> default_beta_range(const IsingModel& m);

struct GaConfig {
    int population = 50;
    int generations = 200;
    int tournament = 3;
    double mutation_rate = 0.2;
    int elitism = 1;
    std::uint64_t seed = 0;
    std::vector<Tour> initial_population;
};

struct GaResult {
    Tour tour;
    double length = 0.0;
    std::vector<double> best_per_generation;  // index 0 is the initial population
};

/// Permutation GA on closed-tour length: tournament selection, order
/// crossover, swap mutation, elitism.
GaResult genetic_algorithm(const TspInstance& inst, const GaConfig& cfg);

}  // namespace qasched
