#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qasched/history.hpp"
#include "qasched/schedule.hpp"
#include "qasched/surrogate.hpp"

namespace qasched {

class Rng;

struct BudgetConfig {
    double t_prog = 20000.0;    // us
    double t_readout = 100.0;   // us per read
    double t_overhead = 0.0;    // us per read
    double qpu_limit = std::numeric_limits<double>::infinity();
    int max_evals = 40;
    int r_min = 250;
    int r_max = 900;
    double xi = 0.01;           // in standardized target units
    int n_init = 0;             // 0 -> 2 * dims
    int restarts = 10;

    void validate() const;
    int resolved_n_init(int dims) const { return n_init > 0 ? n_init : 2 * dims; }
};

struct TrustRegionConfig {
    double rho = 0.5;
    int patience = 3;
    double delta_init = 0.4;
    double delta_min = 1.0 / 64.0;
    double delta_max = 1.0;
};

/// Box |u_j - center_j| <= sides_j in unit-cube coordinates.
struct TrustRegion {
    std::vector<double> center;
    std::vector<double> sides;
    int no_improve = 0;
    TrustRegionConfig config;

    double lower(int j) const;  // clipped to [0, 1]
    double upper(int j) const;
    bool contains(std::span<const double> u) const;
    double side_geomean() const;
};

TrustRegion make_trust_region(std::vector<double> center, const TrustRegionConfig& config);

struct TurboState {
    std::vector<std::vector<double>> inputs;  // unit-cube coordinates
    std::vector<double> energies;
    std::vector<double> incumbent;
    double f_best = std::numeric_limits<double>::infinity();
    TrustRegion tr;
    int evals_used = 0;
    double qpu_time_used = 0.0;
};

/// Appends the observation and applies the expand / shrink / restart rules.
/// Returns the event the update triggered.
TrEvent update(TurboState& state, std::vector<double> u_new, double e_new);

double expected_improvement(double mean, double sd, double f_best, double xi);

/// (mean, sd) of the surrogate at a unit-cube point.
using PosteriorFn = std::function<std::pair<double, double>(std::span<const double>)>;

/// Multi-start coordinate search for the EI maximizer inside TR ∩ [0,1]^d.
/// Coordinates not listed in `free_dims` stay at the TR center.
std::vector<double> maximize_ei(const TrustRegion& tr, const PosteriorFn& posterior, double f_best, double xi,
                                int restarts, Rng& rng, const std::vector<int>& free_dims);

/// EI is evaluated on the model's standardized targets.
std::vector<double> propose(const TurboState& state, const GpModel& model, const BudgetConfig& cfg, Rng& rng,
                            const std::vector<int>& free_dims = {});

int adaptive_reads(double progress, const BudgetConfig& cfg);

/// t_prog + R * (T + t_readout + t_overhead), all in microseconds.
double eval_budget(double T, int reads, const BudgetConfig& cfg);

/// Dimensions held fixed during a search (both the T coordinate and the
/// reads count may be frozen).
struct SearchMask {
    std::optional<double> fixed_T;
    std::optional<int> fixed_reads;
};

/// Reads and budget check shared by every schedule-space method: returns the
/// number of reads for evaluation `index`, or nullopt when max_evals or the
/// QPU budget would be exceeded.
std::optional<int> next_reads(int index, double T, double qpu_used, const BudgetConfig& cfg, const SearchMask& mask);

/// Latin hypercube sample of n points in [0,1]^dims.
std::vector<std::vector<double>> latin_hypercube(int n, int dims, Rng& rng);

struct TurboOptions {
    TrustRegionConfig tr;
    GpFitConfig gp;
    SearchMask mask;
};

OptimizationHistory run_turbo(const ScheduleObjective& objective, const ScheduleBounds& bounds,
                              const BudgetConfig& cfg, std::uint64_t seed, const TurboOptions& options = {});

}  // namespace qasched
