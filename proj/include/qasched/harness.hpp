#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qasched/backend.hpp"
#include "qasched/baselines.hpp"
#include "qasched/history.hpp"
#include "qasched/metrics.hpp"
#include "qasched/schedule.hpp"
#include "qasched/tsp_qubo.hpp"
#include "qasched/turbo.hpp"

namespace qasched {

enum class Method { turbo, rs, gs, sa, ga, exact };
enum class BackendKind { sqa_noiseless, sqa_noisy };
enum class ChainMode { off, table };

const char* to_string(Method m);
const char* to_string(BackendKind b);
const char* to_string(ChainMode c);
Method parse_method(const std::string& s);
BackendKind parse_backend(const std::string& s);
ChainMode parse_chains(const std::string& s);

struct SqaSettings {
    double sweeps_per_us = 10.0;
    int trotter_slices = 20;
    double beta = kDefaultBeta;
    double gamma0 = 3.0;
    GridOptions grid;
};

struct ExperimentConfig {
    std::vector<int> n_cities{3};
    std::vector<std::uint64_t> seeds{0};
    Method method = Method::turbo;
    BackendKind backend = BackendKind::sqa_noiseless;
    NoiseConfig noise;
    ScheduleBounds bounds;
    BudgetConfig budget;
    std::optional<double> fixed_T;
    std::optional<int> fixed_reads;
    ChainMode chains = ChainMode::off;
    double chain_strength_rel = 1.0;  // kappa relative to the largest logical |h| or |J|
    int repetitions = 10;
    std::string output_dir;
    double penalty_rel = 10.0;  // lambda = penalty_rel * max distance
    SqaSettings sqa;
    SaConfig sa;
    GaConfig ga;
    bool write_files = true;

    void validate() const;
};

/// Reduced-cost settings for single-core desk runs: shorter anneal-time
/// ceiling, one Monte Carlo sweep per microsecond, reads scaled down tenfold
/// and a 30-evaluation budget. Accounting constants are unchanged.
ExperimentConfig desk_profile(ExperimentConfig cfg);

/// Full resolved config as JSON (every output file embeds it).
std::string config_to_json(const ExperimentConfig& cfg);
/// Reads the keys present in `text` on top of `base`; unknown keys are errors.
ExperimentConfig config_from_json(const std::string& text, ExperimentConfig base = {});

/// Statistics of one objective evaluation, in call order.
struct EvalStats {
    int reads = 0;
    int feasible_reads = 0;
    int ground_reads = 0;  // reads at the exact optimum
    double cbf = 0.0;
    bool chains = false;
    std::optional<double> best_tour_length;
};

/// The schedule-space objective for one (instance, run seed): renders the
/// grid, optionally perturbs and chain-extends the model, anneals, and
/// reports the minimum energy over reads (and over feasible reads).
class ScheduleProblem {
public:
    ScheduleProblem(const TspInstance& inst, const ExperimentConfig& cfg, std::uint64_t run_seed);

    Observation operator()(const DesignVector& dv, int reads);
    ScheduleObjective objective();

    /// Anneals one schedule and returns the logical read set (scored
    /// against the clean QUBO) without touching the call log.
    ReadSet sample(const DesignVector& dv, int reads, std::uint64_t call_index) const;

    const std::vector<EvalStats>& log() const { return log_; }
    const Qubo& qubo() const { return qubo_; }
    double optimum() const { return optimum_; }
    const std::optional<ChainLayout>& layout() const { return layout_; }

private:
    TspInstance inst_;
    ExperimentConfig cfg_;
    std::uint64_t run_seed_;
    Qubo qubo_;
    IsingModel ising_;
    std::optional<ChainLayout> layout_;
    double optimum_ = 0.0;
    std::vector<EvalStats> log_;
};

struct RunResult {
    MetricReport report;
    std::optional<OptimizationHistory> history;
};

/// One (N, seed, repetition) cell.
RunResult run_cell(const ExperimentConfig& cfg, int n_cities, std::uint64_t seed, int repetition);

struct AggregateRow {
    std::string method;
    std::string backend;
    int n_cities = 0;
    int runs = 0;
    double best_energy_mean = 0.0, best_energy_std = 0.0;
    double p_succ_mean = 0.0, p_succ_std = 0.0;
    double cbf_mean = 0.0, cbf_std = 0.0;
    double t_f_mean = 0.0, t_f_std = 0.0;
    double reads_at_best_mean = 0.0;
    int gap_runs = 0;
    double gap_mean = 0.0, gap_std = 0.0;
    int optimal_runs = 0;  // gap below 0.005 %
    int tts_runs = 0;
    double tts_mean = 0.0;
};

/// Groups by (method, backend, N) in first-seen order; sample std (n - 1).
std::vector<AggregateRow> aggregate(const std::vector<MetricReport>& reports);

std::string aggregate_csv(const std::vector<AggregateRow>& rows);

/// Summary table layouts: "schedule" (best energy, p_succ, CBF, T, reads),
/// "solver" (gap, best energy) and "noise" (gap, p_succ, best energy).
std::string format_table(const std::vector<AggregateRow>& rows, const std::string& layout);

struct ExperimentResult {
    std::vector<MetricReport> reports;
    std::vector<AggregateRow> summary;
    std::vector<std::string> files;
};

/// Runs every cell and, when write_files is set, writes per-run history CSVs
/// and report JSONs plus reports.csv, summary.csv and summary.json.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Reads every *_report.json below `dir`, sorted by file name.
std::vector<MetricReport> load_reports(const std::string& dir);

/// Output directory: the configured one, else $ANNEAL_OUT_DIR, else "out".
std::string resolve_output_dir(const std::string& configured);

}  // namespace qasched
