#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qasched/schedule.hpp"

namespace qasched {

/// What the objective reports for one evaluated schedule. `energy` is the
/// minimum over reads; `feasible_energy` the minimum over reads that decode
/// to valid tours, when there is one.
struct Observation {
    double energy = 0.0;
    std::optional<double> feasible_energy;
};

using ScheduleObjective = std::function<Observation(const DesignVector&, int reads)>;

enum class TrEvent { none, improve, expand, shrink, restart };

const char* to_string(TrEvent e);

struct HistoryRow {
    int iter = 0;
    DesignVector design;
    int reads = 0;
    double energy = 0.0;
    std::optional<double> feasible_best;  // running minimum of feasible energies
    double t_eval_us = 0.0;
    std::optional<double> tr_side_geomean;
    TrEvent event = TrEvent::none;
};

/// Record of one schedule-optimization run (shared by all schedule methods).
struct OptimizationHistory {
    std::string method;
    std::vector<HistoryRow> rows;
    bool complete = true;
    DesignVector best_design;
    double best_energy = 0.0;
    int best_index = -1;
    double qpu_time_used_us = 0.0;
};

/// Appends one evaluation, carrying the running feasible minimum and the
/// incumbent forward and adding t_eval to the QPU time used.
void record_evaluation(OptimizationHistory& h, const DesignVector& dv, int reads, const Observation& obs,
                       double t_eval, std::optional<double> tr_side, TrEvent event);

/// Long-format CSV: method, iter, T_us, theta_1..theta_M, reads, energy,
/// feasible_best, t_eval_us, tr_side_geomean, event. Each line in
/// `comment_lines` is emitted first with a "# " prefix.
void write_history_csv(std::ostream& os, const OptimizationHistory& h, int order,
                       const std::vector<std::string>& comment_lines = {});

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

}  // namespace qasched
