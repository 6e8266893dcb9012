#include "qasched/history.hpp"

#include <charconv>
#include <cmath>

namespace qasched {

const char* to_string(TrEvent e) {
    switch (e) {
        case TrEvent::improve: return "improve";
        case TrEvent::expand: return "expand";
        case TrEvent::shrink: return "shrink";
        case TrEvent::restart: return "restart";
        case TrEvent::none: break;
    }
    return "";
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

void record_evaluation(OptimizationHistory& h, const DesignVector& dv, int reads, const Observation& obs,
                       double t_eval, std::optional<double> tr_side, TrEvent event) {
    HistoryRow row;
    row.iter = static_cast<int>(h.rows.size());
    row.design = dv;
    row.reads = reads;
    row.energy = obs.energy;
    row.feasible_best = h.rows.empty() ? std::nullopt : h.rows.back().feasible_best;
    if (obs.feasible_energy && (!row.feasible_best || *obs.feasible_energy < *row.feasible_best))
        row.feasible_best = obs.feasible_energy;
    row.t_eval_us = t_eval;
    row.tr_side_geomean = tr_side;
    row.event = event;
    if (h.best_index < 0 || obs.energy < h.best_energy) {
        h.best_index = row.iter;
        h.best_energy = obs.energy;
        h.best_design = dv;
    }
    h.qpu_time_used_us += t_eval;
    h.rows.push_back(std::move(row));
}

void write_history_csv(std::ostream& os, const OptimizationHistory& h, int order,
                       const std::vector<std::string>& comment_lines) {
    for (const auto& line : comment_lines) os << "# " << line << '\n';
    os << "method,iter,T_us";
    for (int m = 1; m <= order; ++m) os << ",theta_" << m;
    os << ",reads,energy,feasible_best,t_eval_us,tr_side_geomean,event\n";
    for (const auto& r : h.rows) {
        os << h.method << ',' << r.iter << ',' << format_double(r.design.T);
        for (int m = 0; m < order; ++m)
            os << ',' << (m < r.design.order() ? format_double(r.design.thetas[m]) : "0");
        os << ',' << r.reads << ',' << format_double(r.energy) << ',';
        if (r.feasible_best) os << format_double(*r.feasible_best);
        os << ',' << format_double(r.t_eval_us) << ',';
        if (r.tr_side_geomean) os << format_double(*r.tr_side_geomean);
        os << ',' << to_string(r.event) << '\n';
    }
}

}  // namespace qasched
