#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qasched/backend.hpp"

namespace qasched {

/// Fraction of reads whose bitstring decodes to a valid tour.
double success_probability(const ReadSet& rs, int n_cities);

/// T_f ln(1-Q) / ln(1-P). Undefined (nullopt) at P = 0; T_f at P = 1.
std::optional<double> tts(double t_f, double p, double q = 0.99);

/// 100 (e_method - e_ref) / e_ref.
double gap_percent(double e_method, double e_ref);

inline constexpr double kGroundStateTol = 1e-9;

/// Fraction of batches with at least one read at or below e_star + 1e-9.
double ground_state_rate(const std::vector<ReadSet>& batches, double e_star);

/// Per-read fraction of reads at the ground-state energy.
double ground_state_fraction(const ReadSet& rs, double e_star);

struct MetricReport {
    std::string method;
    std::string backend;
    int n_cities = 0;
    std::uint64_t seed = 0;
    int repetition = 0;
    double best_energy = 0.0;
    double p_succ = 0.0;
    double cbf = 0.0;
    std::optional<double> tts_us;
    std::optional<double> gap_percent;
    long long reads_total = 0;
    double t_f_us = 0.0;
    int reads_at_best = 0;
    double reference_energy = 0.0;
    int evaluations = 0;
    double qpu_time_us = 0.0;
};

std::string report_to_json(const MetricReport& r);
MetricReport report_from_json(const std::string& text);

std::string report_csv_header();
std::string report_csv_row(const MetricReport& r);

}  // namespace qasched
