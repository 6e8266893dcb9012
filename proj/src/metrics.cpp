#include "qasched/metrics.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "qasched/errors.hpp"
#include "qasched/history.hpp"

namespace qasched {

double success_probability(const ReadSet& rs, int n_cities) {
    if (rs.size() == 0) return 0.0;
    std::size_t ok = 0;
    for (const auto& b : rs.bitstrings)
        if (decode_tour(b, n_cities).feasible) ++ok;
    return static_cast<double>(ok) / static_cast<double>(rs.size());
}

std::optional<double> tts(double t_f, double p, double q) {
    if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("tts: Q must lie in (0, 1)");
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("tts: P must lie in [0, 1]");
    if (p == 0.0) return std::nullopt;
    if (p == 1.0) return t_f;
    return t_f * std::log1p(-q) / std::log1p(-p);
}

double gap_percent(double e_method, double e_ref) {
    if (!(e_ref > 0.0)) throw InvalidArgument("gap_percent: reference energy must be positive");
    return 100.0 * (e_method - e_ref) / e_ref;
}

double ground_state_rate(const std::vector<ReadSet>& batches, double e_star) {
    if (batches.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& rs : batches)
        for (double e : rs.energies)
            if (e <= e_star + kGroundStateTol) {
                ++hits;
                break;
            }
    return static_cast<double>(hits) / static_cast<double>(batches.size());
}

double ground_state_fraction(const ReadSet& rs, double e_star) {
    if (rs.energies.empty()) return 0.0;
    std::size_t hits = 0;
    for (double e : rs.energies)
        if (e <= e_star + kGroundStateTol) ++hits;
    return static_cast<double>(hits) / static_cast<double>(rs.energies.size());
}

namespace {

nlohmann::ordered_json opt(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::optional<double> opt_from(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

}  // namespace

std::string report_to_json(const MetricReport& r) {
    nlohmann::ordered_json j;
    j["method"] = r.method;
    j["backend"] = r.backend;
    j["n_cities"] = r.n_cities;
    j["seed"] = r.seed;
    j["repetition"] = r.repetition;
    j["best_energy"] = r.best_energy;
    j["p_succ"] = r.p_succ;
    j["cbf"] = r.cbf;
    j["tts_us"] = opt(r.tts_us);
    j["gap_percent"] = opt(r.gap_percent);
    j["reads_total"] = r.reads_total;
    j["T_f_us"] = r.t_f_us;
    j["reads_at_best"] = r.reads_at_best;
    j["reference_energy"] = r.reference_energy;
    j["evaluations"] = r.evaluations;
    j["qpu_time_us"] = r.qpu_time_us;
    return j.dump();
}

MetricReport report_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    MetricReport r;
    r.method = j.at("method").get<std::string>();
    r.backend = j.value("backend", std::string());
    r.n_cities = j.at("n_cities").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.repetition = j.value("repetition", 0);
    r.best_energy = j.at("best_energy").get<double>();
    r.p_succ = j.at("p_succ").get<double>();
    r.cbf = j.at("cbf").get<double>();
    r.tts_us = opt_from(j, "tts_us");
    r.gap_percent = opt_from(j, "gap_percent");
    r.reads_total = j.at("reads_total").get<long long>();
    r.t_f_us = j.at("T_f_us").get<double>();
    r.reads_at_best = j.value("reads_at_best", 0);
    r.reference_energy = j.value("reference_energy", 0.0);
    r.evaluations = j.value("evaluations", 0);
    r.qpu_time_us = j.value("qpu_time_us", 0.0);
    return r;
}

std::string report_csv_header() {
    return "method,backend,N,seed,repetition,best_energy,p_succ,cbf,tts_us,gap_percent,reads_total,T_f_us,"
           "reads_at_best,reference_energy,evaluations,qpu_time_us";
}

std::string report_csv_row(const MetricReport& r) {
    std::ostringstream os;
    os << r.method << ',' << r.backend << ',' << r.n_cities << ',' << r.seed << ',' << r.repetition << ','
       << format_double(r.best_energy) << ',' << format_double(r.p_succ) << ',' << format_double(r.cbf) << ','
       << (r.tts_us ? format_double(*r.tts_us) : "undefined") << ','
       << (r.gap_percent ? format_double(*r.gap_percent) : "") << ',' << r.reads_total << ','
       << format_double(r.t_f_us) << ',' << r.reads_at_best << ',' << format_double(r.reference_energy) << ',' << r.evaluations << ','
       << format_double(r.qpu_time_us);
    return os.str();
}

}  // namespace qasched
