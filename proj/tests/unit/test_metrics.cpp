#include <doctest.h>

#include <cmath>

#include "qasched/errors.hpp"
#include "qasched/metrics.hpp"

using namespace qasched;

namespace {

Bitstring perm3(int a, int b, int c) {
    return encode_tour(std::vector<int>{a, b, c});
}

}  // namespace

TEST_CASE("feasible success probability") {
    ReadSet rs;
    for (int i = 0; i < 3; ++i) rs.bitstrings.push_back(perm3(0, 1, 2));
    for (int i = 0; i < 5; ++i) rs.bitstrings.push_back(Bitstring(9, static_cast<std::uint8_t>(i % 2)));
    rs.energies.assign(8, 0.0);
    CHECK(success_probability(rs, 3) == 0.375);
    ReadSet all;
    all.bitstrings = {perm3(2, 0, 1), perm3(1, 2, 0)};
    CHECK(success_probability(all, 3) == 1.0);
    ReadSet none;
    none.bitstrings = {Bitstring(9, 0)};
    CHECK(success_probability(none, 3) == 0.0);
}

TEST_CASE("time to solution") {
    CHECK(*tts(20.0, 0.5) == doctest::Approx(20.0 * std::log(0.01) / std::log(0.5)));
    CHECK(*tts(20.0, 0.5) == doctest::Approx(132.877).epsilon(1e-5));
    CHECK(*tts(20.0, 0.99) == doctest::Approx(20.0));
    CHECK(*tts(20.0, 1.0) == 20.0);
    CHECK_FALSE(tts(20.0, 0.0).has_value());
    CHECK_THROWS_AS(tts(20.0, 0.5, 1.0), InvalidArgument);
    CHECK_THROWS_AS(tts(20.0, 0.5, 0.0), InvalidArgument);
    double prev = INFINITY;
    for (int i = 1; i < 1000; ++i) {
        const double v = *tts(15.0, i / 1000.0);
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("optimality gap") {
    CHECK(std::round(gap_percent(312.49, 271.75) * 100) / 100 == 14.99);
    CHECK(std::round(gap_percent(329.52, 327.27) * 100) / 100 == 0.69);
    CHECK(gap_percent(5.0, 5.0) == 0.0);
    CHECK(gap_percent(7.0, 5.0) - gap_percent(6.0, 5.0) == doctest::Approx(gap_percent(6.0, 5.0) - gap_percent(5.0, 5.0)));
    CHECK_THROWS_AS(gap_percent(1.0, 0.0), InvalidArgument);
}

TEST_CASE("ground state rates") {
    std::vector<ReadSet> batches(10);
    for (int b = 0; b < 10; ++b) {
        batches[b].bitstrings.resize(3);
        batches[b].energies = {5.0, b < 7 ? 1.0 + 5e-10 : 1.1, 3.0};
    }
    CHECK(ground_state_rate(batches, 1.0) == doctest::Approx(0.7));
    CHECK(ground_state_rate(batches, 0.5) == 0.0);
    CHECK(ground_state_rate(batches, 5.0) == 1.0);
    CHECK(ground_state_fraction(batches[0], 1.0) == doctest::Approx(1.0 / 3));

    // per-read ground fraction and feasible success are different quantities
    ReadSet rs;
    rs.bitstrings = {perm3(0, 1, 2), perm3(0, 2, 1)};
    rs.energies = {10.0, 12.0};
    CHECK(success_probability(rs, 3) == 1.0);
    CHECK(ground_state_fraction(rs, 10.0) == 0.5);
}

TEST_CASE("report serialization round trip") {
    MetricReport r;
    r.method = "turbo";
    r.backend = "sqa_noisy";
    r.n_cities = 5;
    r.seed = 3;
    r.repetition = 2;
    r.best_energy = 212.7;
    r.p_succ = 0.755;
    r.cbf = 0.01;
    r.tts_us = 123.4;
    r.gap_percent = 0.0;
    r.reads_total = 1000;
    r.t_f_us = 41.9;
    r.reads_at_best = 26;
    r.reference_energy = 212.7;
    r.evaluations = 30;
    r.qpu_time_us = 1e6;
    const auto back = report_from_json(report_to_json(r));
    CHECK(report_to_json(back) == report_to_json(r));
    CHECK(report_csv_row(back) == report_csv_row(r));
    r.tts_us.reset();
    CHECK(report_csv_row(r).find("undefined") != std::string::npos);
    CHECK_FALSE(report_from_json(report_to_json(r)).tts_us.has_value());
}
