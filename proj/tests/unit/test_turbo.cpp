#include <doctest.h>

#include <cmath>
#include <sstream>

#include "../oracles.hpp"
#include "qasched/errors.hpp"
#include "qasched/turbo.hpp"

using namespace qasched;

TEST_CASE("expected improvement closed form") {
    CHECK(expected_improvement(0.0, 0.0, 1.0, 0.0) == 0.0);
    CHECK(expected_improvement(1.0 - 0.01, 1.0, 1.0, 0.01) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
    CHECK(expected_improvement(11.0, 0.1, 1.0, 0.0) < 1e-20);
    CHECK(expected_improvement(11.0, 0.1, 1.0, 0.0) >= 0.0);
    const auto mc = oracle::mc_ei(-1.0, 0.5, 0.0, 0.0, 1000000, 1);
    CHECK(std::abs(expected_improvement(-1.0, 0.5, 0.0, 0.0) - mc.mean) <= 3.0 * mc.stderr_);
}

TEST_CASE("expected improvement agrees with Monte Carlo") {
    Rng rng(2);
    for (int i = 0; i < 20; ++i) {
        const double mean = rng.uniform(-2, 2), sd = rng.uniform(0.05, 2), f = rng.uniform(-2, 2),
                     xi = rng.uniform(0, 0.1);
        const auto mc = oracle::mc_ei(mean, sd, f, xi, 1000000, 100 + i);
        REQUIRE(std::abs(expected_improvement(mean, sd, f, xi) - mc.mean) <= 3.0 * mc.stderr_ + 1e-15);
    }
}

TEST_CASE("trust region update rules") {
    TurboState st;
    st.tr = make_trust_region({0.5, 0.5}, TrustRegionConfig{});
    st.tr.sides = {0.2, 0.2};
    CHECK(update(st, {0.4, 0.4}, 1.0) == TrEvent::expand);
    CHECK(st.tr.sides == std::vector<double>{0.4, 0.4});
    CHECK(st.tr.center == std::vector<double>{0.4, 0.4});

    for (int i = 0; i < 2; ++i) CHECK(update(st, {0.1, 0.1}, 2.0) == TrEvent::none);
    CHECK(update(st, {0.1, 0.1}, 2.0) == TrEvent::shrink);
    CHECK(st.tr.sides == std::vector<double>{0.2, 0.2});
    CHECK(st.tr.no_improve == 0);

    st.tr.sides = {1.0 / 64, 1.0 / 64};
    for (int i = 0; i < 3; ++i) update(st, {0.9, 0.9}, 5.0);
    CHECK(st.tr.sides == std::vector<double>{0.4, 0.4});
    CHECK(st.tr.center == std::vector<double>{0.4, 0.4});

    st.tr.sides = {1.0, 1.0};
    CHECK(update(st, {0.3, 0.3}, 0.5) == TrEvent::improve);
    CHECK(st.tr.sides == std::vector<double>{1.0, 1.0});
}

TEST_CASE("randomized trust region state machine") {
    Rng rng(3);
    TurboState st;
    const TrustRegionConfig cfg;
    st.tr = make_trust_region({0.5, 0.5, 0.5}, cfg);
    st.f_best = INFINITY;
    double prev_best = INFINITY;
    for (int step = 0; step < 10000; ++step) {
        std::vector<double> u{rng.uniform(), rng.uniform(), rng.uniform()};
        const double e = rng.normal(0.0, 1.0) + 3.0 * std::exp(-step / 2000.0);
        update(st, u, e);
        REQUIRE(st.f_best <= prev_best);
        REQUIRE(st.f_best == *std::min_element(st.energies.begin(), st.energies.end()));
        REQUIRE(static_cast<int>(st.inputs.size()) == step + 1);
        for (double s : st.tr.sides) {
            REQUIRE(s >= cfg.delta_min);
            REQUIRE(s <= cfg.delta_max);
        }
        REQUIRE(st.tr.no_improve < cfg.patience);
        for (int j = 0; j < 3; ++j) REQUIRE(st.tr.lower(j) <= st.tr.upper(j));
        prev_best = st.f_best;
    }
}

TEST_CASE("proposals stay inside the trust region") {
    Rng rng(4);
    PosteriorFn post = [](std::span<const double> x) {
        double m = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) m += std::sin(5.0 * x[j] + j);
        return std::pair{m, 0.3 + 0.2 * x[0]};
    };
    for (int trial = 0; trial < 1000; ++trial) {
        TrustRegion tr = make_trust_region({rng.uniform(), rng.uniform(), rng.uniform()}, TrustRegionConfig{});
        for (double& s : tr.sides) s = rng.uniform(1.0 / 64, 1.0);
        const auto u = maximize_ei(tr, post, 0.0, 0.01, 3, rng, {});
        REQUIRE(tr.contains(u));
        for (double v : u) {
            REQUIRE(v >= 0.0);
            REQUIRE(v <= 1.0);
        }
    }
    TrustRegion point = make_trust_region({0.3, 0.7}, TrustRegionConfig{});
    point.sides = {0.0, 0.0};
    CHECK(maximize_ei(point, post, 0.0, 0.01, 5, rng, {}) == std::vector<double>{0.3, 0.7});
}

TEST_CASE("multi-start search finds the grid argmax of EI") {
    PosteriorFn post = [](std::span<const double> x) {
        const double m = 4.0 * ((x[0] - 0.35) * (x[0] - 0.35) + (x[1] - 0.6) * (x[1] - 0.6));
        return std::pair{m, 0.05 + 0.1 * x[0]};
    };
    const double f_best = 0.1, xi = 0.0;
    double best = -1.0, bx = 0.0, by = 0.0;
    const int g = 1000;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            const std::vector<double> x{(i + 0.5) / g, (j + 0.5) / g};
            const auto [m, s] = post(x);
            const double v = expected_improvement(m, s, f_best, xi);
            if (v > best) {
                best = v;
                bx = x[0];
                by = x[1];
            }
        }
    TrustRegion tr = make_trust_region({0.5, 0.5}, TrustRegionConfig{});
    tr.sides = {0.5, 0.5};
    Rng rng(5);
    const auto u = maximize_ei(tr, post, f_best, xi, 10, rng, {});
    CHECK(std::hypot(u[0] - bx, u[1] - by) <= 1e-2);
    const auto [m, s] = post(u);
    CHECK(expected_improvement(m, s, f_best, xi) >= best - 1e-9);
}

TEST_CASE("reads schedule and evaluation budget") {
    const BudgetConfig cfg;
    CHECK(adaptive_reads(0.0, cfg) == 250);
    CHECK(adaptive_reads(1.0, cfg) == 900);
    CHECK(adaptive_reads(0.5, cfg) == 575);
    CHECK(eval_budget(20.0, 250, cfg) == 50000.0);
    CHECK(eval_budget(20.0, 0, cfg) == cfg.t_prog);
    BudgetConfig over = cfg;
    over.t_overhead = 10.0;
    CHECK(eval_budget(1.0, 1, over) == cfg.t_prog + 111.0);

    BudgetConfig lim = cfg;
    lim.qpu_limit = 100000.0;
    CHECK(next_reads(0, 20.0, 0.0, lim, {}) == 250);
    CHECK_FALSE(next_reads(0, 20.0, 60000.0, lim, {}).has_value());
    CHECK_FALSE(next_reads(40, 20.0, 0.0, cfg, {}).has_value());
    CHECK(next_reads(7, 20.0, 0.0, cfg, SearchMask{std::nullopt, 123}) == 123);

    BudgetConfig bad = cfg;
    bad.r_min = 1000;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("latin hypercube strata") {
    Rng rng(6);
    const auto pts = latin_hypercube(10, 3, rng);
    for (int j = 0; j < 3; ++j) {
        std::vector<int> seen(10, 0);
        for (const auto& p : pts) ++seen[static_cast<int>(p[j] * 10)];
        for (int c : seen) CHECK(c == 1);
    }
}

namespace {

// f(T) = (ln T - ln 50)^2, minimized at T = 50.
Observation log_bowl(const DesignVector& dv, int) {
    const double r = std::log(dv.T) - std::log(50.0);
    return {r * r, r * r};
}

}  // namespace

TEST_CASE("turbo converges on a one-dimensional bowl") {
    const ScheduleBounds b = default_bounds(0);
    BudgetConfig cfg;
    cfg.max_evals = 40;
    const auto h = run_turbo(log_bowl, b, cfg, 1);
    CHECK(h.rows.size() == 40u);
    CHECK(h.complete);
    const double u_best = to_unit(h.best_design, b)[0];
    const double u_star = to_unit(DesignVector{50.0, {}}, b)[0];
    CHECK(std::abs(u_best - u_star) <= 0.02);
}

TEST_CASE("turbo history invariants") {
    const ScheduleBounds b = default_bounds(3);
    auto f = [](const DesignVector& dv, int reads) {
        double e = std::pow(std::log(dv.T / 30.0), 2);
        for (int m = 0; m < dv.order(); ++m) e += (m + 1) * dv.thetas[m] * dv.thetas[m];
        return Observation{e + 1.0 / reads, std::nullopt};
    };
    BudgetConfig cfg;
    cfg.max_evals = 25;
    cfg.qpu_limit = 25 * 500000.0;
    const auto h = run_turbo(f, b, cfg, 7);
    double used = 0.0, best = INFINITY;
    for (std::size_t i = 0; i < h.rows.size(); ++i) {
        const auto& r = h.rows[i];
        CHECK(b.contains(r.design));
        used += r.t_eval_us;
        CHECK(used <= cfg.qpu_limit);
        best = std::min(best, r.energy);
        if (i > 0) CHECK(r.reads >= h.rows[i - 1].reads);
    }
    CHECK(used == h.qpu_time_used_us);
    CHECK(h.best_energy == best);

    const auto again = run_turbo(f, b, cfg, 7);
    std::ostringstream a, c;
    write_history_csv(a, h, 3);
    write_history_csv(c, again, 3);
    CHECK(a.str() == c.str());
}

TEST_CASE("turbo budget edge cases") {
    const ScheduleBounds b = default_bounds(2);
    BudgetConfig cfg;
    cfg.max_evals = cfg.resolved_n_init(b.dims());
    const auto h = run_turbo(log_bowl, b, cfg, 2);
    CHECK(static_cast<int>(h.rows.size()) == cfg.max_evals);
    for (const auto& r : h.rows) CHECK_FALSE(r.tr_side_geomean.has_value());

    BudgetConfig tight;
    tight.qpu_limit = 3 * 50000.0;
    const auto p = run_turbo(log_bowl, b, tight, 2);
    CHECK_FALSE(p.complete);
    CHECK(p.rows.size() < 6u);
}

TEST_CASE("fixed T and reads mask") {
    const ScheduleBounds b = default_bounds(4);
    BudgetConfig cfg;
    cfg.max_evals = 20;
    TurboOptions opt;
    opt.mask = {37.5, 300};
    auto f = [](const DesignVector& dv, int) { return Observation{dv.thetas[0] * dv.thetas[0] + dv.thetas[1], {}}; };
    const auto h = run_turbo(f, b, cfg, 3, opt);
    CHECK(h.rows.size() == 20u);
    for (const auto& r : h.rows) {
        CHECK(r.design.T == 37.5);
        CHECK(r.reads == 300);
    }
    opt.mask = {5000.0, std::nullopt};
    CHECK_THROWS_AS(run_turbo(f, b, cfg, 3, opt), InvalidArgument);
}
