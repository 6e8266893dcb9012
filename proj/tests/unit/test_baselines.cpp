#include <doctest.h>

#include <cmath>

#include "qasched/baselines.hpp"
#include "qasched/errors.hpp"
#include "qasched/metrics.hpp"

using namespace qasched;

namespace {

Observation log_bowl(const DesignVector& dv, double target) {
    const double r = std::log(dv.T) - std::log(target);
    return {r * r, std::nullopt};
}

BudgetConfig evals(int n) {
    BudgetConfig cfg;
    cfg.max_evals = n;
    return cfg;
}

}  // namespace

TEST_CASE("random search") {
    const ScheduleBounds b = default_bounds();
    auto f = [](const DesignVector& dv, int) { return log_bowl(dv, 44.0); };
    CHECK(random_search(f, b, evals(1), 0).rows.size() == 1u);

    const auto h = random_search(f, b, evals(1000), 1);
    for (const auto& r : h.rows) REQUIRE(b.contains(r.design));
    CHECK(h.method == "rs");

    const double t_geo = std::sqrt(b.t_min * b.t_max);
    auto quad = [&](const DesignVector& dv, int) { return Observation{(dv.T - t_geo) * (dv.T - t_geo), {}}; };
    int better = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto r = random_search(quad, b, evals(200), seed);
        better += r.best_energy < r.rows.front().energy;
    }
    // the first draw is best of 200 with probability 1/200; at most 2 of 50
    // seeds may fail (binomial upper tail below 2% at a 0.99 success rate)
    CHECK(better >= 48);
}

TEST_CASE("greedy search") {
    const ScheduleBounds b = default_bounds();
    std::vector<DesignVector> seen;
    auto constant = [&](const DesignVector& dv, int) {
        seen.push_back(dv);
        return Observation{1.0, 1.0};
    };
    const auto h = greedy_search(constant, b, evals(30), 0);
    CHECK(seen.front().T == doctest::Approx(std::sqrt(2000.0)));
    CHECK(seen.front().T == doctest::Approx(44.72).epsilon(1e-3));
    for (double t : seen.front().thetas) CHECK(t == 0.0);
    CHECK(h.best_index == 0);
    CHECK(h.rows.size() == 30u);

    auto f = [](const DesignVector& dv, int) { return log_bowl(dv, 300.0); };
    const auto g = greedy_search(f, default_bounds(0), evals(100), 1);
    CHECK(std::abs(g.best_design.T - 300.0) <= 0.05 * 300.0);

    // accepted moves are strict decreases
    auto rough = [](const DesignVector& dv, int) {
        double e = std::abs(std::log(dv.T / 150.0));
        for (int m = 0; m < dv.order(); ++m) e += std::abs(dv.thetas[m] - 0.05 * m);
        return Observation{e, {}};
    };
    const auto r = greedy_search(rough, b, evals(200), 2);
    double inc = INFINITY;
    for (const auto& row : r.rows) {
        if (row.event == TrEvent::improve) {
            CHECK(row.energy < inc);
            inc = row.energy;
        } else {
            CHECK(row.energy >= inc);
        }
    }
}

TEST_CASE("schedule baselines use the same evaluation budget as turbo") {
    const ScheduleBounds b = default_bounds(2);
    auto f = [](const DesignVector& dv, int) { return log_bowl(dv, 80.0); };
    const BudgetConfig cfg = evals(18);
    const auto t = run_turbo(f, b, cfg, 4);
    const auto r = random_search(f, b, cfg, 4);
    const auto g = greedy_search(f, b, cfg, 4);
    REQUIRE(t.rows.size() == 18u);
    REQUIRE(r.rows.size() == 18u);
    REQUIRE(g.rows.size() == 18u);
    for (int i = 0; i < 18; ++i) {
        CHECK(t.rows[i].reads == r.rows[i].reads);
        CHECK(t.rows[i].reads == g.rows[i].reads);
    }
}

TEST_CASE("simulated annealing") {
    Qubo one;
    one.dim = 1;
    one.coeffs = Eigen::MatrixXd::Constant(1, 1, -1.0);
    SaConfig cfg;
    cfg.reads = 500;
    cfg.sweeps = 100;
    const auto rs = simulated_annealing(one, cfg);
    int at_one = 0;
    for (const auto& b : rs.bitstrings) at_one += b[0];
    CHECK(at_one >= 495);

    const auto inst = generate_instance(3, 0);
    const Qubo q = build_qubo(inst);
    const auto tsp = simulated_annealing(q, SaConfig{});
    CHECK(tsp.size() == 2000u);
    CHECK(*std::min_element(tsp.energies.begin(), tsp.energies.end()) ==
          doctest::Approx(exact_solve(inst).length).epsilon(1e-12));
    for (std::size_t r = 0; r < tsp.size(); ++r) REQUIRE(tsp.energies[r] == qubo_energy(q, tsp.bitstrings[r]));

    SaConfig greedy;
    greedy.beta_hot = 1e9;
    greedy.beta_cold = 1e9;
    greedy.reads = 200;
    greedy.sweeps = 5;
    const auto run = simulated_annealing_run(build_qubo(generate_instance(4, 1)), greedy);
    for (std::size_t r = 0; r < run.reads.size(); ++r) CHECK(run.reads.energies[r] <= run.initial_energies[r]);
}

TEST_CASE("zero qubo samples uniformly") {
    Qubo z;
    z.dim = 4;
    z.n_cities = 2;
    z.coeffs = Eigen::MatrixXd::Zero(4, 4);
    SaConfig cfg;
    cfg.reads = 4000;
    cfg.sweeps = 10;
    const auto rs = simulated_annealing(z, cfg);
    for (double e : rs.energies) CHECK(e == 0.0);
    // 2 of the 16 assignments are permutation matrices
    const double p = success_probability(rs, 2);
    CHECK(std::abs(p - 2.0 / 16) <= 3.0 * std::sqrt(0.125 * 0.875 / 4000));
}

TEST_CASE("genetic algorithm") {
    const auto i2 = generate_instance(2, 0);
    CHECK(genetic_algorithm(i2, GaConfig{}).length == doctest::Approx(2 * i2.dist(0, 1)));

    const auto i5 = generate_instance(5, 0);
    const auto res = genetic_algorithm(i5, GaConfig{});
    CHECK(res.length == doctest::Approx(exact_solve(i5).length).epsilon(1e-12));
    for (std::size_t g = 1; g < res.best_per_generation.size(); ++g)
        CHECK(res.best_per_generation[g] <= res.best_per_generation[g - 1]);
    CHECK(res.best_per_generation.size() == 201u);

    GaConfig frozen;
    frozen.mutation_rate = 0.0;
    frozen.initial_population.assign(50, Tour{0, 2, 1, 4, 3, 5});
    const auto f = genetic_algorithm(generate_instance(6, 1), frozen);
    for (double v : f.best_per_generation) CHECK(v == f.best_per_generation.front());

    const auto a = genetic_algorithm(i5, GaConfig{.seed = 9});
    const auto b = genetic_algorithm(i5, GaConfig{.seed = 9});
    CHECK(a.best_per_generation == b.best_per_generation);
    CHECK_THROWS_AS(genetic_algorithm(i5, GaConfig{.population = 1}), InvalidArgument);
}
