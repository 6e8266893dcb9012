#include <doctest.h>

#include <cmath>

#include "qasched/backend.hpp"
#include "qasched/errors.hpp"
#include "qasched/metrics.hpp"
#include "qasched/rng.hpp"

using namespace qasched;

namespace {

IsingModel single_spin(double h) {
    IsingModel m;
    m.n_spins = 1;
    m.h = {h};
    return m;
}

IsingModel ferro_pair() {
    IsingModel m;
    m.n_spins = 2;
    m.h = {0.0, 0.0};
    m.couplings = {{0, 1, -1.0}};
    return m;
}

ScheduleGrid linear(double T) { return render_grid(DesignVector{T, {}}); }

// Frustrated ring of 8 spins with random fields.
IsingModel frustrated8() {
    IsingModel m;
    m.n_spins = 8;
    Rng rng(81);
    for (int i = 0; i < 8; ++i) m.h.push_back(rng.uniform(-0.3, 0.3));
    for (int i = 0; i < 8; ++i) m.couplings.push_back({std::min(i, (i + 1) % 8), std::max(i, (i + 1) % 8), 1.0});
    m.couplings.push_back({0, 4, 1.0});
    m.couplings.push_back({2, 6, -1.0});
    normalize_couplings(m);
    return m;
}

double exact_ground(const IsingModel& m) {
    double best = INFINITY;
    for (std::uint64_t s = 0; s < (1ull << m.n_spins); ++s) {
        std::vector<std::int8_t> sp(m.n_spins);
        for (int i = 0; i < m.n_spins; ++i) sp[i] = ((s >> i) & 1) ? 1 : -1;
        best = std::min(best, ising_energy(m, sp));
    }
    return best;
}

}  // namespace

TEST_CASE("single spin finds its ground state") {
    AnnealRequest req{single_spin(-1.0), linear(100.0), 200};
    req.seed = 1;
    const auto rs = sqa_sample(req);
    int up = 0;
    for (const auto& b : rs.bitstrings) up += b[0];
    CHECK(up >= 198);
}

TEST_CASE("ferromagnetic pair aligns and splits evenly") {
    AnnealRequest req{ferro_pair(), linear(100.0), 1000};
    req.seed = 2;
    const auto rs = sqa_sample(req);
    int aligned = 0, ones = 0;
    for (const auto& b : rs.bitstrings) {
        if (b[0] == b[1]) {
            ++aligned;
            ones += b[0];
        }
    }
    CHECK(aligned >= 950);
    const double sigma = std::sqrt(aligned * 0.25);
    CHECK(std::abs(ones - aligned / 2.0) <= 3.0 * sigma);
}

TEST_CASE("zero hamiltonian has no preferred direction") {
    IsingModel z;
    z.n_spins = 3;
    z.h = {0.0, 0.0, 0.0};
    AnnealRequest req{z, linear(2.0), 10000};
    req.seed = 3;
    const auto rs = sqa_sample(req);
    for (int i = 0; i < 3; ++i) {
        double m = 0.0;
        for (const auto& b : rs.bitstrings) m += 2.0 * b[i] - 1.0;
        CHECK(std::abs(m) <= 3.0 * std::sqrt(10000.0));
    }
}

TEST_CASE("stored energies and determinism") {
    const IsingModel m = frustrated8();
    AnnealRequest req{m, linear(5.0), 50};
    req.seed = 4;
    const auto a = sqa_sample(req);
    const auto b = sqa_sample(req);
    CHECK(a.bitstrings == b.bitstrings);
    CHECK(a.energies == b.energies);
    for (std::size_t r = 0; r < a.size(); ++r) CHECK(a.energies[r] == ising_energy(m, bits_to_spins(a.bitstrings[r])));

    IsingModel z;
    z.n_spins = 8;
    z.h.assign(8, 0.0);
    AnnealRequest flat{z, linear(5.0), 50};
    flat.seed = 4;
    const auto f4 = sqa_sample(flat);
    flat.seed = 5;
    CHECK(sqa_sample(flat).bitstrings != f4.bitstrings);
}

namespace {

IsingModel gaussian_glass8() {
    IsingModel m;
    m.n_spins = 8;
    Rng rng(302);
    for (int i = 0; i < 8; ++i) m.h.push_back(rng.normal(0.0, 0.1));
    for (int i = 0; i < 8; ++i)
        for (int j = i + 1; j < 8; ++j) m.couplings.push_back({i, j, rng.normal()});
    return m;
}

// One-sided sign test: P(Bin(n, 1/2) >= wins) for T = 200 us beating T = 2 us
// on mean read energy over 20 paired 100-read batches.
double long_vs_short_p_value(const IsingModel& m, double beta) {
    int wins = 0, losses = 0;
    for (int rep = 0; rep < 20; ++rep) {
        auto mean_energy = [&](double T) {
            AnnealRequest req{m, linear(T), 100};
            req.beta = beta;
            req.seed = derive_seed(rep, static_cast<std::uint64_t>(T));
            const auto rs = sqa_sample(req);
            double s = 0.0;
            for (double e : rs.energies) s += e;
            return s / rs.size();
        };
        const double lo = mean_energy(200.0), hi = mean_energy(2.0);
        if (lo < hi) ++wins;
        else if (lo > hi) ++losses;
    }
    const int n = wins + losses;
    double tail = 0.0;
    for (int k = wins; k <= n; ++k)
        tail += std::exp(std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1) - n * std::log(2.0));
    MESSAGE("beta " << beta << ": long anneal wins " << wins << ", losses " << losses);
    return tail;
}

}  // namespace

TEST_CASE("longer anneals help at moderate inverse temperature") {
    CHECK(long_vs_short_p_value(gaussian_glass8(), 10.0) < 0.05);
}

// Known deviation: at the default beta the lowest-replica readout of a short
// anneal behaves like a best-of-P quench and beats the long anneal.
TEST_CASE("longer anneals do not hurt at the default inverse temperature" * doctest::may_fail()) {
    CHECK(long_vs_short_p_value(gaussian_glass8(), kDefaultBeta) < 0.05);
}

TEST_CASE("sweep accounting") {
    CHECK(sweep_count(20.0, 10.0) == 200);
    CHECK(sweep_count(0.01, 10.0) == 1);
    CHECK(std::isinf(replica_coupling(0.0, 1.0, 20)));
    CHECK(replica_coupling(3.0, 1.0, 20) > 0.0);
    CHECK(replica_coupling(0.1, 1.0, 20) > replica_coupling(3.0, 1.0, 20));

    IsingModel big;
    big.n_spins = 1000;
    big.h.assign(1000, 1.0);
    AnnealRequest req{big, linear(2000.0), 1};
    CHECK_THROWS_AS(sqa_sample(req), ResourceLimit);
    AnnealRequest bad{single_spin(1.0), linear(1.0), 0};
    CHECK_THROWS_AS(sqa_sample(bad), InvalidArgument);
}

TEST_CASE("noise model") {
    const IsingModel m = frustrated8();
    NoiseConfig zero{0.0, 0.0, 0.0, 0.0, 9};
    const IsingModel same = perturb_ising(m, zero);
    CHECK(same.h == m.h);
    CHECK(same.couplings.size() == m.couplings.size());
    for (std::size_t k = 0; k < m.couplings.size(); ++k) {
        CHECK(same.couplings[k].i == m.couplings[k].i);
        CHECK(same.couplings[k].j == m.couplings[k].j);
        CHECK(same.couplings[k].value == m.couplings[k].value);
    }
    CHECK(same.offset == m.offset);

    SUBCASE("field noise scale") {
        double s = 0.0, s2 = 0.0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            const double d = perturb_ising(single_spin(2.0), NoiseConfig{0.05, 0.0, 0.0, 0.0, static_cast<std::uint64_t>(i)}).h[0] - 2.0;
            s += d;
            s2 += d * d;
        }
        const double sd = std::sqrt(s2 / n - (s / n) * (s / n));
        CHECK(std::abs(sd - 0.1) <= 0.005);
    }
    SUBCASE("complete graphs never gain ghost couplings") {
        IsingModel k4;
        k4.n_spins = 4;
        k4.h.assign(4, 0.5);
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) k4.couplings.push_back({i, j, 1.0});
        const auto p = perturb_ising(k4, NoiseConfig{0.05, 0.02, 1.0, 0.5, 1});
        CHECK(p.couplings.size() == 6u);
    }
    SUBCASE("ghost density") {
        IsingModel sparse;
        sparse.n_spins = 60;
        sparse.h.assign(60, 1.0);
        sparse.couplings = {{0, 1, 1.0}};
        const auto p = perturb_ising(sparse, NoiseConfig{0.0, 0.0, 0.1, 0.01, 2});
        const double absent = 60.0 * 59 / 2 - 1;
        CHECK(std::abs((p.couplings.size() - 1.0) - 0.1 * absent) <= 4.0 * std::sqrt(absent * 0.09));
    }
    CHECK(perturb_ising(m, NoiseConfig{}).h == perturb_ising(m, NoiseConfig{}).h);
    CHECK_THROWS_AS(NoiseConfig({0.05, 0.02, 1.5, 0.01, 0}).validate(), InvalidArgument);
}

TEST_CASE("more noise never raises the ground-state hit rate") {
    IsingModel m;
    m.n_spins = 9;
    Rng rng(9);
    for (int i = 0; i < 9; ++i) m.h.push_back(rng.uniform(-1, 1));
    for (int i = 0; i < 9; ++i)
        for (int j = i + 1; j < 9; ++j)
            if (rng.bernoulli(0.5)) m.couplings.push_back({i, j, rng.uniform(-1, 1)});
    const double e0 = exact_ground(m);
    double base = 0.0, doubled = 0.0;
    for (int seed = 0; seed < 20; ++seed) {
        auto rate = [&](double scale) {
            NoiseConfig nc{0.05 * scale, 0.02 * scale, 0.0, 0.0, static_cast<std::uint64_t>(seed)};
            AnnealRequest req{perturb_ising(m, nc), linear(20.0), 100};
            req.seed = derive_seed(seed, 77);
            auto rs = sqa_sample(req);
            int hits = 0;
            for (const auto& b : rs.bitstrings) hits += ising_energy(m, bits_to_spins(b)) <= e0 + 1e-9;
            return hits / 100.0;
        };
        base += rate(1.0);
        doubled += rate(2.0);
    }
    CHECK(doubled <= base);
}

TEST_CASE("chain extension") {
    IsingModel one = single_spin(0.9);
    const auto phys = chain_extend(one, ChainLayout{{3}, 2.0});
    CHECK(phys.n_spins == 3);
    for (double h : phys.h) CHECK(h == doctest::Approx(0.3));
    REQUIRE(phys.couplings.size() == 2u);
    for (const auto& c : phys.couplings) CHECK(c.value == -2.0);

    const IsingModel m = frustrated8();
    const auto id = chain_extend(m, ChainLayout{std::vector<int>(8, 1), 1.0});
    CHECK(id.h == m.h);
    CHECK(id.couplings.size() == m.couplings.size());
    CHECK(id.offset == m.offset);

    const ChainLayout layout{{2, 3, 1, 2, 1, 4, 1, 2}, 1.5};
    const auto ext = chain_extend(m, layout);
    CHECK(ext.n_spins == layout.physical_size());
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::int8_t> logical(8);
        for (auto& s : logical) s = rng.bernoulli(0.5) ? 1 : -1;
        std::vector<std::int8_t> physical;
        for (int v = 0; v < 8; ++v) physical.insert(physical.end(), layout.lengths[v], logical[v]);
        CHECK(ising_energy(ext, physical) == doctest::Approx(ising_energy(m, logical)).epsilon(1e-12));
        Rng tie(0);
        const auto res = resolve_chains(spins_to_bits(physical), layout, tie);
        CHECK(res.logical == spins_to_bits(logical));
        for (auto f : res.broken) CHECK(f == 0);
    }
    CHECK(chain_lengths_for_total(4, 10) == std::vector<int>{3, 3, 2, 2});
}

TEST_CASE("majority vote and chain-break fraction") {
    const ChainLayout layout{{3, 1, 2, 2}, 1.0};
    Rng tie(5);
    const auto r = resolve_chains(Bitstring{1, 1, 0, 1, 0, 0, 1, 1}, layout, tie);
    CHECK(r.logical == Bitstring{1, 1, 0, 1});
    CHECK(r.broken == std::vector<std::uint8_t>{1, 0, 0, 0});

    int ones = 0;
    for (int i = 0; i < 2000; ++i) ones += resolve_chains(Bitstring{0, 0, 0, 1, 0, 1, 1}, ChainLayout{{3, 1, 1, 2}, 1.0}, tie).logical[0];
    CHECK(ones == 0);
    int split = 0;
    for (int i = 0; i < 2000; ++i) split += resolve_chains(Bitstring{1, 0}, ChainLayout{{2}, 1.0}, tie).logical[0];
    CHECK(std::abs(split - 1000) <= 3 * std::sqrt(500.0));

    ReadSet rs;
    rs.chain_breaks = {{1, 0, 0, 0}, {1, 1, 1, 0}};
    rs.bitstrings.resize(2);
    CHECK(cbf(rs).fraction == doctest::Approx(0.5));
    CHECK(cbf(rs).chains_present);
    rs.chain_breaks = {{0, 0}, {0, 0}};
    CHECK(cbf(rs).fraction == 0.0);
    rs.chain_breaks = {{1, 1}, {1, 1}};
    CHECK(cbf(rs).fraction == 1.0);
    ReadSet none;
    none.bitstrings.resize(3);
    CHECK(cbf(none).fraction == 0.0);
    CHECK_FALSE(cbf(none).chains_present);

    std::vector<std::uint8_t> one_broken(25, 0);
    one_broken[7] = 1;
    ReadSet single;
    single.bitstrings.resize(1);
    single.chain_breaks = {one_broken};
    CHECK(cbf(single).fraction == doctest::Approx(1.0 / 25));
}

TEST_CASE("chain breaks fall as the chain strength grows") {
    IsingModel m;
    m.n_spins = 6;
    Rng rng(6);
    for (int i = 0; i < 6; ++i) m.h.push_back(rng.uniform(-4, 4));
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j) m.couplings.push_back({i, j, rng.uniform(-4, 4)});
    double prev = 2.0, first = -1.0;
    for (double kappa : {0.5, 1.0, 2.0, 4.0}) {
        const ChainLayout layout{{3, 3, 3, 3, 3, 3}, kappa};
        AnnealRequest req{chain_extend(m, layout), linear(5.0), 1000};
        req.seed = 11;
        const auto phys = sqa_sample(req);
        ReadSet rs;
        rs.bitstrings.resize(phys.size());
        Rng tie(0);
        for (const auto& b : phys.bitstrings) rs.chain_breaks.push_back(resolve_chains(b, layout, tie).broken);
        const double f = cbf(rs).fraction;
        MESSAGE("kappa " << kappa << " cbf " << f);
        CHECK(f <= prev);
        if (first < 0.0) first = f;
        prev = f;
    }
    CHECK(first > prev);
}

TEST_CASE("readset json") {
    ReadSet rs;
    rs.bitstrings = {{1, 0, 0, 1}, {1, 1, 0, 0}};
    rs.energies = {2.0, 5.5};
    const std::string j = readset_to_json(rs, 2);
    CHECK(j.find("\"p_feasible\":0.5") != std::string::npos);
    CHECK(j.find("\"best_bitstring\":\"1001\"") != std::string::npos);
    CHECK(bits_to_string(Bitstring{0, 1, 1}) == "011");
}
