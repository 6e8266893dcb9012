#include "qasched/tsp_qubo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "qasched/errors.hpp"
#include "qasched/rng.hpp"

namespace qasched {

double TspInstance::max_distance() const { return n_cities > 0 ? dist.maxCoeff() : 0.0; }

TspInstance instance_from_coords(std::vector<Point> coords, std::uint64_t seed) {
    if (coords.empty()) throw InvalidArgument("instance needs at least one city");
    TspInstance inst;
    inst.n_cities = static_cast<int>(coords.size());
    inst.seed = seed;
    inst.coords = std::move(coords);
    const int n = inst.n_cities;
    inst.dist = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = std::hypot(inst.coords[i].x - inst.coords[j].x,
                                        inst.coords[i].y - inst.coords[j].y);
            inst.dist(i, j) = d;
            inst.dist(j, i) = d;
        }
    }
    return inst;
}

TspInstance generate_instance(int n, std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("generate_instance: n must be >= 1");
    Rng rng(seed);
    std::vector<Point> coords(n);
    for (auto& p : coords) {
        p.x = rng.uniform(0.0, 100.0);
        p.y = rng.uniform(0.0, 100.0);
    }
    return instance_from_coords(std::move(coords), seed);
}

std::string instance_to_json(const TspInstance& inst) {
    nlohmann::ordered_json j;
    j["n"] = inst.n_cities;
    j["seed"] = inst.seed;
    auto coords = nlohmann::ordered_json::array();
    for (const auto& p : inst.coords) coords.push_back({p.x, p.y});
    j["coords"] = std::move(coords);
    return j.dump();
}

TspInstance instance_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    const int n = j.at("n").get<int>();
    std::vector<Point> coords;
    for (const auto& c : j.at("coords")) coords.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
    if (static_cast<int>(coords.size()) != n)
        throw InvalidArgument("instance JSON: coords length does not match n");
    return instance_from_coords(std::move(coords), j.value("seed", std::uint64_t{0}));
}

double tour_length(const TspInstance& inst, std::span<const int> tour) {
    double total = 0.0;
    const auto n = tour.size();
    for (std::size_t k = 0; k < n; ++k) total += inst.dist(tour[k], tour[(k + 1) % n]);
    return total;
}

double default_penalty(const TspInstance& inst) {
    const double d = inst.max_distance();
    return d > 0.0 ? 10.0 * d : 1.0;
}

namespace {

void add_term(Eigen::MatrixXd& q, int p, int r, double value) {
    if (p == r)
        q(p, p) += value;
    else
        q(std::min(p, r), std::max(p, r)) += value;
}

}  // namespace

Qubo build_qubo(const TspInstance& inst, double penalty) {
    const int n = inst.n_cities;
    Qubo q;
    q.n_cities = n;
    q.dim = n * n;
    q.penalty = penalty;
    q.coeffs = Eigen::MatrixXd::Zero(q.dim, q.dim);
    if (n > 1 && !(penalty > inst.max_distance())) {
        q.penalty_below_distance = true;
        warn("build_qubo: penalty does not exceed the largest distance; "
             "minimizers may violate the assignment constraints");
    }

    // Tour length: d_ij x_{i,k} x_{j,k+1 mod N}.
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            for (int k = 0; k < n; ++k)
                add_term(q.coeffs, var_index(i, k, n), var_index(j, (k + 1) % n, n), inst.dist(i, j));
        }

    // lambda (1 - sum_v x_v)^2 = lambda (1 - sum_v x_v + 2 sum_{v<w} x_v x_w), per row and column.
    auto add_one_hot = [&](auto index_of) {
        q.offset += penalty;
        for (int a = 0; a < n; ++a) {
            add_term(q.coeffs, index_of(a), index_of(a), -penalty);
            for (int b = a + 1; b < n; ++b) add_term(q.coeffs, index_of(a), index_of(b), 2.0 * penalty);
        }
    };
    for (int i = 0; i < n; ++i) add_one_hot([&](int k) { return var_index(i, k, n); });
    for (int k = 0; k < n; ++k) add_one_hot([&](int i) { return var_index(i, k, n); });
    return q;
}

double qubo_energy(const Qubo& q, std::span<const std::uint8_t> x) {
    if (static_cast<int>(x.size()) != q.dim)
        throw InvalidArgument("qubo_energy: bitstring length does not match QUBO dimension");
    double e = q.offset;
    for (int p = 0; p < q.dim; ++p) {
        if (!x[p]) continue;
        for (int r = p; r < q.dim; ++r)
            if (x[r]) e += q.coeffs(p, r);
    }
    return e;
}

DecodedTour decode_tour(std::span<const std::uint8_t> x, int n) {
    if (static_cast<int>(x.size()) != n * n)
        throw InvalidArgument("decode_tour: bitstring length must be n*n");
    DecodedTour out;
    Tour tour(n, -1);
    for (int k = 0; k < n; ++k) {
        int count = 0;
        for (int i = 0; i < n; ++i)
            if (x[var_index(i, k, n)]) {
                ++count;
                tour[k] = i;
            }
        if (count != 1) return out;
    }
    for (int i = 0; i < n; ++i) {
        int count = 0;
        for (int k = 0; k < n; ++k) count += x[var_index(i, k, n)];
        if (count != 1) return out;
    }
    out.feasible = true;
    out.tour = std::move(tour);
    return out;
}

Bitstring encode_tour(std::span<const int> tour) {
    const int n = static_cast<int>(tour.size());
    Bitstring x(static_cast<std::size_t>(n) * n, 0);
    for (int k = 0; k < n; ++k) x[var_index(tour[k], k, n)] = 1;
    return x;
}

double IsingModel::max_abs_field() const {
    double m = 0.0;
    for (double v : h) m = std::max(m, std::abs(v));
    return m;
}

double IsingModel::max_abs_coupling() const {
    double m = 0.0;
    for (const auto& c : couplings) m = std::max(m, std::abs(c.value));
    return m;
}

bool IsingModel::has_coupling(int i, int j) const {
    if (i > j) std::swap(i, j);
    auto it = std::lower_bound(couplings.begin(), couplings.end(), std::pair{i, j},
                               [](const Coupling& c, const std::pair<int, int>& key) {
                                   return std::pair{c.i, c.j} < key;
                               });
    return it != couplings.end() && it->i == i && it->j == j;
}

void normalize_couplings(IsingModel& m) {
    for (auto& c : m.couplings)
        if (c.i > c.j) std::swap(c.i, c.j);
    std::sort(m.couplings.begin(), m.couplings.end(),
              [](const Coupling& a, const Coupling& b) { return std::pair{a.i, a.j} < std::pair{b.i, b.j}; });
    std::vector<Coupling> merged;
    for (const auto& c : m.couplings) {
        if (!merged.empty() && merged.back().i == c.i && merged.back().j == c.j)
            merged.back().value += c.value;
        else
            merged.push_back(c);
    }
    std::erase_if(merged, [](const Coupling& c) { return c.value == 0.0; });
    m.couplings = std::move(merged);
}

double ising_energy(const IsingModel& m, std::span<const std::int8_t> spins) {
    if (static_cast<int>(spins.size()) != m.n_spins)
        throw InvalidArgument("ising_energy: spin vector length does not match model");
    double e = m.offset;
    for (int i = 0; i < m.n_spins; ++i) e += m.h[i] * spins[i];
    for (const auto& c : m.couplings) e += c.value * spins[c.i] * spins[c.j];
    return e;
}

IsingModel qubo_to_ising(const Qubo& q) {
    IsingModel m;
    m.n_spins = q.dim;
    m.h.assign(q.dim, 0.0);
    m.offset = q.offset;
    for (int p = 0; p < q.dim; ++p) {
        const double lin = q.coeffs(p, p);
        m.h[p] += lin / 2.0;
        m.offset += lin / 2.0;
        for (int r = p + 1; r < q.dim; ++r) {
            const double quad = q.coeffs(p, r);
            if (quad == 0.0) continue;
            m.couplings.push_back({p, r, quad / 4.0});
            m.h[p] += quad / 4.0;
            m.h[r] += quad / 4.0;
            m.offset += quad / 4.0;
        }
    }
    return m;
}

std::vector<std::int8_t> bits_to_spins(std::span<const std::uint8_t> x) {
    std::vector<std::int8_t> s(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] ? 1 : -1;
    return s;
}

Bitstring spins_to_bits(std::span<const std::int8_t> s) {
    Bitstring x(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) x[i] = s[i] > 0 ? 1 : 0;
    return x;
}

TourSolution exact_solve(const TspInstance& inst) {
    const int n = inst.n_cities;
    if (n > kHeldKarpMaxCities)
        throw UnsupportedSize("exact_solve: Held-Karp supports at most " +
                              std::to_string(kHeldKarpMaxCities) + " cities");
    if (n <= 0) throw InvalidArgument("exact_solve: empty instance");
    if (n == 1) return {{0}, 0.0};

    // remaining[mask][j]: shortest path that starts at j, has already visited
    // `mask` (which contains 0 and j), covers every other city and returns to 0.
    const std::size_t full = (std::size_t{1} << n) - 1;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> remaining((full + 1) * n, inf);
    auto at = [&](std::size_t mask, int j) -> double& { return remaining[mask * n + j]; };

    for (int j = 1; j < n; ++j) at(full, j) = inst.dist(j, 0);
    for (std::size_t mask = full; mask-- > 1;) {
        if (!(mask & 1)) continue;
        for (int j = 0; j < n; ++j) {
            if (!(mask & (std::size_t{1} << j))) continue;
            if (j == 0 && mask != 1) continue;
            double best = inf;
            for (int c = 1; c < n; ++c) {
                const std::size_t bit = std::size_t{1} << c;
                if (mask & bit) continue;
                best = std::min(best, inst.dist(j, c) + at(mask | bit, c));
            }
            at(mask, j) = best;
        }
    }

    const double optimum = at(1, 0);
    const double tol = 1e-9 * std::max(1.0, optimum);
    Tour tour{0};
    std::size_t mask = 1;
    int current = 0;
    while (mask != full) {
        for (int c = 1; c < n; ++c) {
            const std::size_t bit = std::size_t{1} << c;
            if (mask & bit) continue;
            if (inst.dist(current, c) + at(mask | bit, c) <= at(mask, current) + tol) {
                tour.push_back(c);
                mask |= bit;
                current = c;
                break;
            }
        }
    }
    const double length = tour_length(inst, tour);
    return {std::move(tour), length};
}

}  // namespace qasched
