#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qasched {

using Bitstring = std::vector<std::uint8_t>;
using Tour = std::vector<int>;

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Euclidean TSP instance. Distances are always derived from coordinates.
struct TspInstance {
    int n_cities = 0;
    std::uint64_t seed = 0;
    std::vector<Point> coords;
    Eigen::MatrixXd dist;

    double max_distance() const;
};

TspInstance instance_from_coords(std::vector<Point> coords, std::uint64_t seed = 0);

/// Cities uniform on [0,100]^2, drawn from qasched::Rng(seed).
TspInstance generate_instance(int n, std::uint64_t seed);

std::string instance_to_json(const TspInstance& inst);
TspInstance instance_from_json(const std::string& text);

/// Closed-tour length, summed in visiting order.
double tour_length(const TspInstance& inst, std::span<const int> tour);

/// Index of x_{city,step} in the flattened N*N assignment vector.
inline int var_index(int city, int step, int n) { return city * n + step; }

/// Penalty-form QUBO. `coeffs` is upper triangular; the diagonal holds the
/// linear terms and `offset` the constant absorbed from the penalty squares.
struct Qubo {
    int dim = 0;
    int n_cities = 0;
    Eigen::MatrixXd coeffs;
    double penalty = 0.0;
    double offset = 0.0;
    bool penalty_below_distance = false;
};

double default_penalty(const TspInstance& inst);

Qubo build_qubo(const TspInstance& inst, double penalty);
inline Qubo build_qubo(const TspInstance& inst) { return build_qubo(inst, default_penalty(inst)); }

double qubo_energy(const Qubo& q, std::span<const std::uint8_t> x);

struct DecodedTour {
    bool feasible = false;
    Tour tour;  // tour[step] = city, filled only when feasible
};

DecodedTour decode_tour(std::span<const std::uint8_t> x, int n);

Bitstring encode_tour(std::span<const int> tour);

struct Coupling {
    int i = 0;
    int j = 0;  // i < j
    double value = 0.0;
};

/// Ising model over spins in {-1,+1}; couplings kept sorted by (i, j).
struct IsingModel {
    int n_spins = 0;
    std::vector<double> h;
    std::vector<Coupling> couplings;
    double offset = 0.0;

    double max_abs_field() const;
    double max_abs_coupling() const;
    bool has_coupling(int i, int j) const;
};

/// Sorts couplings, merges duplicates and drops exact zeros.
void normalize_couplings(IsingModel& m);

/// Full energy including the constant offset.
double ising_energy(const IsingModel& m, std::span<const std::int8_t> spins);

/// Exact change of variables x = (sigma + 1) / 2.
IsingModel qubo_to_ising(const Qubo& q);

std::vector<std::int8_t> bits_to_spins(std::span<const std::uint8_t> x);
Bitstring spins_to_bits(std::span<const std::int8_t> s);

struct TourSolution {
    Tour tour;
    double length = 0.0;
};

inline constexpr int kHeldKarpMaxCities = 18;

/// Held-Karp dynamic program from city 0; among optimal tours the
/// lexicographically smallest one is returned.
TourSolution exact_solve(const TspInstance& inst);

}  // namespace qasched
