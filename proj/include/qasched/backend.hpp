#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qasched/schedule.hpp"
#include "qasched/tsp_qubo.hpp"

namespace qasched {

class Rng;

/// Integrated-control-error model. Scales are relative to the largest |h|
/// and |J| of the model being perturbed.
struct NoiseConfig {
    double sigma_h_rel = 0.05;
    double sigma_j_rel = 0.02;
    double rho_ghost = 0.02;
    double sigma_ghost_rel = 0.01;
    std::uint64_t seed = 0;

    void validate() const;
};

IsingModel perturb_ising(const IsingModel& m, const NoiseConfig& nc);

inline constexpr double kDefaultBeta = 100.0;

struct AnnealRequest {
    IsingModel model;
    ScheduleGrid grid;
    int reads = 1;
    double sweeps_per_us = 10.0;
    int trotter_slices = 20;
    double beta = kDefaultBeta;  // in units of the largest |h| or |J|
    double gamma0 = 3.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ReadSet {
    std::vector<Bitstring> bitstrings;
    std::vector<double> energies;
    std::vector<std::vector<std::uint8_t>> chain_breaks;  // empty without a chain layer

    std::size_t size() const { return bitstrings.size(); }
};

inline constexpr double kMaxFlipsPerRead = 1e8;

/// Path-integral Monte Carlo anneal. Energies are those of `req.model`,
/// offset included. Each read starts from fresh random replicas seeded by
/// (seed, read index).
ReadSet sqa_sample(const AnnealRequest& req);

/// Number of Monte Carlo sweeps used for an anneal of length T.
int sweep_count(double T, double sweeps_per_us);

/// Transverse-field strength of the inter-replica coupling, J_perp(s).
double replica_coupling(double gamma, double beta, int slices);

struct ChainLayout {
    std::vector<int> lengths;
    double kappa = 1.0;

    int physical_size() const;
    /// First physical spin of each chain.
    std::vector<int> offsets() const;
};

/// Replaces every logical spin by a path of physical spins coupled by -kappa.
/// The field is split evenly along the chain and logical couplings attach to
/// the first spin of each chain. The offset absorbs kappa * (l_v - 1) per chain
/// so unanimous reads keep their logical energy.
IsingModel chain_extend(const IsingModel& m, const ChainLayout& layout);

/// Floor/ceil mix of per-variable chain lengths summing to `total`.
std::vector<int> chain_lengths_for_total(int n_logical, int total);

struct ResolvedRead {
    Bitstring logical;
    std::vector<std::uint8_t> broken;
};

/// Majority vote per chain; even splits are decided by `tie_break`.
ResolvedRead resolve_chains(std::span<const std::uint8_t> physical_read, const ChainLayout& layout, Rng& tie_break);

/// Resolves every read of a physical ReadSet and scores the logical
/// bitstrings against `q`.
ReadSet resolve_readset(const ReadSet& physical, const ChainLayout& layout, const Qubo& q, std::uint64_t seed);

/// Replaces stored energies by qubo_energy of the stored bitstrings.
void rescore(ReadSet& rs, const Qubo& q);

struct CbfValue {
    double fraction = 0.0;
    bool chains_present = false;
};

/// Mean over reads of the fraction of broken chains.
CbfValue cbf(const ReadSet& rs);

/// {energies, cbf, p_feasible, best_bitstring}; bitstrings as 0/1 strings.
std::string readset_to_json(const ReadSet& rs, int n_cities);

std::string bits_to_string(std::span<const std::uint8_t> bits);

}  // namespace qasched
