#pragma once

#include <string>
#include <utility>
#include <vector>

namespace qasched {

struct ZephyrSize {
    long long qubits = 0;
    int max_degree = 0;
};

/// Z_{m,t}: 8tm^2 + 4tm qubits, degree 4t + 4.
ZephyrSize zephyr_size(int m, int t);

enum class StatsSource { table, constructive };

struct EmbeddingStats {
    int n_cities = 0;
    int logical = 0;
    int physical = 0;
    double mean_chain_len = 0.0;
    StatsSource source = StatsSource::table;
};

/// Measured clique-embedding rows for N = 2..10 and the standard-clique
/// construction beyond.
EmbeddingStats clique_stats(int n_cities);

/// floor(sqrt(k_max)).
int max_embeddable(long long k_max);

struct ChainBounds {
    double lower = 0.0;
    double upper = 0.0;
    bool clamped = false;  // lower exceeded upper (small-L regime)
};

/// upper = (L + 8) / 8, lower = sqrt(L) clamped to at most upper.
ChainBounds chain_bounds(int logical);

/// Chain length of the standard clique embedding of K_L: m = ceil((L + 8) / 16).
int constructive_chain_length(int logical);

/// CSV with columns N, logical, physical, chain_len_mean, lower_bound,
/// upper_bound, lower_clamped, source.
std::string embed_stats_csv(const std::vector<int>& n_values);

}  // namespace qasched
