#include "qasched/embed.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "qasched/errors.hpp"

namespace qasched {

namespace {

struct Row {
    int physical;
    double chain;
};

// Zephyr clique embeddings measured on Advantage2 (N = 2..10).
constexpr Row kTable[] = {
    {4, 1.00}, {22, 2.44}, {40, 2.50}, {88, 3.52}, {161, 4.47}, {267, 5.45}, {416, 6.50}, {687, 8.48}, {1151, 11.51},
};
constexpr int kTableFirst = 2;
constexpr int kTableLast = 10;

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

ZephyrSize zephyr_size(int m, int t) {
    if (m < 1 || t < 1) throw InvalidArgument("zephyr_size: need m >= 1 and t >= 1");
    const long long mm = m, tt = t;
    return {8 * tt * mm * mm + 4 * tt * mm, 4 * t + 4};
}

int constructive_chain_length(int logical) {
    if (logical < 1) throw InvalidArgument("constructive_chain_length: L must be >= 1");
    return (logical + 8 + 15) / 16;
}

EmbeddingStats clique_stats(int n_cities) {
    if (n_cities < 2) throw InvalidArgument("clique_stats: need at least 2 cities");
    if (n_cities > 46340) throw InvalidArgument("clique_stats: N too large");
    EmbeddingStats s;
    s.n_cities = n_cities;
    s.logical = n_cities * n_cities;
    if (n_cities <= kTableLast) {
        const Row& r = kTable[n_cities - kTableFirst];
        s.physical = r.physical;
        s.mean_chain_len = r.chain;
        s.source = StatsSource::table;
        return s;
    }
    const int m = constructive_chain_length(s.logical);
    s.physical = s.logical * m;
    s.mean_chain_len = m;
    s.source = StatsSource::constructive;
    return s;
}

int max_embeddable(long long k_max) {
    if (k_max < 0) throw InvalidArgument("max_embeddable: k_max must be >= 0");
    long long r = static_cast<long long>(std::sqrt(static_cast<double>(k_max)));
    while (r * r > k_max) --r;
    while ((r + 1) * (r + 1) <= k_max) ++r;
    return static_cast<int>(r);
}

ChainBounds chain_bounds(int logical) {
    if (logical < 1) throw InvalidArgument("chain_bounds: L must be >= 1");
    ChainBounds b;
    b.upper = (logical + 8) / 8.0;
    b.lower = std::sqrt(static_cast<double>(logical));
    if (b.lower > b.upper) {
        b.lower = b.upper;
        b.clamped = true;
    }
    return b;
}

std::string embed_stats_csv(const std::vector<int>& n_values) {
    std::ostringstream os;
    os << "N,logical,physical,chain_len_mean,lower_bound,upper_bound,lower_clamped,source\n";
    for (int n : n_values) {
        const EmbeddingStats s = clique_stats(n);
        const ChainBounds b = chain_bounds(s.logical);
        os << s.n_cities << ',' << s.logical << ',' << s.physical << ',' << fixed(s.mean_chain_len, 2) << ','
           << fixed(b.lower, 4) << ',' << fixed(b.upper, 4) << ',' << (b.clamped ? 1 : 0) << ','
           << (s.source == StatsSource::table ? "table" : "constructive") << '\n';
    }
    return os.str();
}

}  // namespace qasched
