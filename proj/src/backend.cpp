#include "qasched/backend.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "qasched/errors.hpp"
#include "qasched/rng.hpp"

namespace qasched {

void NoiseConfig::validate() const {
    for (double v : {sigma_h_rel, sigma_j_rel, rho_ghost, sigma_ghost_rel})
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("NoiseConfig: scales must lie in [0, 1]");
}

IsingModel perturb_ising(const IsingModel& m, const NoiseConfig& nc) {
    nc.validate();
    IsingModel out = m;
    Rng rng(derive_seed(nc.seed, 0x1ce));
    const double sh = nc.sigma_h_rel * m.max_abs_field();
    const double sj = nc.sigma_j_rel * m.max_abs_coupling();
    const double sg = nc.sigma_ghost_rel * m.max_abs_coupling();
    if (sh > 0.0)
        for (double& h : out.h) h += rng.normal(0.0, sh);
    if (sj > 0.0)
        for (auto& c : out.couplings) c.value += rng.normal(0.0, sj);
    if (nc.rho_ghost > 0.0 && sg > 0.0) {
        const int n = m.n_spins;
        std::vector<std::uint8_t> present(static_cast<std::size_t>(n) * n, 0);
        for (const auto& c : m.couplings) present[static_cast<std::size_t>(c.i) * n + c.j] = 1;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                if (present[static_cast<std::size_t>(i) * n + j]) continue;
                if (rng.bernoulli(nc.rho_ghost)) out.couplings.push_back({i, j, rng.normal(0.0, sg)});
            }
    }
    normalize_couplings(out);
    return out;
}

void AnnealRequest::validate() const {
    if (reads < 1) throw InvalidArgument("AnnealRequest: reads must be >= 1");
    if (trotter_slices < 2) throw InvalidArgument("AnnealRequest: need at least 2 Trotter slices");
    if (!(sweeps_per_us > 0.0)) throw InvalidArgument("AnnealRequest: sweeps_per_us must be positive");
    if (!(beta > 0.0) || !(gamma0 >= 0.0)) throw InvalidArgument("AnnealRequest: bad beta or gamma0");
    if (!grid.valid()) throw InvalidArgument("AnnealRequest: invalid schedule grid");
    if (static_cast<int>(model.h.size()) != model.n_spins) throw InvalidArgument("AnnealRequest: malformed model");
}

int sweep_count(double T, double sweeps_per_us) {
    return std::max(1, static_cast<int>(std::lround(sweeps_per_us * T)));
}

double replica_coupling(double gamma, double beta, int slices) {
    if (!(gamma > 0.0)) return std::numeric_limits<double>::infinity();
    const double t = std::tanh(beta * gamma / slices);
    if (!(t > 0.0)) return std::numeric_limits<double>::infinity();
    return -(slices / (2.0 * beta)) * std::log(t);
}

ReadSet sqa_sample(const AnnealRequest& req) {
    req.validate();
    const auto& model = req.model;
    const int n = model.n_spins;
    const int P = req.trotter_slices;
    const double T = req.grid.anneal_time();
    const int S = sweep_count(T, req.sweeps_per_us);
    if (static_cast<double>(S) * P * n > kMaxFlipsPerRead)
        throw ResourceLimit("sqa_sample: sweep budget exceeds 1e8 spin flips per read");

    // Work in units of the largest coefficient so beta and gamma0 are scale free.
    double scale = std::max(model.max_abs_field(), model.max_abs_coupling());
    if (!(scale > 0.0)) scale = 1.0;
    std::vector<double> h(n);
    for (int i = 0; i < n; ++i) h[i] = model.h[i] / scale;
    std::vector<int> deg(n + 1, 0);
    for (const auto& c : model.couplings) {
        ++deg[c.i + 1];
        ++deg[c.j + 1];
    }
    for (int i = 0; i < n; ++i) deg[i + 1] += deg[i];
    std::vector<int> adj(deg[n]);
    std::vector<double> adj_j(deg[n]);
    {
        std::vector<int> fill(deg.begin(), deg.end() - 1);
        for (const auto& c : model.couplings) {
            adj[fill[c.i]] = c.j;
            adj_j[fill[c.i]++] = c.value / scale;
            adj[fill[c.j]] = c.i;
            adj_j[fill[c.j]++] = c.value / scale;
        }
    }

    // Per-sweep problem weight (beta/P) B(s) and replica weight (beta/P) J_perp(s).
    std::vector<double> wb(S), wk(S);
    for (int k = 0; k < S; ++k) {
        const double s = std::clamp(req.grid.interpolate((k + 0.5) * T / S), 0.0, 1.0);
        wb[k] = req.beta / P * s;
        wk[k] = req.beta / P * replica_coupling(req.gamma0 * (1.0 - s), req.beta, P);
    }

    ReadSet rs;
    rs.bitstrings.reserve(req.reads);
    rs.energies.reserve(req.reads);
    const std::size_t total = static_cast<std::size_t>(P) * n;
    std::vector<std::int8_t> spin(total);
    std::vector<double> field(total);
    for (int r = 0; r < req.reads; ++r) {
        Rng rng(derive_seed(req.seed, static_cast<std::uint64_t>(r)));
        for (auto& v : spin) v = (rng.next() >> 63) ? 1 : -1;
        for (int k = 0; k < P; ++k) {
            const std::int8_t* sk = spin.data() + static_cast<std::size_t>(k) * n;
            double* fk = field.data() + static_cast<std::size_t>(k) * n;
            for (int i = 0; i < n; ++i) {
                double f = h[i];
                for (int e = deg[i]; e < deg[i + 1]; ++e) f += adj_j[e] * sk[adj[e]];
                fk[i] = f;
            }
        }
        for (int sw = 0; sw < S; ++sw) {
            const double b = wb[sw];
            const double kp = wk[sw];
            const bool hard = std::isinf(kp);
            for (int k = 0; k < P; ++k) {
                std::int8_t* sk = spin.data() + static_cast<std::size_t>(k) * n;
                const std::int8_t* su = spin.data() + static_cast<std::size_t>((k + P - 1) % P) * n;
                const std::int8_t* sd = spin.data() + static_cast<std::size_t>((k + 1) % P) * n;
                double* fk = field.data() + static_cast<std::size_t>(k) * n;
                for (int i = 0; i < n; ++i) {
                    const int sigma = sk[i];
                    const int m = sigma * (su[i] + sd[i]);
                    double x = -2.0 * sigma * b * fk[i];
                    if (m != 0) {
                        if (hard)
                            x = m > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
                        else
                            x += 2.0 * kp * m;
                    }
                    bool flip = x <= 0.0;
                    // exp(-40) is below the smallest nonzero uniform draw.
                    if (!flip && x < 40.0) flip = rng.uniform() < std::exp(-x);
                    if (!flip) continue;
                    sk[i] = static_cast<std::int8_t>(-sigma);
                    const double d = -2.0 * sigma;
                    for (int e = deg[i]; e < deg[i + 1]; ++e) fk[adj[e]] += d * adj_j[e];
                }
            }
        }
        int best_k = 0;
        double best_e = std::numeric_limits<double>::infinity();
        for (int k = 0; k < P; ++k) {
            const std::span<const std::int8_t> sk(spin.data() + static_cast<std::size_t>(k) * n, n);
            const double e = ising_energy(model, sk);
            if (e < best_e) {
                best_e = e;
                best_k = k;
            }
        }
        const std::span<const std::int8_t> chosen(spin.data() + static_cast<std::size_t>(best_k) * n, n);
        rs.bitstrings.push_back(spins_to_bits(chosen));
        rs.energies.push_back(best_e);
    }
    return rs;
}

int ChainLayout::physical_size() const {
    int total = 0;
    for (int l : lengths) total += l;
    return total;
}

std::vector<int> ChainLayout::offsets() const {
    std::vector<int> off(lengths.size());
    int acc = 0;
    for (std::size_t v = 0; v < lengths.size(); ++v) {
        off[v] = acc;
        acc += lengths[v];
    }
    return off;
}

IsingModel chain_extend(const IsingModel& m, const ChainLayout& layout) {
    if (static_cast<int>(layout.lengths.size()) != m.n_spins)
        throw InvalidArgument("chain_extend: one chain length per logical spin required");
    if (std::any_of(layout.lengths.begin(), layout.lengths.end(), [](int l) { return l < 1; }))
        throw InvalidArgument("chain_extend: chain lengths must be >= 1");
    if (!(layout.kappa > 0.0)) throw InvalidArgument("chain_extend: kappa must be positive");

    const auto off = layout.offsets();
    IsingModel p;
    p.n_spins = layout.physical_size();
    p.h.assign(p.n_spins, 0.0);
    p.offset = m.offset;
    for (int v = 0; v < m.n_spins; ++v) {
        const int l = layout.lengths[v];
        for (int t = 0; t < l; ++t) p.h[off[v] + t] = m.h[v] / l;
        for (int t = 0; t + 1 < l; ++t) p.couplings.push_back({off[v] + t, off[v] + t + 1, -layout.kappa});
        p.offset += layout.kappa * (l - 1);
    }
    for (const auto& c : m.couplings) p.couplings.push_back({off[c.i], off[c.j], c.value});
    normalize_couplings(p);
    return p;
}

std::vector<int> chain_lengths_for_total(int n_logical, int total) {
    if (n_logical < 1) return {};
    if (total < n_logical) throw InvalidArgument("chain_lengths_for_total: total below one spin per chain");
    const int base = total / n_logical;
    const int extra = total % n_logical;
    std::vector<int> lengths(n_logical, base);
    for (int v = 0; v < extra; ++v) ++lengths[v];
    return lengths;
}

ResolvedRead resolve_chains(std::span<const std::uint8_t> physical_read, const ChainLayout& layout, Rng& tie_break) {
    if (static_cast<int>(physical_read.size()) != layout.physical_size())
        throw InvalidArgument("resolve_chains: read length does not match layout");
    ResolvedRead out;
    out.logical.resize(layout.lengths.size());
    out.broken.resize(layout.lengths.size());
    std::size_t pos = 0;
    for (std::size_t v = 0; v < layout.lengths.size(); ++v) {
        const int l = layout.lengths[v];
        int ones = 0;
        for (int t = 0; t < l; ++t) ones += physical_read[pos + t] ? 1 : 0;
        pos += l;
        out.broken[v] = (ones != 0 && ones != l) ? 1 : 0;
        if (2 * ones > l)
            out.logical[v] = 1;
        else if (2 * ones < l)
            out.logical[v] = 0;
        else
            out.logical[v] = (tie_break.next() >> 63) ? 1 : 0;
    }
    return out;
}

ReadSet resolve_readset(const ReadSet& physical, const ChainLayout& layout, const Qubo& q, std::uint64_t seed) {
    Rng tie(derive_seed(seed, 0x7e));
    ReadSet out;
    out.bitstrings.reserve(physical.size());
    out.energies.reserve(physical.size());
    out.chain_breaks.reserve(physical.size());
    for (const auto& bits : physical.bitstrings) {
        ResolvedRead r = resolve_chains(bits, layout, tie);
        out.energies.push_back(qubo_energy(q, r.logical));
        out.bitstrings.push_back(std::move(r.logical));
        out.chain_breaks.push_back(std::move(r.broken));
    }
    return out;
}

void rescore(ReadSet& rs, const Qubo& q) {
    rs.energies.resize(rs.bitstrings.size());
    for (std::size_t r = 0; r < rs.bitstrings.size(); ++r) rs.energies[r] = qubo_energy(q, rs.bitstrings[r]);
}

CbfValue cbf(const ReadSet& rs) {
    if (rs.chain_breaks.empty()) {
        warn("cbf: read set has no chain layer");
        return {0.0, false};
    }
    double acc = 0.0;
    for (const auto& flags : rs.chain_breaks) {
        if (flags.empty()) continue;
        int broken = 0;
        for (auto f : flags) broken += f ? 1 : 0;
        acc += static_cast<double>(broken) / static_cast<double>(flags.size());
    }
    return {acc / static_cast<double>(rs.chain_breaks.size()), true};
}

std::string bits_to_string(std::span<const std::uint8_t> bits) {
    std::string s(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) s[i] = '1';
    return s;
}

std::string readset_to_json(const ReadSet& rs, int n_cities) {
    nlohmann::ordered_json j;
    j["energies"] = rs.energies;
    j["cbf"] = rs.chain_breaks.empty() ? 0.0 : cbf(rs).fraction;
    std::size_t feasible = 0;
    for (const auto& b : rs.bitstrings)
        if (decode_tour(b, n_cities).feasible) ++feasible;
    j["p_feasible"] = rs.size() ? static_cast<double>(feasible) / static_cast<double>(rs.size()) : 0.0;
    if (!rs.energies.empty()) {
        const auto it = std::min_element(rs.energies.begin(), rs.energies.end());
        j["best_bitstring"] = bits_to_string(rs.bitstrings[static_cast<std::size_t>(it - rs.energies.begin())]);
    } else {
        j["best_bitstring"] = nullptr;
    }
    return j.dump();
}

}  // namespace qasched
