#pragma once

#include <numeric>
#include <optional>
#include <string>

#include "qshard/qft.hpp"

namespace qshard {

// ---------------------------------------------------------------------------
// Classical number theory for the factoring pipeline. Pure and thread-safe.
// ---------------------------------------------------------------------------

inline bool is_prime(std::uint64_t m) {
    if (m < 2) return false;
    for (std::uint64_t d = 2; d * d <= m; ++d)
        if (m % d == 0) return false;
    return true;
}

/// x^e mod m with 128-bit intermediates, so any m < 2^63 is safe.
inline std::uint64_t modpow(std::uint64_t x, std::uint64_t e, std::uint64_t m) {
    if (m == 0) throw InputError("modpow: zero modulus");
    unsigned __int128 result = 1;
    unsigned __int128 base = x % m;
    while (e > 0) {
        if (e & 1) result = result * base % m;
        base = base * base % m;
        e >>= 1;
    }
    return static_cast<std::uint64_t>(result);
}

inline std::uint64_t euler_phi(std::uint64_t m) {
    if (m == 0) throw InputError("euler_phi: undefined at 0");
    std::uint64_t phi = m;
    std::uint64_t rest = m;
    for (std::uint64_t d = 2; d * d <= rest; ++d) {
        if (rest % d == 0) {
            phi -= phi / d;
            while (rest % d == 0) rest /= d;
        }
    }
    if (rest > 1) phi -= phi / rest;
    return phi;
}

/// Uniform draw over the residues in 2..M-1 coprime to M.
inline std::uint64_t pick_xguess(std::uint64_t m, Rng& rng) {
    std::vector<std::uint64_t> coprimes;
    for (std::uint64_t a = 2; a < m; ++a)
        if (std::gcd(a, m) == 1) coprimes.push_back(a);
    if (coprimes.empty()) throw InputError("pick_xguess: no coprime candidates");
    return coprimes[rng.bounded(coprimes.size())];
}

inline int ceil_log2(std::uint64_t x) {
    if (x < 2) return 0;
    return is_power_of_two(x) ? exact_log2(x) : std::bit_width(x);
}

/// Why a candidate M cannot enter the pipeline, or empty if it can.
inline std::string shor_rejection_reason(std::uint64_t m) {
    if (m < 3) return "too small";
    if (is_power_of_two(m)) return "power of 2";
    if (is_prime(m)) return "prime";
    if (m % 2 == 0) return "even";
    return {};
}

struct RegisterSizes {
    int n1;
    int n2;
    std::uint64_t q; // 2^n1
};

/// Register one stores all values up to 2^n1 with M^2 <= 2^n1 < 2M^2;
/// register two stores values up to and including M.
inline RegisterSizes shor_register_sizes(std::uint64_t m) {
    const std::string reason = shor_rejection_reason(m);
    if (!reason.empty()) throw InputError("shor: M rejected (" + reason + ")");
    const int n1 = ceil_log2(m * m);
    const int n2 = ceil_log2(m);
    return {n1, n2, std::uint64_t{1} << n1};
}

struct ShorConfig {
    std::uint64_t m;
    std::uint64_t xguess;
    int n1;
    int n2;
    std::uint64_t q;

    int nq() const { return n1 + n2; }
};

inline ShorConfig shor_configure(std::uint64_t m, std::uint64_t xguess) {
    const RegisterSizes sizes = shor_register_sizes(m);
    if (xguess < 2 || xguess >= m) throw InputError("shor: xguess outside 2..M-1");
    if (std::gcd(xguess, m) != 1) throw InputError("shor: xguess not coprime to M");
    return {m, xguess, sizes.n1, sizes.n2, sizes.q};
}

// ---------------------------------------------------------------------------
// Quantum pipeline pieces.
// ---------------------------------------------------------------------------

/// Load (1/2^(n1/2)) sum_n |n>|f(n)> with f(n) = xguess^n mod M. Each rank
/// writes only the combined indices it owns.
inline Shard load_shor_state(const ShorConfig& cfg, const Topology& t, Transport&) {
    if (cfg.nq() != t.nq) throw InputError("load_shor_state: topology sized for a different register pair");
    Shard s = Shard::zeros(t);
    const GlobalIndex mask2 = (GlobalIndex{1} << cfg.n2) - 1;
    const double amp = 1.0 / std::sqrt(static_cast<double>(cfg.q));
    for (std::uint64_t o = 0; o < t.n_x; ++o) {
        const GlobalIndex g = s.base + o;
        const GlobalIndex n = g >> cfg.n2;
        if ((g & mask2) == modpow(cfg.xguess, n, cfg.m)) s.amps[o] = cxd(amp, 0.0);
    }
    return s;
}

/// p(n) = 1/(2^n1 D) [sin(D pi n r / 2^n1) / sin(pi n r / 2^n1)]^2, with the
/// exact limit D/2^n1 when n r / 2^n1 is an integer.
inline double shor_peak_probability(std::uint64_t n, std::uint64_t r, std::uint64_t d, int n1) {
    if (d < 1) throw InputError("shor_peak_probability: D must be >= 1");
    const std::uint64_t big_n = std::uint64_t{1} << n1;
    const std::uint64_t reduced =
        static_cast<std::uint64_t>(static_cast<unsigned __int128>(n) * r % big_n);
    if (reduced == 0) return static_cast<double>(d) / static_cast<double>(big_n);
    const double y = std::numbers::pi * static_cast<double>(reduced) / static_cast<double>(big_n);
    const double ratio = std::sin(static_cast<double>(d) * y) / std::sin(y);
    return ratio * ratio / (static_cast<double>(big_n) * static_cast<double>(d));
}

/// First continued-fraction convergent of nbar/2^n1 whose denominator is
/// even and below M; the caller still has to verify xguess^r = 1 (mod M).
inline std::optional<std::uint64_t> continued_fraction_period(std::uint64_t nbar, std::uint64_t big_n,
                                                              std::uint64_t m) {
    if (nbar == 0 || nbar >= big_n) return std::nullopt;
    // Euclid on (nbar, big_n) yields the continued-fraction terms of
    // nbar/big_n; the denominators follow k_i = a_i k_{i-1} + k_{i-2} and
    // never decrease, so the scan can stop once they reach M.
    std::uint64_t a = nbar, b = big_n;
    std::uint64_t k_prev = 0, k_prev2 = 1;
    while (b != 0) {
        const std::uint64_t term = a / b;
        const std::uint64_t k = term * k_prev + k_prev2;
        if (k >= m) return std::nullopt;
        if (k % 2 == 0) return k;
        k_prev2 = k_prev;
        k_prev = k;
        const std::uint64_t rem = a % b;
        a = b;
        b = rem;
    }
    return std::nullopt;
}

struct FactorPair {
    std::uint64_t f1;
    std::uint64_t f2;

    bool nontrivial(std::uint64_t m) const {
        return f1 > 1 && f1 < m && f2 > 1 && f2 < m;
    }
};

/// f1 = gcd(xguess^(r/2) + 1, M), f2 = gcd(xguess^(r/2) - 1, M). Fails (and
/// reports nothing) when xguess^(r/2) = +-1 (mod M).
inline std::optional<FactorPair> extract_factors(std::uint64_t xguess, std::uint64_t r, std::uint64_t m) {
    if (r % 2 != 0) throw InputError("extract_factors: period must be even");
    const std::uint64_t half = modpow(xguess, r / 2, m);
    if (half == 1 || half == m - 1) return std::nullopt;
    return FactorPair{std::gcd(half + 1, m), std::gcd(half - 1, m)};
}

// ---------------------------------------------------------------------------
// End-to-end run.
// ---------------------------------------------------------------------------

struct Reg2Outcome {
    std::uint64_t k;
    double probability;
    std::uint64_t n_k; // smallest n with f(n) = k
    std::uint64_t d;   // number of register-one values mapping to k
};

struct ShorPeak {
    std::uint64_t nbar;
    double probability;
    std::optional<std::uint64_t> r_candidate;
    bool verified = false; // xguess^r = 1 (mod M)
    std::optional<FactorPair> factors;
};

struct ShorOutcome {
    std::uint64_t m = 0;
    std::uint64_t xguess = 0;
    int n1 = 0;
    int n2 = 0;
    std::uint64_t q = 0;
    std::vector<Reg2Outcome> outcomes; // register-two values with nonzero probability
    std::uint64_t chosen_k = 0;
    double chosen_k_probability = 0.0;
    std::uint64_t n_k = 0;
    std::uint64_t d = 0;
    std::vector<double> reg1_distribution; // post-QFT register-one probabilities
    std::vector<ShorPeak> peaks;
    std::optional<std::uint64_t> period;
    std::optional<FactorPair> factors;
    std::string verdict;
    Shard final_state; // this rank's slice of the post-pipeline state
};

struct ShorOptions {
    bool sample_k = false;       // draw k instead of taking the first nonzero outcome
    bool qft_before_projection = false;
    bool keep_distribution = true;
};

/// Noise injection points: 0 after register loading, 1 after the projective
/// measurement of register two, 2 after the QFT.
inline constexpr int kShorInjectionPoints = 3;

namespace detail {

/// Register-two bookkeeping from the classical function f: which k values
/// occur, how many register-one values map to each, and the smallest one.
inline std::vector<Reg2Outcome> reg2_structure(const ShorConfig& cfg) {
    std::vector<std::uint64_t> count(cfg.m, 0), first(cfg.m, 0);
    std::uint64_t f = 1 % cfg.m;
    for (std::uint64_t n = 0; n < cfg.q; ++n) {
        if (count[f] == 0) first[f] = n;
        ++count[f];
        f = f * cfg.xguess % cfg.m;
    }
    std::vector<Reg2Outcome> out;
    for (std::uint64_t k = 0; k < cfg.m; ++k)
        if (count[k] > 0) out.push_back({k, 0.0, first[k], count[k]});
    return out;
}

inline std::vector<ShorPeak> find_peaks(const std::vector<double>& dist, const ShorConfig& cfg) {
    const std::size_t big_n = dist.size();
    const double floor = 0.5 / static_cast<double>(big_n);
    std::vector<ShorPeak> peaks;
    for (std::size_t n = 0; n < big_n; ++n) {
        const double left = dist[(n + big_n - 1) % big_n];
        const double right = dist[(n + 1) % big_n];
        if (dist[n] <= floor || dist[n] <= left || dist[n] <= right) continue;
        ShorPeak peak;
        peak.nbar = n;
        peak.probability = dist[n];
        peak.r_candidate = continued_fraction_period(n, big_n, cfg.m);
        if (peak.r_candidate) {
            peak.verified = modpow(cfg.xguess, *peak.r_candidate, cfg.m) == 1;
            if (peak.verified) peak.factors = extract_factors(cfg.xguess, *peak.r_candidate, cfg.m);
        }
        peaks.push_back(peak);
    }
    return peaks;
}

} // namespace detail

/// The factoring pipeline: validate, size the registers, load the joint
/// state, fix a register-two outcome (first nonzero k, or a sampled one),
/// project, Fourier-transform register one, and read the period and factors
/// off the probability peaks. Collective over the communicator; the returned
/// outcome is identical on every rank.
inline ShorOutcome shor_run(const ShorConfig& cfg, const Topology& t, Transport& tr,
                            std::uint64_t seed = 0, const ShorOptions& opt = {},
                            const NoiseHook& noise = {}) {
    ShorOutcome out;
    out.m = cfg.m;
    out.xguess = cfg.xguess;
    out.n1 = cfg.n1;
    out.n2 = cfg.n2;
    out.q = cfg.q;

    Shard state = load_shor_state(cfg, t, tr);
    if (noise) noise(0, state, t, tr);

    std::vector<Reg2Outcome> structure = detail::reg2_structure(cfg);
    const std::vector<double> marginals = register2_marginals(cfg.n1, state, t, tr);
    for (Reg2Outcome& o : structure) o.probability = marginals[o.k];
    out.outcomes = std::move(structure);

    // Choose the measured register-two value.
    if (opt.sample_k) {
        Rng rng(seed, 0x5a11);
        out.chosen_k = sample_register2(cfg.n1, state, t, tr, rng);
    } else {
        out.chosen_k = 0;
        for (std::size_t k = 0; k < marginals.size(); ++k)
            if (marginals[k] >= kZeroProbability) {
                out.chosen_k = static_cast<std::uint64_t>(k);
                break;
            }
    }
    out.chosen_k_probability = marginals[out.chosen_k];
    for (const Reg2Outcome& o : out.outcomes)
        if (o.k == out.chosen_k) {
            out.n_k = o.n_k;
            out.d = o.d;
        }

    const auto project = [&] {
        project_register2(cfg.n1, out.chosen_k, state, t, tr);
        if (noise) noise(1, state, t, tr);
    };
    const auto fourier = [&] {
        qft(cfg.n1, state, t, tr);
        if (noise) noise(2, state, t, tr);
    };
    if (opt.qft_before_projection) {
        fourier();
        project();
    } else {
        project();
        fourier();
    }

    // Register-one distribution of the post-QFT state, built at the root in
    // global index order and broadcast.
    std::vector<double> dist(cfg.q, 0.0);
    {
        const std::vector<cxd> full = gather_state(state, t, tr);
        if (tr.rank() == 0)
            for (GlobalIndex g = 0; g < full.size(); ++g) dist[g >> cfg.n2] += std::norm(full[g]);
        tr.broadcast_doubles(0, dist);
    }

    out.peaks = detail::find_peaks(dist, cfg);
    for (const ShorPeak& peak : out.peaks) {
        if (peak.verified && !out.period) out.period = peak.r_candidate;
        if (peak.factors && peak.factors->nontrivial(cfg.m) && !out.factors) out.factors = peak.factors;
    }
    if (out.factors)
        out.verdict = "factored";
    else if (out.period)
        out.verdict = "period found, factor extraction failed";
    else
        out.verdict = "no usable period";
    if (opt.keep_distribution) out.reg1_distribution = std::move(dist);
    out.final_state = std::move(state);
    return out;
}

} // namespace qshard
