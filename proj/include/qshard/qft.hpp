#pragma once

#include "qshard/gates.hpp"
#include "qshard/rng.hpp"

namespace qshard {

/// Two-register view: register one is qubits 1..n1 (most significant),
/// register two is qubits n1+1..nq.
struct RegisterSpec {
    int n1;
    int n2;

    RegisterSpec(int n1, int n2) : n1(n1), n2(n2) {
        if (n1 < 1 || n2 < 1) throw InputError("RegisterSpec: both registers need at least one qubit");
    }
    int nq() const { return n1 + n2; }
};

/// Quantum Fourier transform of register one (qubits 1..n1): the ladder of
/// Hadamards and controlled phase gates, then pair swaps to restore standard
/// qubit order. Realizes <n|QFT|n'> = exp(2 pi i n n'/2^n1)/2^(n1/2).
inline void qft(int n1, Shard& s, const Topology& t, Transport& tr) {
    if (n1 < 1 || n1 > t.nq) throw InputError("qft: register size out of range");
    const Gate2 h = hadamard();
    for (int ic = 1; ic < n1; ++ic) {
        one_op(ic, h, s, t, tr);
        for (int k = ic + 1; k <= n1; ++k) cphasek(k, ic, k + 1 - ic, s, t, tr);
    }
    one_op(n1, h, s, t, tr);
    for (int i = 1; i <= n1 / 2; ++i) swap_qubits(i, n1 + 1 - i, s, t, tr);
}

/// Adjoint of qft: the same ladder conjugated and unwound in reverse.
inline void inverse_qft(int n1, Shard& s, const Topology& t, Transport& tr) {
    if (n1 < 1 || n1 > t.nq) throw InputError("inverse_qft: register size out of range");
    const Gate2 h = hadamard();
    for (int i = 1; i <= n1 / 2; ++i) swap_qubits(i, n1 + 1 - i, s, t, tr);
    one_op(n1, h, s, t, tr);
    for (int ic = n1 - 1; ic >= 1; --ic) {
        for (int k = n1; k >= ic + 1; --k)
            controlled_phase(k, ic, std::conj(cphasek_phase(k + 1 - ic)), s, t);
        one_op(ic, h, s, t, tr);
    }
}

/// Probability of each register-two value, accumulated from the gathered
/// state in global index order (rank-count independent) and shared with all
/// ranks.
inline std::vector<double> register2_marginals(int n1, const Shard& s, const Topology& t, Transport& tr) {
    if (n1 < 1 || n1 >= t.nq) throw InputError("register2_marginals: need a nonempty second register");
    const int n2 = t.nq - n1;
    const GlobalIndex mask = (GlobalIndex{1} << n2) - 1;
    std::vector<double> marg(std::size_t{1} << n2, 0.0);
    std::vector<cxd> full = gather_state(s, t, tr);
    if (tr.rank() == 0)
        for (GlobalIndex n = 0; n < full.size(); ++n) marg[n & mask] += std::norm(full[n]);
    tr.broadcast_doubles(0, marg);
    return marg;
}

inline constexpr double kZeroProbability = 1e-14; // below this an outcome is impossible, not round-off

/// Project register two onto value k (Born rule): amplitudes with other
/// register-two values are zeroed and the survivors rescaled to unit norm.
/// Returns the pre-projection probability of k. A zero-probability outcome
/// throws and leaves the state untouched.
inline double project_register2(int n1, GlobalIndex k, Shard& s, const Topology& t, Transport& tr) {
    if (n1 < 1 || n1 >= t.nq) throw InputError("project_register2: need a nonempty second register");
    const int n2 = t.nq - n1;
    if (k >= (GlobalIndex{1} << n2)) throw IndexError("project_register2: outcome out of range");
    const std::vector<double> marg = register2_marginals(n1, s, t, tr);
    const double probability = marg[k];
    if (probability < kZeroProbability)
        throw MeasurementError("project_register2: outcome has zero probability");
    const GlobalIndex mask = (GlobalIndex{1} << n2) - 1;
    const double rescale = 1.0 / std::sqrt(probability);
    for (std::uint64_t o = 0; o < t.n_x; ++o) {
        const GlobalIndex n = s.base + o;
        if ((n & mask) == k)
            s.amps[o] *= rescale;
        else
            s.amps[o] = cxd(0.0, 0.0);
    }
    return probability;
}

/// Draw a register-two value from its marginal distribution. The communicator
/// root consumes the random stream and the result is broadcast, so every rank
/// returns the same k.
inline GlobalIndex sample_register2(int n1, const Shard& s, const Topology& t, Transport& tr, Rng& rng) {
    const std::vector<double> marg = register2_marginals(n1, s, t, tr);
    double chosen = 0.0;
    if (tr.rank() == 0) {
        const double u = rng.unit();
        double cum = 0.0;
        GlobalIndex k = 0;
        bool found = false;
        for (std::size_t i = 0; i < marg.size() && !found; ++i) {
            cum += marg[i];
            if (u < cum) {
                k = static_cast<GlobalIndex>(i);
                found = true;
            } else if (marg[i] > 0.0) {
                k = static_cast<GlobalIndex>(i); // round-off fallback: last live outcome
            }
        }
        chosen = static_cast<double>(k);
    }
    return static_cast<GlobalIndex>(tr.broadcast_double(0, chosen));
}

} // namespace qshard
