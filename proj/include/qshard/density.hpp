#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "qshard/statevector.hpp"

namespace qshard {

/// Storage ceiling for an assembled density matrix: 2^14 rows is already a
/// 4 GiB root-resident array. Larger requests are refused outright instead of
/// thrashing the machine.
inline constexpr int kMaxDensityQubits = 14;

enum class DensityMode {
    Root,        // full matrix accumulated on rank 0
    Partitioned, // each rank accumulates its contiguous row block, gathered for the solve
};

/// Ensemble density matrix rho = sum_a P_a |psi_a><psi_a| over the group
/// states. Row-major; a Root-mode (or gathered) instance holds all dim rows,
/// a Partitioned instance only rows [row_begin, row_begin + row_count).
struct DensityMatrix {
    int nq = 0;
    std::uint64_t dim = 0;
    std::uint64_t row_begin = 0;
    std::uint64_t row_count = 0;
    std::vector<cxd> a; // row_count x dim

    cxd& at(std::uint64_t row, std::uint64_t col) { return a[(row - row_begin) * dim + col]; }
    const cxd& at(std::uint64_t row, std::uint64_t col) const {
        return a[(row - row_begin) * dim + col];
    }
    bool full() const { return row_begin == 0 && row_count == dim; }
};

namespace detail {

inline void check_density_size(int nq) {
    if (nq > kMaxDensityQubits)
        throw ConfigError("density matrix for " + std::to_string(nq) +
                          " qubits exceeds the " + std::to_string(kMaxDensityQubits) +
                          "-qubit storage cap; rerun with ientropy 0");
}

inline void accumulate_rows(DensityMatrix& rho, const std::vector<cxd>& psi, double weight) {
    for (std::uint64_t r = rho.row_begin; r < rho.row_begin + rho.row_count; ++r) {
        const cxd wr = weight * psi[r];
        for (std::uint64_t c = 0; c < rho.dim; ++c) rho.at(r, c) += wr * std::conj(psi[c]);
    }
}

} // namespace detail

/// Pure local assembly from full state vectors (reference/root kernel).
inline DensityMatrix assemble_density_local(const std::vector<std::vector<cxd>>& states,
                                            const std::vector<double>& weights, int nq) {
    detail::check_density_size(nq);
    if (states.size() != weights.size()) throw InputError("assemble_density: state/weight count mismatch");
    DensityMatrix rho;
    rho.nq = nq;
    rho.dim = std::uint64_t{1} << nq;
    rho.row_begin = 0;
    rho.row_count = rho.dim;
    rho.a.assign(rho.dim * rho.dim, cxd(0.0, 0.0));
    for (std::size_t g = 0; g < states.size(); ++g) {
        if (states[g].size() != rho.dim) throw InputError("assemble_density: state dimension mismatch");
        detail::accumulate_rows(rho, states[g], weights[g]);
    }
    return rho;
}

/// Collective assembly over the global communicator: every rank contributes
/// its slice of its group's final state. Root mode returns the full matrix at
/// global rank 0 (empty elsewhere); Partitioned mode returns each rank's row
/// block. Group states are weighted in group order on every path, so the two
/// modes agree exactly.
inline DensityMatrix assemble_density(const Shard& group_state, const std::vector<double>& weights,
                                      int group_count, const Topology& global, Transport& tr,
                                      DensityMode mode) {
    detail::check_density_size(global.nq);
    if (static_cast<int>(weights.size()) != group_count)
        throw InputError("assemble_density: weight count != group count");
    const std::uint64_t dim = global.dim();
    if (group_state.amps.size() * static_cast<std::uint64_t>(tr.size() / group_count) != dim)
        throw InputError("assemble_density: slice does not tile the state dimension");
    const int group_size = tr.size() / group_count;

    // Reconstruct each group's full state at the root from its members'
    // slices; Partitioned mode shares them with everyone.
    std::vector<std::vector<cxd>> states;
    for (int g = 0; g < group_count; ++g) {
        std::vector<cxd> psi;
        const bool receiver = tr.rank() == 0 || mode == DensityMode::Partitioned;
        if (receiver) psi.resize(dim);
        const int first = g * group_size;
        if (tr.rank() == 0) {
            for (int member = 0; member < group_size; ++member) {
                auto dst = std::span<cxd>(psi).subspan(
                    static_cast<std::size_t>(member) * group_state.amps.size(), group_state.amps.size());
                if (first + member == 0)
                    std::copy(group_state.amps.begin(), group_state.amps.end(), dst.begin());
                else
                    tr.recv(first + member, tag::density, dst);
            }
        } else if (tr.rank() >= first && tr.rank() < first + group_size) {
            tr.send(0, tag::density, group_state.amps);
        }
        if (mode == DensityMode::Partitioned) tr.broadcast(0, psi);
        states.push_back(std::move(psi));
    }

    DensityMatrix rho;
    rho.nq = global.nq;
    rho.dim = dim;
    if (mode == DensityMode::Root) {
        rho.row_begin = 0;
        rho.row_count = (tr.rank() == 0) ? dim : 0;
    } else {
        rho.row_begin = global.base();
        rho.row_count = global.n_x;
    }
    rho.a.assign(rho.row_count * dim, cxd(0.0, 0.0));
    for (int g = 0; g < group_count; ++g)
        if (!states[g].empty() && rho.row_count > 0)
            detail::accumulate_rows(rho, states[g], weights[g]);
    return rho;
}

/// Collect a partitioned matrix's row blocks into a full matrix at rank 0.
inline DensityMatrix gather_density(const DensityMatrix& rho, Transport& tr) {
    if (rho.full()) return rho;
    DensityMatrix out;
    out.nq = rho.nq;
    out.dim = rho.dim;
    out.row_begin = 0;
    out.row_count = (tr.rank() == 0) ? rho.dim : 0;
    out.a.resize(out.row_count * rho.dim);
    tr.gather(0, rho.a, out.a);
    return out;
}

inline double density_trace(const DensityMatrix& rho) {
    double tr = 0.0;
    for (std::uint64_t r = rho.row_begin; r < rho.row_begin + rho.row_count; ++r)
        tr += rho.at(r, r).real();
    return tr;
}

/// trace(rho^2) = sum |rho_ij|^2 for Hermitian rho; 1 for a pure state.
inline double density_purity(const DensityMatrix& rho) {
    double sum = 0.0;
    for (const cxd& v : rho.a) sum += std::norm(v);
    return sum;
}

/// All eigenvalues of a full Hermitian matrix, descending, via cyclic Jacobi
/// rotations. Converged when the off-diagonal Frobenius norm drops below
/// 1e-12 * dim. Inputs more than 1e-9 away from Hermitian are rejected.
inline std::vector<double> hermitian_eigenvalues(const DensityMatrix& rho) {
    if (!rho.full()) throw InputError("hermitian_eigenvalues: need the full matrix (gather first)");
    const std::uint64_t n = rho.dim;
    std::vector<cxd> a = rho.a;
    const auto at = [&](std::uint64_t i, std::uint64_t j) -> cxd& { return a[i * n + j]; };

    for (std::uint64_t i = 0; i < n; ++i)
        for (std::uint64_t j = i; j < n; ++j)
            if (std::abs(at(i, j) - std::conj(at(j, i))) > 1e-9)
                throw InputError("hermitian_eigenvalues: matrix is not Hermitian");

    const double threshold = 1e-12 * static_cast<double>(n);
    const auto off_norm = [&] {
        double sum = 0.0;
        for (std::uint64_t i = 0; i < n; ++i)
            for (std::uint64_t j = 0; j < n; ++j)
                if (i != j) sum += std::norm(at(i, j));
        return std::sqrt(sum);
    };

    for (int sweep = 0; sweep < 100 && off_norm() >= threshold; ++sweep) {
        for (std::uint64_t p = 0; p + 1 < n; ++p)
            for (std::uint64_t q = p + 1; q < n; ++q) {
                const cxd apq = at(p, q);
                const double mag = std::abs(apq);
                if (mag < 1e-300) continue;
                // Unitary 2x2 rotation diagonalizing the (p,q) block:
                // columns (p,q) mix with U = [[c, -s e^{i phi}], [s e^{-i phi}, c]],
                // phi = arg(a_pq).
                const cxd phase = apq / mag;
                const double app = at(p, p).real();
                const double aqq = at(q, q).real();
                const double tau = (app - aqq) / (2.0 * mag);
                const double tan_t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + tan_t * tan_t);
                const double s = tan_t * c;

                for (std::uint64_t i = 0; i < n; ++i) {
                    const cxd aip = at(i, p);
                    const cxd aiq = at(i, q);
                    at(i, p) = c * aip + s * std::conj(phase) * aiq;
                    at(i, q) = -s * phase * aip + c * aiq;
                }
                for (std::uint64_t j = 0; j < n; ++j) {
                    const cxd apj = at(p, j);
                    const cxd aqj = at(q, j);
                    at(p, j) = c * apj + s * phase * aqj;
                    at(q, j) = -s * std::conj(phase) * apj + c * aqj;
                }
            }
    }

    std::vector<double> eig(n);
    for (std::uint64_t i = 0; i < n; ++i) eig[i] = at(i, i).real();
    std::sort(eig.begin(), eig.end(), std::greater<>());
    return eig;
}

/// Von Neumann entropy in bits: S = -sum lambda log2 lambda. Eigenvalues at
/// or below 1e-14 contribute nothing; small negatives from round-off are
/// clamped, anything worse is a genuinely bad spectrum.
inline double entropy_bits(const std::vector<double>& eigenvalues) {
    double sum = 0.0;
    for (double lambda : eigenvalues) {
        if (lambda < -1e-10) throw InputError("entropy: eigenvalue below the round-off clamp");
        sum += lambda;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw InputError("entropy: eigenvalues do not sum to 1");
    double s = 0.0;
    for (double lambda : eigenvalues) {
        if (lambda <= 1e-14) continue;
        s -= lambda * std::log2(lambda);
    }
    return s;
}

} // namespace qshard
