#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "qshard/gates.hpp"

namespace qshard::dense {

/// Small dense complex matrix, row-major. Only intended for reference
/// computations up to a few thousand rows; the sharded kernels never build
/// matrices like these.
struct Matrix {
    std::size_t n = 0;
    std::vector<cxd> a;

    Matrix() = default;
    explicit Matrix(std::size_t n) : n(n), a(n * n, cxd(0.0, 0.0)) {}

    cxd& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
    const cxd& at(std::size_t i, std::size_t j) const { return a[i * n + j]; }

    static Matrix identity(std::size_t n) {
        Matrix m(n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }
};

inline Matrix kron(const Matrix& x, const Matrix& y) {
    Matrix out(x.n * y.n);
    for (std::size_t i = 0; i < x.n; ++i)
        for (std::size_t j = 0; j < x.n; ++j)
            for (std::size_t k = 0; k < y.n; ++k)
                for (std::size_t l = 0; l < y.n; ++l)
                    out.at(i * y.n + k, j * y.n + l) = x.at(i, j) * y.at(k, l);
    return out;
}

inline std::vector<cxd> matvec(const Matrix& m, const std::vector<cxd>& v) {
    std::vector<cxd> out(m.n, cxd(0.0, 0.0));
    for (std::size_t i = 0; i < m.n; ++i) {
        cxd acc(0.0, 0.0);
        for (std::size_t j = 0; j < m.n; ++j) acc += m.at(i, j) * v[j];
        out[i] = acc;
    }
    return out;
}

inline Matrix from_gate2(const Gate2& g) {
    Matrix m(2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m.at(i, j) = g.m[i][j];
    return m;
}

inline Matrix from_gate4(const Gate4& g) {
    Matrix m(4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m.at(i, j) = g.m[i][j];
    return m;
}

/// Full 2^nq x 2^nq operator I x ... x Omega x ... x I with Omega at qubit
/// position i_s (qubit 1 leftmost in the product).
inline Matrix one_qubit_operator(int nq, int i_s, const Gate2& g) {
    Matrix m = (i_s == 1) ? from_gate2(g) : Matrix::identity(2);
    for (int q = 2; q <= nq; ++q) m = kron(m, q == i_s ? from_gate2(g) : Matrix::identity(2));
    return m;
}

/// Full matrix of a two-qubit operator on qubits i_s1 != i_s2: the entry
/// <n'|V|n> is V[q'_s1 q'_s2][q_s1 q_s2] when n and n' agree on all other
/// qubits, else zero.
inline Matrix two_qubit_operator(int nq, int i_s1, int i_s2, const Gate4& g) {
    const std::size_t dim = std::size_t{1} << nq;
    const std::uint64_t m1 = std::uint64_t{1} << (nq - i_s1);
    const std::uint64_t m2 = std::uint64_t{1} << (nq - i_s2);
    Matrix out(dim);
    for (std::uint64_t col = 0; col < dim; ++col) {
        const int qc = static_cast<int>(((col & m1) ? 2 : 0) | ((col & m2) ? 1 : 0));
        const std::uint64_t base = col & ~(m1 | m2);
        for (int qr = 0; qr < 4; ++qr) {
            const std::uint64_t row = base | ((qr & 2) ? m1 : 0) | ((qr & 1) ? m2 : 0);
            out.at(row, col) = g.m[qr][qc];
        }
    }
    return out;
}

inline Matrix hadamard_all(int nq) {
    Matrix m = from_gate2(hadamard());
    for (int q = 2; q <= nq; ++q) m = kron(m, from_gate2(hadamard()));
    return m;
}

/// DFT matrix of size N = 2^n1: entries exp(2 pi i n n'/N)/sqrt(N).
inline Matrix dft(int n1) {
    const std::size_t N = std::size_t{1} << n1;
    Matrix m(N);
    const double scale = 1.0 / std::sqrt(static_cast<double>(N));
    for (std::size_t r = 0; r < N; ++r)
        for (std::size_t c = 0; c < N; ++c) {
            const std::uint64_t prod = (static_cast<std::uint64_t>(r) * c) % N;
            m.at(r, c) = scale * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(prod) /
                                                     static_cast<double>(N));
        }
    return m;
}

inline Matrix dagger(const Matrix& m) {
    Matrix out(m.n);
    for (std::size_t i = 0; i < m.n; ++i)
        for (std::size_t j = 0; j < m.n; ++j) out.at(i, j) = std::conj(m.at(j, i));
    return out;
}

/// Apply a register-one operator (dimension 2^n1) to a full state of
/// n1 + n2 qubits, register two untouched.
inline std::vector<cxd> apply_register1(const Matrix& m, const std::vector<cxd>& state, int n2) {
    const std::size_t reg2 = std::size_t{1} << n2;
    const std::size_t n1dim = m.n;
    std::vector<cxd> out(state.size(), cxd(0.0, 0.0));
    for (std::size_t r = 0; r < n1dim; ++r)
        for (std::size_t f = 0; f < reg2; ++f) {
            cxd acc(0.0, 0.0);
            for (std::size_t c = 0; c < n1dim; ++c) acc += m.at(r, c) * state[c * reg2 + f];
            out[r * reg2 + f] = acc;
        }
    return out;
}

/// Exact Grover success probability after t iterations on nq qubits:
/// sin^2((2t+1) asin(2^(-nq/2))).
inline double grover_closed_form(int nq, int t) {
    const double theta = std::asin(1.0 / std::sqrt(static_cast<double>(std::uint64_t{1} << nq)));
    const double arg = (2.0 * t + 1.0) * theta;
    const double s = std::sin(arg);
    return s * s;
}

/// Single-vector Grover reference: oracle and inversion as explicit sign
/// flips, diffusion via the dense all-qubit Hadamard matrix.
inline std::vector<double> grover_reference_trace(int nq, std::uint64_t marked, int iterations) {
    const std::size_t dim = std::size_t{1} << nq;
    const Matrix h = hadamard_all(nq);
    std::vector<cxd> state(dim, cxd(0.0, 0.0));
    state[0] = 1.0;
    state = matvec(h, state);
    std::vector<double> probs;
    probs.reserve(iterations + 1);
    probs.push_back(std::norm(state[marked]));
    for (int t = 0; t < iterations; ++t) {
        state[marked] = -state[marked];
        state = matvec(h, state);
        for (std::size_t n = 1; n < dim; ++n) state[n] = -state[n];
        state = matvec(h, state);
        probs.push_back(std::norm(state[marked]));
    }
    return probs;
}

} // namespace qshard::dense
