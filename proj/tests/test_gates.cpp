#include <catch2/catch_amalgamated.hpp>

#include "qshard/grover.hpp"
#include "support.hpp"

using namespace qshard;
using testsupport::max_abs_diff;
using testsupport::run_sharded;

namespace {

std::vector<cxd> basis(int nq, GlobalIndex n) {
    std::vector<cxd> v(std::size_t{1} << nq, cxd(0.0, 0.0));
    v[n] = 1.0;
    return v;
}

double norm_of(const std::vector<cxd>& v) {
    double s = 0.0;
    for (const cxd& c : v) s += std::norm(c);
    return s;
}

} // namespace

TEST_CASE("unitary constructors reject non-unitary matrices") {
    CHECK_NOTHROW(Gate2::unitary(hadamard().m));
    CHECK_NOTHROW(Gate4::unitary(cnot_gate().m));
    auto bad2 = hadamard().m;
    bad2[0][0] += 1e-6;
    CHECK_THROWS_AS(Gate2::unitary(bad2), InputError);
    auto bad4 = swap_gate().m;
    bad4[2][1] = 0.5;
    CHECK_THROWS_AS(Gate4::unitary(bad4), InputError);
}

TEST_CASE("hadamard on one qubit makes the even superposition") {
    const auto out = run_sharded(1, 0, basis(1, 0), [](const Topology& t, Transport& tr, Shard& s) {
        one_op(1, hadamard(), s, t, tr);
    });
    const double h = 1.0 / std::numbers::sqrt2;
    CHECK(std::abs(out[0] - cxd(h, 0)) < 1e-15);
    CHECK(std::abs(out[1] - cxd(h, 0)) < 1e-15);
}

TEST_CASE("NOT on qubit 1 of |00> moves the amplitude to index 2") {
    const auto out = run_sharded(2, 1, basis(2, 0), [](const Topology& t, Transport& tr, Shard& s) {
        one_op(1, not_gate(), s, t, tr);
    });
    CHECK(max_abs_diff(out, basis(2, 2)) < 1e-15);
}

TEST_CASE("identity gate leaves any state unchanged") {
    Rng rng(3, 0);
    const auto state = testsupport::random_state(4, rng);
    for (int i_s = 1; i_s <= 4; ++i_s) {
        const auto out = run_sharded(4, 2, state, [&](const Topology& t, Transport& tr, Shard& s) {
            one_op(i_s, identity2(), s, t, tr);
        });
        CHECK(max_abs_diff(out, state) < 1e-15);
    }
    for (auto [i_s1, i_s2] : {std::pair{1, 2}, std::pair{2, 4}, std::pair{3, 1}}) {
        const auto out = run_sharded(4, 2, state, [&](const Topology& t, Transport& tr, Shard& s) {
            two_op(i_s1, i_s2, identity4(), s, t, tr);
        });
        CHECK(max_abs_diff(out, state) < 1e-15);
    }
}

TEST_CASE("one_op matches the dense Kronecker oracle for random unitaries") {
    Rng rng(17, 0);
    const int nq = 5;
    for (int p : {0, 1, 2}) {
        for (int i_s = 1; i_s <= nq; ++i_s) {
            const auto state = testsupport::random_state(nq, rng);
            const Gate2 g = testsupport::random_gate2(rng);
            const auto expected = dense::matvec(dense::one_qubit_operator(nq, i_s, g), state);
            const auto got = run_sharded(nq, p, state, [&](const Topology& t, Transport& tr, Shard& s) {
                one_op(i_s, g, s, t, tr);
            });
            REQUIRE(max_abs_diff(got, expected) < 1e-12);
        }
    }
}

TEST_CASE("two_op matches the dense oracle for random unitaries on all pairs") {
    Rng rng(23, 0);
    const int nq = 5;
    for (int p : {0, 1, 2}) {
        for (int i_s1 = 1; i_s1 <= nq; ++i_s1)
            for (int i_s2 = 1; i_s2 <= nq; ++i_s2) {
                if (i_s1 == i_s2) continue;
                const auto state = testsupport::random_state(nq, rng);
                const Gate4 g = testsupport::random_gate4(rng);
                const auto expected =
                    dense::matvec(dense::two_qubit_operator(nq, i_s1, i_s2, g), state);
                const auto got =
                    run_sharded(nq, p, state, [&](const Topology& t, Transport& tr, Shard& s) {
                        two_op(i_s1, i_s2, g, s, t, tr);
                    });
                REQUIRE(max_abs_diff(got, expected) < 1e-12);
            }
    }
}

TEST_CASE("dense two-qubit oracle is consistent with chained one-qubit oracles") {
    // V = A (x) B acting on (i_s1, i_s2) must equal applying A then B.
    Rng rng(29, 0);
    const int nq = 4;
    const Gate2 a = testsupport::random_gate2(rng);
    const Gate2 b = testsupport::random_gate2(rng);
    Gate4 ab;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) ab.m[2 * i + k][2 * j + l] = a.m[i][j] * b.m[k][l];
    const auto state = testsupport::random_state(nq, rng);
    const auto via2 = dense::matvec(dense::two_qubit_operator(nq, 2, 4, ab), state);
    auto via1 = dense::matvec(dense::one_qubit_operator(nq, 2, a), state);
    via1 = dense::matvec(dense::one_qubit_operator(nq, 4, b), via1);
    CHECK(max_abs_diff(via2, via1) < 1e-13);
}

TEST_CASE("two_op accepts struck qubits in either order") {
    Rng rng(31, 0);
    const int nq = 4;
    const auto state = testsupport::random_state(nq, rng);
    const Gate4 g = testsupport::random_gate4(rng);
    const auto forward = run_sharded(nq, 1, state, [&](const Topology& t, Transport& tr, Shard& s) {
        two_op(1, 3, g, s, t, tr);
    });
    // Swapping the argument order relabels the struck pair, so the matrix
    // must be conjugated by the index swap to describe the same operator.
    Gate4 swapped;
    static constexpr int perm[4] = {0, 2, 1, 3};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) swapped.m[perm[i]][perm[j]] = g.m[i][j];
    const auto reversed = run_sharded(nq, 1, state, [&](const Topology& t, Transport& tr, Shard& s) {
        two_op(3, 1, swapped, s, t, tr);
    });
    CHECK(max_abs_diff(forward, reversed) < 1e-14);
}

TEST_CASE("cnot implements the controlled flip") {
    const auto flipped = run_sharded(2, 1, basis(2, 2), [](const Topology& t, Transport& tr, Shard& s) {
        cnot(1, 2, s, t, tr);
    });
    CHECK(max_abs_diff(flipped, basis(2, 3)) < 1e-15);

    const auto idle = run_sharded(2, 1, basis(2, 0), [](const Topology& t, Transport& tr, Shard& s) {
        cnot(1, 2, s, t, tr);
    });
    CHECK(max_abs_diff(idle, basis(2, 0)) < 1e-15);

    Rng rng(5, 0);
    const auto state = testsupport::random_state(3, rng);
    const auto twice = run_sharded(3, 1, state, [](const Topology& t, Transport& tr, Shard& s) {
        cnot(2, 3, s, t, tr);
        cnot(2, 3, s, t, tr);
    });
    CHECK(max_abs_diff(twice, state) < 1e-14);
}

TEST_CASE("cphase flips the sign of |11> only") {
    const auto on11 = run_sharded(2, 1, basis(2, 3), [](const Topology& t, Transport& tr, Shard& s) {
        cphase(1, 2, s, t, tr);
    });
    CHECK(std::abs(on11[3] + 1.0) < 1e-15);

    const auto on01 = run_sharded(2, 1, basis(2, 1), [](const Topology& t, Transport& tr, Shard& s) {
        cphase(1, 2, s, t, tr);
    });
    CHECK(max_abs_diff(on01, basis(2, 1)) < 1e-15);

    Rng rng(7, 0);
    const auto state = testsupport::random_state(3, rng);
    const auto twice = run_sharded(3, 0, state, [](const Topology& t, Transport& tr, Shard& s) {
        cphase(1, 3, s, t, tr);
        cphase(1, 3, s, t, tr);
    });
    CHECK(max_abs_diff(twice, state) < 1e-13);
}

TEST_CASE("cphasek applies the 2 pi / 2^k phase") {
    SECTION("k=1 equals cphase") {
        Rng rng(9, 0);
        const auto state = testsupport::random_state(3, rng);
        const auto via_k = run_sharded(3, 1, state, [](const Topology& t, Transport& tr, Shard& s) {
            cphasek(1, 2, 1, s, t, tr);
        });
        const auto via_cphase = run_sharded(3, 1, state, [](const Topology& t, Transport& tr, Shard& s) {
            cphase(1, 2, s, t, tr);
        });
        CHECK(max_abs_diff(via_k, via_cphase) == 0.0);
    }
    SECTION("k=2 multiplies |11> by i") {
        const auto out = run_sharded(2, 0, basis(2, 3), [](const Topology& t, Transport& tr, Shard& s) {
            cphasek(1, 2, 2, s, t, tr);
        });
        CHECK(std::abs(out[3] - cxd(0.0, 1.0)) < 1e-15);
    }
    SECTION("k=3 matches the dense diagonal oracle on a random state") {
        Rng rng(13, 0);
        const auto state = testsupport::random_state(4, rng);
        const auto expected = dense::matvec(dense::two_qubit_operator(4, 2, 3, cphasek_gate(3)), state);
        for (int p : {0, 1, 2}) {
            const auto got = run_sharded(4, p, state, [](const Topology& t, Transport& tr, Shard& s) {
                cphasek(2, 3, 3, s, t, tr);
            });
            CHECK(max_abs_diff(got, expected) < 1e-12);
        }
    }
    SECTION("k < 1 is rejected") {
        CHECK_THROWS_AS(cphasek_phase(0), InputError);
    }
}

TEST_CASE("cphasek and the grover oracle send no messages") {
    InProcessHub hub(4);
    hub.run(ExecMode::SingleThread, [&](Transport& tr) {
        const auto t = Topology::flat(4, 4, tr.rank());
        Shard s = init_basis(4, 0, t);
        hall(s, t, tr); // messages allowed here
        const auto before = hub.total_messages();
        cphasek(1, 2, 3, s, t, tr);
        grover_oracle(9, s, t);
        if (tr.rank() == 0) CHECK(hub.total_messages() == before);
    });
}

TEST_CASE("swap exchanges basis labels") {
    const auto out = run_sharded(2, 1, basis(2, 2), [](const Topology& t, Transport& tr, Shard& s) {
        swap_qubits(1, 2, s, t, tr);
    });
    CHECK(max_abs_diff(out, basis(2, 1)) < 1e-15);

    Rng rng(15, 0);
    const auto state = testsupport::random_state(4, rng);
    const auto twice = run_sharded(4, 2, state, [](const Topology& t, Transport& tr, Shard& s) {
        swap_qubits(2, 4, s, t, tr);
        swap_qubits(2, 4, s, t, tr);
    });
    CHECK(max_abs_diff(twice, state) < 1e-14);

    // Symmetric state is invariant.
    const double h = 1.0 / std::numbers::sqrt2;
    const std::vector<cxd> bell{cxd(0, 0), cxd(h, 0), cxd(h, 0), cxd(0, 0)};
    const auto sym = run_sharded(2, 1, bell, [](const Topology& t, Transport& tr, Shard& s) {
        swap_qubits(1, 2, s, t, tr);
    });
    CHECK(max_abs_diff(sym, bell) < 1e-15);

    CHECK_THROWS_AS(run_sharded(2, 0, bell,
                                [](const Topology& t, Transport& tr, Shard& s) {
                                    swap_qubits(1, 1, s, t, tr);
                                }),
                    InputError);
}

TEST_CASE("hall builds the uniform superposition and squares to identity") {
    const auto uniform = run_sharded(2, 1, basis(2, 0), [](const Topology& t, Transport& tr, Shard& s) {
        hall(s, t, tr);
    });
    for (const cxd& c : uniform) CHECK(std::abs(c - cxd(0.5, 0.0)) < 1e-15);

    Rng rng(19, 0);
    const auto state = testsupport::random_state(5, rng);
    const auto twice = run_sharded(5, 2, state, [](const Topology& t, Transport& tr, Shard& s) {
        hall(s, t, tr);
        hall(s, t, tr);
    });
    CHECK(max_abs_diff(twice, state) < 1e-12);
}

TEST_CASE("hall matches the dense Hadamard tensor oracle") {
    Rng rng(21, 0);
    const int nq = 5;
    const auto state = testsupport::random_state(nq, rng);
    const auto expected = dense::matvec(dense::hadamard_all(nq), state);
    for (int p : {0, 1, 2}) {
        const auto got = run_sharded(nq, p, state, [](const Topology& t, Transport& tr, Shard& s) {
            hall(s, t, tr);
        });
        CHECK(max_abs_diff(got, expected) < 1e-12);
    }
}

TEST_CASE("sh sign counts shared set bits") {
    for (GlobalIndex np = 0; np < 4; ++np) CHECK(sh_sign(2, 0, np) == 1);
    CHECK(sh_sign(2, 3, 3) == 1);  // two shared bits
    CHECK(sh_sign(2, 3, 1) == -1); // one shared bit

    // Brute-force cross-check against the dense Hadamard tensor entries.
    const int nq = 3;
    const auto h = dense::hadamard_all(nq);
    const double scale = std::sqrt(static_cast<double>(std::size_t{1} << nq));
    for (GlobalIndex n = 0; n < 8; ++n)
        for (GlobalIndex np = 0; np < 8; ++np)
            CHECK(std::abs(h.at(n, np).real() * scale - sh_sign(nq, n, np)) < 1e-12);
}

TEST_CASE("hall2 agrees with hall and is an involution") {
    Rng rng(25, 0);
    const int nq = 6;
    const auto state = testsupport::random_state(nq, rng);
    for (int p : {0, 1, 2}) {
        const auto via_hall = run_sharded(nq, p, state, [](const Topology& t, Transport& tr, Shard& s) {
            hall(s, t, tr);
        });
        const auto via_hall2 = run_sharded(nq, p, state, [](const Topology& t, Transport& tr, Shard& s) {
            hall2(s, t, tr);
        });
        CHECK(max_abs_diff(via_hall, via_hall2) < 1e-12);
    }
    const auto twice = run_sharded(nq, 1, state, [](const Topology& t, Transport& tr, Shard& s) {
        hall2(s, t, tr);
        hall2(s, t, tr);
    });
    CHECK(max_abs_diff(twice, state) < 1e-12);

    const auto uniform = run_sharded(2, 1, basis(2, 0), [](const Topology& t, Transport& tr, Shard& s) {
        hall2(s, t, tr);
    });
    for (const cxd& c : uniform) CHECK(std::abs(c - cxd(0.5, 0.0)) < 1e-15);
}

TEST_CASE("unitary gates preserve the norm") {
    Rng rng(27, 0);
    const int nq = 5;
    const auto state = testsupport::random_state(nq, rng);
    const Gate2 g2 = testsupport::random_gate2(rng);
    const Gate4 g4 = testsupport::random_gate4(rng);
    const auto out = run_sharded(nq, 2, state, [&](const Topology& t, Transport& tr, Shard& s) {
        one_op(2, g2, s, t, tr);
        two_op(1, 4, g4, s, t, tr);
        hall(s, t, tr);
    });
    CHECK(std::abs(norm_of(out) - 1.0) < 1e-12);
}

TEST_CASE("struck-qubit arguments are validated") {
    const auto t = Topology::flat(3, 1, 0);
    Shard s = init_basis(3, 0, t);
    InProcessHub hub(1);
    hub.run(ExecMode::SingleThread, [&](Transport& tr) {
        CHECK_THROWS_AS(one_op(0, hadamard(), s, t, tr), InputError);
        CHECK_THROWS_AS(one_op(4, hadamard(), s, t, tr), InputError);
        CHECK_THROWS_AS(two_op(2, 2, identity4(), s, t, tr), InputError);
        CHECK_THROWS_AS(two_op(1, 5, identity4(), s, t, tr), InputError);
        CHECK_THROWS_AS(cphasek(1, 1, 2, s, t, tr), InputError);
        Shard wrong = s;
        wrong.amps.pop_back();
        CHECK_THROWS_AS(one_op(1, hadamard(), wrong, t, tr), InputError);
    });
}

TEST_CASE("a cross-rank gate costs one message pair per rank") {
    InProcessHub hub(2);
    hub.run(ExecMode::SingleThread, [&](Transport& tr) {
        const auto t = Topology::flat(3, 2, tr.rank());
        Shard s = init_basis(3, 0, t);
        one_op(1, hadamard(), s, t, tr); // qubit 1 pairs across the two ranks
    });
    CHECK(hub.send_count(0, 1) == 1);
    CHECK(hub.send_count(1, 0) == 1);
    CHECK(hub.total_messages() == 2);
}

TEST_CASE("a local-qubit gate sends nothing") {
    InProcessHub hub(2);
    hub.run(ExecMode::SingleThread, [&](Transport& tr) {
        const auto t = Topology::flat(3, 2, tr.rank());
        Shard s = init_basis(3, 0, t);
        one_op(3, hadamard(), s, t, tr);
        two_op(2, 3, cnot_gate(), s, t, tr);
    });
    CHECK(hub.total_messages() == 0);
}

TEST_CASE("gate results are identical across rank counts") {
    Rng rng(33, 0);
    const int nq = 6;
    const auto state = testsupport::random_state(nq, rng);
    const Gate2 g2 = testsupport::random_gate2(rng);
    const Gate4 g4 = testsupport::random_gate4(rng);
    const auto program = [&](const Topology& t, Transport& tr, Shard& s) {
        one_op(1, g2, s, t, tr);
        two_op(2, 5, g4, s, t, tr);
        hall(s, t, tr);
        cphasek(1, 6, 2, s, t, tr);
    };
    const auto reference = run_sharded(nq, 0, state, program);
    for (int p : {1, 2, 3, 4}) {
        const auto got = run_sharded(nq, p, state, program);
        CHECK(max_abs_diff(got, reference) < 1e-12);
    }
    // Execution mode changes scheduling, never arithmetic.
    const auto threaded = run_sharded(nq, 2, state, program, ExecMode::MultiThread);
    const auto fibered = run_sharded(nq, 2, state, program, ExecMode::SingleThread);
    CHECK(max_abs_diff(threaded, fibered) == 0.0);
}
