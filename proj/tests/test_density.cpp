#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "qshard/density.hpp"
#include "qshard/grover.hpp"
#include "qshard/multiverse.hpp"
#include "support.hpp"

using namespace qshard;

namespace {

/// Independent spectrum oracle: Eigen's self-adjoint solver (tridiagonal QR
/// iteration under the hood), descending.
std::vector<double> eigen_spectrum(const DensityMatrix& rho) {
    const auto n = static_cast<Eigen::Index>(rho.dim);
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rho.at(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
    std::vector<double> eig(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    std::sort(eig.begin(), eig.end(), std::greater<>());
    return eig;
}

DensityMatrix random_hermitian(int nq, Rng& rng) {
    DensityMatrix rho;
    rho.nq = nq;
    rho.dim = std::uint64_t{1} << nq;
    rho.row_begin = 0;
    rho.row_count = rho.dim;
    rho.a.assign(rho.dim * rho.dim, cxd(0.0, 0.0));
    for (std::uint64_t i = 0; i < rho.dim; ++i) {
        rho.at(i, i) = cxd(rng.uniform(-1, 1), 0.0);
        for (std::uint64_t j = i + 1; j < rho.dim; ++j) {
            rho.at(i, j) = cxd(rng.uniform(-1, 1), rng.uniform(-1, 1));
            rho.at(j, i) = std::conj(rho.at(i, j));
        }
    }
    return rho;
}

} // namespace

TEST_CASE("local assembly matches the brute-force outer-product sum") {
    Rng rng(91, 0);
    const int nq = 3;
    const std::uint64_t dim = 8;
    std::vector<std::vector<cxd>> states;
    for (int g = 0; g < 3; ++g) states.push_back(testsupport::random_state(nq, rng));
    std::vector<double> weights{0.5, 0.3, 0.2};
    const auto rho = assemble_density_local(states, weights, nq);

    for (std::uint64_t n = 0; n < dim; ++n)
        for (std::uint64_t np = 0; np < dim; ++np) {
            cxd expected(0.0, 0.0);
            for (int g = 0; g < 3; ++g) expected += weights[g] * states[g][n] * std::conj(states[g][np]);
            REQUIRE(std::abs(rho.at(n, np) - expected) < 1e-12);
        }
    CHECK(std::abs(density_trace(rho) - 1.0) < 1e-12);
}

TEST_CASE("pure state density matrix is idempotent with eigenvalues (1, 0...)") {
    Rng rng(93, 0);
    const int nq = 3;
    const auto psi = testsupport::random_state(nq, rng);
    const auto rho = assemble_density_local({psi}, {1.0}, nq);

    // rho^2 = rho within 1e-10.
    const std::uint64_t dim = rho.dim;
    for (std::uint64_t i = 0; i < dim; ++i)
        for (std::uint64_t j = 0; j < dim; ++j) {
            cxd sq(0.0, 0.0);
            for (std::uint64_t k = 0; k < dim; ++k) sq += rho.at(i, k) * rho.at(k, j);
            REQUIRE(std::abs(sq - rho.at(i, j)) < 1e-10);
        }
    CHECK(std::abs(density_purity(rho) - 1.0) < 1e-10);

    const auto eig = hermitian_eigenvalues(rho);
    CHECK(std::abs(eig[0] - 1.0) < 1e-10);
    for (std::size_t i = 1; i < eig.size(); ++i) CHECK(std::abs(eig[i]) < 1e-10);
    CHECK(entropy_bits(eig) < 1e-8);
}

TEST_CASE("two equal-weight orthogonal basis states give diag(1/2, 1/2, 0...)") {
    const int nq = 2;
    std::vector<cxd> a(4, cxd(0, 0)), b(4, cxd(0, 0));
    a[0] = 1.0;
    b[2] = 1.0;
    const auto rho = assemble_density_local({a, b}, {0.5, 0.5}, nq);
    for (std::uint64_t i = 0; i < 4; ++i)
        for (std::uint64_t j = 0; j < 4; ++j) {
            const double expected = (i == j && (i == 0 || i == 2)) ? 0.5 : 0.0;
            CHECK(std::abs(rho.at(i, j) - expected) < 1e-15);
        }
    const auto eig = hermitian_eigenvalues(rho);
    CHECK(eig[0] == Catch::Approx(0.5).margin(1e-12));
    CHECK(eig[1] == Catch::Approx(0.5).margin(1e-12));
    CHECK(entropy_bits(eig) == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("jacobi eigenvalues agree with the independent QR-based oracle") {
    Rng rng(95, 0);
    SECTION("diagonal matrix is exact") {
        DensityMatrix rho;
        rho.nq = 2;
        rho.dim = 4;
        rho.row_begin = 0;
        rho.row_count = 4;
        rho.a.assign(16, cxd(0, 0));
        const double d[4] = {1.0, 0.0, 0.0, 0.0};
        for (int i = 0; i < 4; ++i) rho.at(i, i) = d[i];
        CHECK(hermitian_eigenvalues(rho) == std::vector<double>{1.0, 0.0, 0.0, 0.0});
    }
    SECTION("random 16x16 Hermitian") {
        for (int trial = 0; trial < 8; ++trial) {
            const auto rho = random_hermitian(4, rng);
            const auto jacobi = hermitian_eigenvalues(rho);
            const auto oracle = eigen_spectrum(rho);
            REQUIRE(jacobi.size() == oracle.size());
            for (std::size_t i = 0; i < jacobi.size(); ++i)
                REQUIRE(jacobi[i] == Catch::Approx(oracle[i]).margin(1e-8));
        }
    }
    SECTION("eigenvalue sum equals the trace") {
        const auto rho = random_hermitian(5, rng);
        const auto eig = hermitian_eigenvalues(rho);
        double sum = 0.0;
        for (double e : eig) sum += e;
        CHECK(sum == Catch::Approx(density_trace(rho)).margin(1e-8));
    }
    SECTION("non-Hermitian input is rejected") {
        auto rho = random_hermitian(2, rng);
        rho.at(0, 1) += cxd(1e-6, 0);
        CHECK_THROWS_AS(hermitian_eigenvalues(rho), InputError);
    }
}

TEST_CASE("entropy handles edge spectra") {
    CHECK(entropy_bits({1.0, 0.0, 0.0}) == 0.0);
    CHECK(entropy_bits({0.5, 0.5}) == Catch::Approx(1.0).margin(1e-12));
    CHECK(entropy_bits(std::vector<double>(16, 1.0 / 16.0)) == Catch::Approx(4.0).margin(1e-12));
    CHECK(entropy_bits({1.0 - 1e-12, -5e-11, 1e-12 + 5e-11}) >= 0.0); // clamped round-off
    CHECK_THROWS_AS(entropy_bits({0.9}), InputError);                 // trace off by too much
    CHECK_THROWS_AS(entropy_bits({1.1, -0.1}), InputError);           // negative beyond clamp
}

TEST_CASE("oversized density requests are refused") {
    CHECK_THROWS_AS(detail::check_density_size(15), ConfigError);
    CHECK_NOTHROW(detail::check_density_size(14));
}

namespace {

/// Full multiverse + assembly fixture: Grover in two groups, one noisy.
struct AssembledRun {
    std::vector<double> weights{0.5, 0.5};
    DensityMatrix root_rho;       // valid on rank 0
    DensityMatrix gathered_part;  // partitioned mode, gathered to rank 0
    double trace = 0, purity = 0, entropy = 0;
};

AssembledRun run_and_assemble(int nq, GlobalIndex marked, std::uint64_t seed) {
    AssembledRun out;
    run_ranks(4, ExecMode::SingleThread, [&](Transport& tr) {
        const auto t = Topology::flat(nq, tr.size(), tr.rank());
        MultiverseConfig cfg;
        cfg.group_count = 2;
        cfg.seed = seed;
        cfg.weights = out.weights;
        const auto gcfg = GroverConfig::standard(nq, marked);
        auto res = run_multiverse(
            [&](const Topology& gt, Transport& gtr, const NoiseHook& noise) {
                return grover_run(gcfg, gt, gtr, noise).state;
            },
            cfg, gcfg.injection_points(), t, tr);

        auto rho_root = assemble_density(res.state, res.weights, cfg.group_count, t, tr, DensityMode::Root);
        auto rho_part =
            assemble_density(res.state, res.weights, cfg.group_count, t, tr, DensityMode::Partitioned);
        auto gathered = gather_density(rho_part, tr);
        if (tr.rank() == 0) {
            out.root_rho = std::move(rho_root);
            out.gathered_part = std::move(gathered);
            out.trace = density_trace(out.root_rho);
            out.purity = density_purity(out.root_rho);
            out.entropy = entropy_bits(hermitian_eigenvalues(out.root_rho));
        }
    });
    return out;
}

} // namespace

TEST_CASE("root and partitioned assembly agree on the ensemble matrix") {
    const auto run = run_and_assemble(4, 9, 17);
    REQUIRE(run.root_rho.dim == 16);
    REQUIRE(run.gathered_part.dim == 16);
    double worst = 0.0;
    for (std::size_t i = 0; i < run.root_rho.a.size(); ++i)
        worst = std::max(worst, std::abs(run.root_rho.a[i] - run.gathered_part.a[i]));
    CHECK(worst < 1e-12);

    CHECK(run.trace == Catch::Approx(1.0).margin(1e-10));
    CHECK(run.purity <= 1.0 + 1e-10);
    CHECK(run.purity < 1.0 - 1e-8); // a noisy ensemble is genuinely mixed
    CHECK(run.entropy > 0.0);
}

TEST_CASE("weights concentrated on the noiseless group give a pure ensemble") {
    const int nq = 4;
    const GlobalIndex marked = 5;
    run_ranks(4, ExecMode::SingleThread, [&](Transport& tr) {
        const auto t = Topology::flat(nq, tr.size(), tr.rank());
        MultiverseConfig cfg;
        cfg.group_count = 2;
        cfg.seed = 29;
        cfg.weights = {1.0, 0.0};
        const auto gcfg = GroverConfig::standard(nq, marked);
        auto res = run_multiverse(
            [&](const Topology& gt, Transport& gtr, const NoiseHook& noise) {
                return grover_run(gcfg, gt, gtr, noise).state;
            },
            cfg, gcfg.injection_points(), t, tr);
        auto rho = assemble_density(res.state, res.weights, cfg.group_count, t, tr, DensityMode::Root);
        if (tr.rank() == 0) {
            const auto eig = hermitian_eigenvalues(rho);
            CHECK(eig[0] == Catch::Approx(1.0).margin(1e-10));
            CHECK(entropy_bits(eig) < 1e-8);
            CHECK(density_purity(rho) == Catch::Approx(1.0).margin(1e-8));

            // And it equals the pure projector onto the group-0 state.
            CHECK(std::abs(rho.at(marked, marked).real() - eig[0]) < 0.05); // dominated by the marked item
        }
    });
}

TEST_CASE("distributed assembly equals the local reference") {
    const int nq = 3;
    Rng rng(97, 0);
    const auto psi_a = testsupport::random_state(nq, rng);
    const auto psi_b = testsupport::random_state(nq, rng);
    const std::vector<double> weights{0.7, 0.3};
    const auto expected = assemble_density_local({psi_a, psi_b}, weights, nq);

    run_ranks(4, ExecMode::SingleThread, [&](Transport& tr) {
        const auto t = Topology::flat(nq, tr.size(), tr.rank());
        const auto gt = t.split(2);
        // Group 0 holds psi_a, group 1 holds psi_b, sharded over 2 ranks each.
        const auto& psi = (gt.group_id == 0) ? psi_a : psi_b;
        Shard s = Shard::zeros(gt);
        for (std::uint64_t o = 0; o < gt.n_x; ++o) s.amps[o] = psi[s.base + o];
        auto rho = assemble_density(s, weights, 2, t, tr, DensityMode::Root);
        if (tr.rank() == 0) {
            double worst = 0.0;
            for (std::size_t i = 0; i < rho.a.size(); ++i)
                worst = std::max(worst, std::abs(rho.a[i] - expected.a[i]));
            CHECK(worst < 1e-12);
        }
    });
}
