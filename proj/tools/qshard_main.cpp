// qshard command-line front end: batch runs of the sharded simulator with
// plain-text or key-value reports on stdout. Run mechanics (rank count,
// transport) go to stderr so reports depend only on inputs that affect
// results.

#include <CLI11.hpp>

#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qshard/qshard.hpp"

using namespace qshard;

namespace {

/// A check run (selftest / qft-check) found failures; the report has already
/// been printed.
struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOpts {
    int ranks = 1;
    int groups = 1;
    std::uint64_t seed = 1;
    int ientropy = 0;
    int noise_count = 1;
    bool noise_two_qubit = false;
    std::string weights_csv;
    std::string transport = "inprocess";
    int port = 38200;
    std::string format = "text";
    bool deterministic = false;
    std::string dump_state_path;
    std::string noise_plan_path;      // replay source
    std::string dump_noise_plan_path; // replay/dump target
    std::string dump_eigenvalues_path;
};

void add_common_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--ranks", o.ranks, "Logical rank count (power of two)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--groups", o.groups, "Multiverse group count (power of two dividing ranks)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o.seed, "Random seed");
    cmd->add_option("--ientropy", o.ientropy, "Density/entropy mode: 0 off, 1 root, 2 partitioned")
        ->check(CLI::Range(0, 2));
    cmd->add_option("--noise-count", o.noise_count, "Noise intrusions per noisy group")
        ->check(CLI::NonNegativeNumber);
    cmd->add_flag("--noise-two-qubit", o.noise_two_qubit, "Draw two-qubit noise rotations");
    cmd->add_option("--weights", o.weights_csv, "Comma-separated group weights (default uniform)");
    cmd->add_option("--transport", o.transport, "inprocess | threads | socket")
        ->check(CLI::IsMember({"inprocess", "threads", "socket"}));
    cmd->add_option("--port", o.port, "Base port for socket transport");
    cmd->add_option("--format", o.format, "Report format: text | kv")
        ->check(CLI::IsMember({"text", "kv"}));
    cmd->add_flag("--deterministic", o.deterministic, "Suppress timestamps in text reports");
    cmd->add_option("--dump-state", o.dump_state_path, "Write the final group-0 state to PATH");
    cmd->add_option("--noise-plan", o.noise_plan_path, "Replay a dumped noise plan from PATH");
    cmd->add_option("--dump-noise-plan", o.dump_noise_plan_path, "Write the noise plan used to PATH");
    cmd->add_option("--dump-eigenvalues", o.dump_eigenvalues_path,
                    "Write the full ensemble spectrum to PATH (needs --ientropy > 0)");
}

std::vector<double> parse_weights(const std::string& csv) {
    std::vector<double> w;
    if (csv.empty()) return w;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) w.push_back(std::stod(item));
    return w;
}

void validate_common(const CommonOpts& o) {
    if (!is_power_of_two(static_cast<std::uint64_t>(o.ranks)))
        throw ConfigError("--ranks must be a power of two");
    if (!is_power_of_two(static_cast<std::uint64_t>(o.groups)) || o.ranks % o.groups != 0)
        throw ConfigError("--groups must be a power of two dividing --ranks");
}

void run_spmd(const CommonOpts& o, const std::function<void(Transport&)>& body) {
    if (o.transport == "socket")
        run_ranks_socket(o.ranks, o.port, body);
    else
        run_ranks(o.ranks, o.transport == "threads" ? ExecMode::MultiThread : ExecMode::SingleThread,
                  body);
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Ordered key/value report with text and kv renderings. kv output never
/// carries a timestamp, so identical runs are byte-identical.
class Report {
public:
    explicit Report(std::string title) : title_(std::move(title)) {}

    void add(const std::string& key, const std::string& value) { rows_.emplace_back(key, value); }
    void add(const std::string& key, std::uint64_t v) { add(key, std::to_string(v)); }
    void add(const std::string& key, int v) { add(key, std::to_string(v)); }
    void add(const std::string& key, double v) { add(key, fmt_double(v)); }

    void print(const std::string& format, bool deterministic) const {
        if (format == "kv") {
            for (const auto& [k, v] : rows_) std::printf("%s=%s\n", k.c_str(), v.c_str());
            return;
        }
        std::printf("== %s ==\n", title_.c_str());
        if (!deterministic) {
            char stamp[64];
            const std::time_t now = std::time(nullptr);
            std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%S", std::localtime(&now));
            std::printf("generated: %s\n", stamp);
        }
        for (const auto& [k, v] : rows_) std::printf("%-24s %s\n", (k + ":").c_str(), v.c_str());
    }

private:
    std::string title_;
    std::vector<std::pair<std::string, std::string>> rows_;
};

struct EntropySummary {
    bool present = false;
    double trace = 0.0;
    double purity = 0.0;
    double entropy = 0.0;
    std::vector<double> spectrum;
};

/// Collective: assemble the ensemble density matrix per the ientropy mode and
/// solve for its spectrum at the global root. Only rank 0's summary is filled.
EntropySummary ensemble_entropy(const CommonOpts& o, const MultiverseResult& res, const Topology& t,
                                Transport& tr) {
    EntropySummary out;
    if (o.ientropy == 0) return out;
    const DensityMode mode = (o.ientropy == 1) ? DensityMode::Root : DensityMode::Partitioned;
    auto rho = assemble_density(res.state, res.weights, o.groups, t, tr, mode);
    if (mode == DensityMode::Partitioned) rho = gather_density(rho, tr);
    if (tr.rank() != 0) return out;
    out.present = true;
    out.trace = density_trace(rho);
    out.purity = density_purity(rho);
    out.spectrum = hermitian_eigenvalues(rho);
    out.entropy = entropy_bits(out.spectrum);
    return out;
}

void add_entropy_rows(Report& report, const EntropySummary& e) {
    if (!e.present) return;
    report.add("trace", e.trace);
    report.add("trace_rho2", e.purity);
    const std::size_t top = std::min<std::size_t>(8, e.spectrum.size());
    for (std::size_t i = 0; i < top; ++i)
        report.add("eigenvalue_" + std::to_string(i), e.spectrum[i]);
    report.add("entropy_bits", e.entropy);
}

void maybe_dump_eigenvalues(const CommonOpts& o, const EntropySummary& e) {
    if (o.dump_eigenvalues_path.empty() || !e.present) return;
    std::ofstream f(o.dump_eigenvalues_path);
    if (!f) throw InputError("cannot write " + o.dump_eigenvalues_path);
    for (std::size_t i = 0; i < e.spectrum.size(); ++i)
        f << i << " " << fmt_double(e.spectrum[i]) << "\n";
}

/// Per-group noise plans: replayed from file when requested, drawn otherwise.
/// Pure, so every rank (and the report writer) sees the same plans.
std::vector<NoisePlan> plans_for(const CommonOpts& o, int nq, int injection_points) {
    if (!o.noise_plan_path.empty()) {
        std::ifstream f(o.noise_plan_path);
        if (!f) throw InputError("cannot read " + o.noise_plan_path);
        return parse_noise_plans(f, o.groups);
    }
    std::vector<NoisePlan> plans(o.groups);
    for (int g = 1; g < o.groups; ++g)
        plans[g] = draw_noise_plan(g, o.seed, nq, injection_points, o.noise_count,
                                   o.noise_two_qubit ? NoiseKind::TwoQubit : NoiseKind::OneQubit);
    return plans;
}

void maybe_dump_plans(const CommonOpts& o, const std::vector<NoisePlan>& plans) {
    if (o.dump_noise_plan_path.empty()) return;
    std::ofstream f(o.dump_noise_plan_path);
    if (!f) throw InputError("cannot write " + o.dump_noise_plan_path);
    dump_noise_plans(f, plans);
}

void maybe_dump_state(const CommonOpts& o, const std::vector<cxd>& full) {
    if (o.dump_state_path.empty()) return;
    std::ofstream f(o.dump_state_path);
    if (!f) throw InputError("cannot write " + o.dump_state_path);
    dump_state(f, full);
}

MultiverseConfig multiverse_config(const CommonOpts& o, const std::vector<NoisePlan>& plans) {
    MultiverseConfig cfg;
    cfg.group_count = o.groups;
    cfg.weights = parse_weights(o.weights_csv);
    cfg.seed = o.seed;
    cfg.intrusions = o.noise_count;
    cfg.kind = o.noise_two_qubit ? NoiseKind::TwoQubit : NoiseKind::OneQubit;
    cfg.replay = &plans;
    return cfg;
}

void echo_run_mechanics(const CommonOpts& o) {
    std::fprintf(stderr, "qshard: ranks=%d transport=%s groups=%d\n", o.ranks, o.transport.c_str(),
                 o.groups);
}

// ---------------------------------------------------------------------------
// grover
// ---------------------------------------------------------------------------

struct GroverArgs {
    CommonOpts common;
    int nq = 6;
    std::uint64_t marked = 0;
};

int cmd_grover(const GroverArgs& a) {
    validate_common(a.common);
    const auto cfg = GroverConfig::standard(a.nq, a.marked); // validates the marked index
    const auto plans = plans_for(a.common, a.nq, cfg.injection_points());
    echo_run_mechanics(a.common);

    run_spmd(a.common, [&](Transport& tr) {
        const auto t = Topology::flat(a.nq, tr.size(), tr.rank());
        const auto mcfg = multiverse_config(a.common, plans);
        double group_success = 0.0;
        auto res = run_multiverse(
            [&](const Topology& gt, Transport& gtr, const NoiseHook& noise) {
                auto r = grover_run(cfg, gt, gtr, noise);
                group_success = r.success_probability;
                return std::move(r.state);
            },
            mcfg, cfg.injection_points(), t, tr);

        const auto entropy = ensemble_entropy(a.common, res, t, tr);

        // Per-group success probabilities, group roots -> global root.
        const int gsize = tr.size() / a.common.groups;
        std::vector<double> success(a.common.groups, 0.0);
        if (tr.rank() == 0) {
            success[0] = group_success;
            for (int g = 1; g < a.common.groups; ++g) {
                std::vector<cxd> buf(1);
                tr.recv(g * gsize, tag::scalars, buf);
                success[g] = buf[0].real();
            }
        } else if (res.group_topology.group_rank == 0) {
            const std::vector<cxd> buf{cxd(group_success, 0.0)};
            tr.send(0, tag::scalars, buf);
        }

        auto group_tr = tr.split_contiguous(a.common.groups);
        const auto full = gather_state(res.state, res.group_topology, *group_tr);

        if (tr.rank() == 0) {
            maybe_dump_state(a.common, full);
            maybe_dump_plans(a.common, plans);
            Report report("grover search");
            report.add("algorithm", "grover");
            report.add("nq", a.nq);
            report.add("marked", a.marked);
            report.add("iterations", cfg.n_t);
            report.add("seed", a.common.seed);
            report.add("groups", a.common.groups);
            report.add("noise_count", a.common.noise_count);
            report.add("ientropy", a.common.ientropy);
            report.add("success_probability", success[0]);
            for (int g = 1; g < a.common.groups; ++g)
                report.add("group_" + std::to_string(g) + "_success", success[g]);
            add_entropy_rows(report, entropy);
            report.print(a.common.format, a.common.deterministic);
            maybe_dump_eigenvalues(a.common, entropy);
        }
    });
    return 0;
}

// ---------------------------------------------------------------------------
// shor
// ---------------------------------------------------------------------------

struct ShorArgs {
    CommonOpts common;
    std::uint64_t m = 15;
    std::uint64_t xguess = 0; // 0 = draw from the seed
    bool sample = false;
};

std::string factor_string(const std::optional<FactorPair>& f) {
    if (!f) return "none";
    return std::to_string(f->f1) + "x" + std::to_string(f->f2);
}

int cmd_shor(const ShorArgs& a) {
    validate_common(a.common);
    const std::string reason = shor_rejection_reason(a.m);
    if (!reason.empty()) throw InputError("M=" + std::to_string(a.m) + " rejected: " + reason);

    std::uint64_t xguess = a.xguess;
    if (xguess == 0) {
        Rng rng(a.common.seed, 0x713);
        xguess = pick_xguess(a.m, rng);
    }
    const auto cfg = shor_configure(a.m, xguess);
    const auto plans = plans_for(a.common, cfg.nq(), kShorInjectionPoints);
    echo_run_mechanics(a.common);

    run_spmd(a.common, [&](Transport& tr) {
        const auto t = Topology::flat(cfg.nq(), tr.size(), tr.rank());
        const auto mcfg = multiverse_config(a.common, plans);
        ShorOptions opt;
        opt.sample_k = a.sample;
        ShorOutcome outcome;
        auto res = run_multiverse(
            [&](const Topology& gt, Transport& gtr, const NoiseHook& noise) {
                outcome = shor_run(cfg, gt, gtr, a.common.seed, opt, noise);
                return std::move(outcome.final_state);
            },
            mcfg, kShorInjectionPoints, t, tr);

        const auto entropy = ensemble_entropy(a.common, res, t, tr);

        // Group verdict summaries, group roots -> global root.
        const int gsize = tr.size() / a.common.groups;
        std::vector<std::array<double, 4>> summaries(a.common.groups);
        const std::array<double, 4> mine{
            outcome.factors ? 1.0 : 0.0,
            outcome.factors ? static_cast<double>(outcome.factors->f1) : 0.0,
            outcome.factors ? static_cast<double>(outcome.factors->f2) : 0.0,
            outcome.period ? static_cast<double>(*outcome.period) : 0.0,
        };
        if (tr.rank() == 0) {
            summaries[0] = mine;
            for (int g = 1; g < a.common.groups; ++g) {
                std::vector<cxd> buf(4);
                tr.recv(g * gsize, tag::scalars, buf);
                for (int i = 0; i < 4; ++i) summaries[g][i] = buf[i].real();
            }
        } else if (res.group_topology.group_rank == 0) {
            std::vector<cxd> buf(4);
            for (int i = 0; i < 4; ++i) buf[i] = cxd(mine[i], 0.0);
            tr.send(0, tag::scalars, buf);
        }

        auto group_tr = tr.split_contiguous(a.common.groups);
        const auto full = gather_state(res.state, res.group_topology, *group_tr);

        if (tr.rank() == 0) {
            maybe_dump_state(a.common, full);
            maybe_dump_plans(a.common, plans);
            Report report("shor factoring");
            report.add("algorithm", "shor");
            report.add("m", a.m);
            report.add("xguess", xguess);
            report.add("n1", cfg.n1);
            report.add("n2", cfg.n2);
            report.add("q", cfg.q);
            report.add("seed", a.common.seed);
            report.add("groups", a.common.groups);
            report.add("sample", a.sample ? 1 : 0);
            report.add("outcome_count", static_cast<std::uint64_t>(outcome.outcomes.size()));
            for (std::size_t i = 0; i < outcome.outcomes.size(); ++i) {
                const auto& oc = outcome.outcomes[i];
                const std::string prefix = "outcome_" + std::to_string(i);
                report.add(prefix + "_k", oc.k);
                report.add(prefix + "_prob", oc.probability);
                report.add(prefix + "_d", oc.d);
            }
            report.add("chosen_k", outcome.chosen_k);
            report.add("n_k", outcome.n_k);
            report.add("d", outcome.d);
            report.add("peak_count", static_cast<std::uint64_t>(outcome.peaks.size()));
            for (std::size_t i = 0; i < outcome.peaks.size(); ++i) {
                const auto& pk = outcome.peaks[i];
                const std::string prefix = "peak_" + std::to_string(i);
                report.add(prefix + "_n", pk.nbar);
                report.add(prefix + "_prob", pk.probability);
                report.add(prefix + "_r",
                           pk.r_candidate ? std::to_string(*pk.r_candidate) : std::string("none"));
                report.add(prefix + "_factors", factor_string(pk.factors));
            }
            report.add("period", outcome.period ? std::to_string(*outcome.period) : std::string("none"));
            report.add("factors", factor_string(outcome.factors));
            report.add("verdict", outcome.verdict);
            for (int g = 1; g < a.common.groups; ++g) {
                const auto& s = summaries[g];
                report.add("group_" + std::to_string(g) + "_verdict",
                           s[0] > 0 ? std::to_string(static_cast<std::uint64_t>(s[1])) + "x" +
                                          std::to_string(static_cast<std::uint64_t>(s[2]))
                                    : std::string("no factors"));
            }
            add_entropy_rows(report, entropy);
            report.print(a.common.format, a.common.deterministic);
            maybe_dump_eigenvalues(a.common, entropy);
        }
    });
    return 0;
}

// ---------------------------------------------------------------------------
// qft-check / selftest
// ---------------------------------------------------------------------------

struct CheckArgs {
    CommonOpts common;
    int nq = 5;
    int reps = 5;
    bool inject_fault = false;
};

/// Shared harness: run named checks at rank 0 of a communicator sized to the
/// problem, print one PASS/FAIL line each, fail the process if any failed.
class CheckRunner {
public:
    CheckRunner(Transport& tr, bool inject_fault) : tr_(tr), inject_fault_(inject_fault) {}

    /// `good` was evaluated at rank 0 only; other ranks pass anything.
    void record(const std::string& name, bool good) {
        if (inject_fault_ && checks_ == 0) good = false; // test hook: poison the first check
        ++checks_;
        double flag = good ? 0.0 : 1.0;
        flag = tr_.broadcast_double(0, flag);
        if (flag != 0.0) ++failures_;
        if (tr_.rank() == 0) std::printf("%s %s\n", flag == 0.0 ? "PASS" : "FAIL", name.c_str());
    }

    void finish() const {
        if (tr_.rank() == 0)
            std::printf("checks: %d, failures: %d\n", checks_, failures_);
        if (failures_ > 0) throw CheckFailure("self-check failures");
    }

private:
    Transport& tr_;
    bool inject_fault_;
    int checks_ = 0;
    int failures_ = 0;
};

/// Run a sharded program on a communicator no larger than the state: ranks
/// beyond 2^nq fold into redundant groups that all do the same work.
std::vector<cxd> sharded_result(
    Transport& tr, int nq,
    const std::function<void(const Topology&, Transport&, Shard&)>& body,
    const std::vector<cxd>& initial) {
    const int max_groups = tr.size() / std::min<int>(tr.size(), 1 << nq);
    auto sub = tr.split_contiguous(std::max(1, max_groups));
    const auto t = Topology::flat(nq, sub->size(), sub->rank());
    Shard s = Shard::zeros(t);
    for (std::uint64_t o = 0; o < t.n_x; ++o) s.amps[o] = initial[s.base + o];
    body(t, *sub, s);
    auto full = gather_state(s, t, *sub);
    // Global rank 0 is rank 0 of the first subgroup, so its gather is authoritative.
    return full;
}

std::vector<cxd> seeded_state(int nq, std::uint64_t seed, std::uint64_t stream) {
    Rng rng(seed, stream);
    std::vector<cxd> v(std::size_t{1} << nq);
    double norm = 0.0;
    for (cxd& c : v) {
        c = cxd(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        norm += std::norm(c);
    }
    const double scale = 1.0 / std::sqrt(norm);
    for (cxd& c : v) c *= scale;
    return v;
}

Gate2 seeded_gate2(std::uint64_t seed, std::uint64_t stream);
Gate4 seeded_gate4(std::uint64_t seed, std::uint64_t stream);

template <std::size_t N>
std::array<std::array<cxd, N>, N> seeded_unitary(Rng& rng) {
    std::array<std::array<cxd, N>, N> cols;
    for (std::size_t j = 0; j < N; ++j) {
        for (std::size_t i = 0; i < N; ++i)
            cols[j][i] = cxd(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        for (std::size_t prev = 0; prev < j; ++prev) {
            cxd dot(0.0, 0.0);
            for (std::size_t i = 0; i < N; ++i) dot += std::conj(cols[prev][i]) * cols[j][i];
            for (std::size_t i = 0; i < N; ++i) cols[j][i] -= dot * cols[prev][i];
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < N; ++i) norm += std::norm(cols[j][i]);
        const double scale = 1.0 / std::sqrt(norm);
        for (std::size_t i = 0; i < N; ++i) cols[j][i] *= scale;
    }
    std::array<std::array<cxd, N>, N> m;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) m[i][j] = cols[j][i];
    return m;
}

Gate2 seeded_gate2(std::uint64_t seed, std::uint64_t stream) {
    Rng rng(seed, stream);
    return Gate2{seeded_unitary<2>(rng)};
}

Gate4 seeded_gate4(std::uint64_t seed, std::uint64_t stream) {
    Rng rng(seed, stream);
    return Gate4{seeded_unitary<4>(rng)};
}

double worst_diff(const std::vector<cxd>& a, const std::vector<cxd>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

void qft_checks(CheckRunner& runner, Transport& tr, int max_n1, std::uint64_t seed) {
    for (int n1 = 1; n1 <= max_n1; ++n1) {
        const auto state = seeded_state(n1, seed, 0x9f0 + n1);
        const auto got = sharded_result(
            tr, n1, [&](const Topology& t, Transport& sub, Shard& s) { qft(n1, s, t, sub); }, state);
        bool forward_ok = true, inverse_ok = true;
        if (tr.rank() == 0) {
            const auto expected = dense::matvec(dense::dft(n1), state);
            forward_ok = worst_diff(got, expected) < 1e-10;
        }
        runner.record("qft matches dense dft, n1=" + std::to_string(n1), forward_ok);

        const auto round = sharded_result(
            tr, n1,
            [&](const Topology& t, Transport& sub, Shard& s) {
                qft(n1, s, t, sub);
                inverse_qft(n1, s, t, sub);
            },
            state);
        if (tr.rank() == 0) inverse_ok = worst_diff(round, state) < 1e-10;
        runner.record("qft round trip, n1=" + std::to_string(n1), inverse_ok);
    }
}

int cmd_qft_check(const CheckArgs& a) {
    validate_common(a.common);
    echo_run_mechanics(a.common);
    run_spmd(a.common, [&](Transport& tr) {
        CheckRunner runner(tr, a.inject_fault);
        qft_checks(runner, tr, a.nq, a.common.seed);
        runner.finish();
    });
    return 0;
}

int cmd_selftest(const CheckArgs& a) {
    validate_common(a.common);
    echo_run_mechanics(a.common);
    run_spmd(a.common, [&](Transport& tr) {
        CheckRunner runner(tr, a.inject_fault);

        for (int nq = 2; nq <= a.nq; ++nq) {
            double worst1 = 0.0, worst2 = 0.0;
            for (int rep = 0; rep < a.reps; ++rep) {
                for (int i_s = 1; i_s <= nq; ++i_s) {
                    const std::uint64_t stream = 1000 * nq + 10 * i_s + rep;
                    const auto state = seeded_state(nq, a.common.seed, stream);
                    const auto g = seeded_gate2(a.common.seed, stream);
                    const auto got = sharded_result(
                        tr, nq,
                        [&](const Topology& t, Transport& sub, Shard& s) { one_op(i_s, g, s, t, sub); },
                        state);
                    if (tr.rank() == 0) {
                        const auto expect = dense::matvec(dense::one_qubit_operator(nq, i_s, g), state);
                        worst1 = std::max(worst1, worst_diff(got, expect));
                    }
                }
                for (int i_s1 = 1; i_s1 <= nq; ++i_s1)
                    for (int i_s2 = i_s1 + 1; i_s2 <= nq; ++i_s2) {
                        const std::uint64_t stream = 100000 + 1000 * nq + 100 * i_s1 + 10 * i_s2 + rep;
                        const auto state = seeded_state(nq, a.common.seed, stream);
                        const auto g = seeded_gate4(a.common.seed, stream);
                        const auto got = sharded_result(
                            tr, nq,
                            [&](const Topology& t, Transport& sub, Shard& s) {
                                two_op(i_s1, i_s2, g, s, t, sub);
                            },
                            state);
                        if (tr.rank() == 0) {
                            const auto expect =
                                dense::matvec(dense::two_qubit_operator(nq, i_s1, i_s2, g), state);
                            worst2 = std::max(worst2, worst_diff(got, expect));
                        }
                    }
            }
            runner.record("one-qubit ops match dense oracle, nq=" + std::to_string(nq), worst1 < 1e-12);
            runner.record("two-qubit ops match dense oracle, nq=" + std::to_string(nq), worst2 < 1e-12);
        }

        {
            const int nq = a.nq;
            const auto state = seeded_state(nq, a.common.seed, 0x4a11);
            const auto via_hall = sharded_result(
                tr, nq, [&](const Topology& t, Transport& sub, Shard& s) { hall(s, t, sub); }, state);
            const auto via_hall2 = sharded_result(
                tr, nq, [&](const Topology& t, Transport& sub, Shard& s) { hall2(s, t, sub); }, state);
            bool ok = true;
            if (tr.rank() == 0) {
                const auto expect = dense::matvec(dense::hadamard_all(nq), state);
                ok = worst_diff(via_hall, expect) < 1e-12 && worst_diff(via_hall2, expect) < 1e-12;
            }
            runner.record("hall and hall2 match the dense Hadamard tensor", ok);
        }

        {
            const int nq = std::max(2, a.nq - 1);
            const auto state = seeded_state(nq, a.common.seed, 0xcafe);
            const auto got = sharded_result(
                tr, nq,
                [&](const Topology& t, Transport& sub, Shard& s) { cphasek(1, 2, 3, s, t, sub); },
                state);
            bool ok = true;
            if (tr.rank() == 0) {
                const auto expect =
                    dense::matvec(dense::two_qubit_operator(nq, 1, 2, cphasek_gate(3)), state);
                ok = worst_diff(got, expect) < 1e-12;
            }
            runner.record("cphasek matches the dense diagonal", ok);
        }

        qft_checks(runner, tr, std::min(a.nq, 6), a.common.seed);

        {
            const int nq = 6;
            const auto cfg = GroverConfig::standard(nq, 13);
            bool ok = true;
            {
                auto sub = tr.split_contiguous(std::max(1, tr.size() / std::min(tr.size(), 1 << nq)));
                const auto t = Topology::flat(nq, sub->size(), sub->rank());
                const auto res = grover_run(cfg, t, *sub, {}, true);
                if (tr.rank() == 0) {
                    for (int it = 0; it <= cfg.n_t; ++it)
                        ok = ok && std::abs(res.trace[it] - dense::grover_closed_form(nq, it)) < 1e-10;
                }
            }
            runner.record("grover trace matches the closed form, nq=6", ok);
        }

        runner.finish();
    });
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qshard: a sharded state-vector quantum computer simulator"};
    app.require_subcommand(1);

    GroverArgs grover_args;
    auto* grover_cmd = app.add_subcommand("grover", "Run Grover's search");
    grover_cmd->add_option("--nq", grover_args.nq, "Qubit count")->check(CLI::Range(1, 30));
    grover_cmd->add_option("--marked", grover_args.marked, "Marked item index");
    add_common_flags(grover_cmd, grover_args.common);

    ShorArgs shor_args;
    auto* shor_cmd = app.add_subcommand("shor", "Run Shor's factoring");
    shor_cmd->add_option("--m", shor_args.m, "Number to factor");
    shor_cmd->add_option("--xguess", shor_args.xguess, "Coprime base (default: drawn from the seed)");
    shor_cmd->add_flag("--sample", shor_args.sample, "Sample the register-two outcome");
    add_common_flags(shor_cmd, shor_args.common);

    CheckArgs qft_args;
    auto* qft_cmd = app.add_subcommand("qft-check", "Verify the QFT against the dense DFT");
    qft_cmd->add_option("--nq", qft_args.nq, "Largest register size")->check(CLI::Range(1, 10));
    qft_cmd->add_flag("--inject-fault", qft_args.inject_fault, "Force a failure (test hook)")
        ->group("");
    add_common_flags(qft_cmd, qft_args.common);

    CheckArgs selftest_args;
    auto* selftest_cmd = app.add_subcommand("selftest", "Run the oracle-equivalence suites");
    selftest_cmd->add_option("--nq", selftest_args.nq, "Largest system size")->check(CLI::Range(2, 8));
    selftest_cmd->add_option("--reps", selftest_args.reps, "Random repetitions per check")
        ->check(CLI::PositiveNumber);
    selftest_cmd->add_flag("--inject-fault", selftest_args.inject_fault, "Force a failure (test hook)")
        ->group("");
    add_common_flags(selftest_cmd, selftest_args.common);

    try {
        app.parse(argc, argv);
        if (grover_cmd->parsed()) return cmd_grover(grover_args);
        if (shor_cmd->parsed()) return cmd_shor(shor_args);
        if (qft_cmd->parsed()) return cmd_qft_check(qft_args);
        if (selftest_cmd->parsed()) return cmd_selftest(selftest_args);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const CheckFailure&) {
        return 1;
    } catch (const InputError& e) {
        std::fprintf(stderr, "qshard: %s\n", e.what());
        return 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "qshard: %s\n", e.what());
        return 2;
    } catch (const IndexError& e) {
        std::fprintf(stderr, "qshard: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "qshard: %s\n", e.what());
        return 1;
    }
}
