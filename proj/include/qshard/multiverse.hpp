#pragma once

#include <cstdio>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "qshard/grover.hpp"
#include "qshard/rng.hpp"
#include "qshard/wigner.hpp"

namespace qshard {

enum class NoiseKind { OneQubit, TwoQubit };

/// One unitary noise intrusion: a Wigner rotation on qhit (or the pair
/// qhit/qhit2) injected at algorithm checkpoint eloc.
struct NoiseEvent {
    NoiseKind kind = NoiseKind::OneQubit;
    int qhit = 1;
    int qhit2 = 0; // second struck qubit, two-qubit kind only
    int eloc = 0;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

using NoisePlan = std::vector<NoiseEvent>;

struct MultiverseConfig {
    int group_count = 1;
    std::vector<double> weights; // empty = uniform
    std::uint64_t seed = 0;
    int intrusions = 1; // noise events per noisy group
    NoiseKind kind = NoiseKind::OneQubit;
    const std::vector<NoisePlan>* replay = nullptr; // per-group plans to replay instead of drawing

    std::vector<double> effective_weights() const {
        if (weights.empty())
            return std::vector<double>(group_count, 1.0 / static_cast<double>(group_count));
        if (static_cast<int>(weights.size()) != group_count)
            throw ConfigError("multiverse: weight count != group count");
        double sum = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw ConfigError("multiverse: negative group weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("multiverse: weights must sum to 1");
        return weights;
    }
};

/// Noise realization for one group. Group 0 always gets an empty plan; the
/// draws for group g come from random stream (seed, g), so a plan depends
/// only on (seed, group_id, nq, injection_points), never on the rank count.
inline NoisePlan draw_noise_plan(int group_id, std::uint64_t seed, int nq, int injection_points,
                                 int intrusions, NoiseKind kind = NoiseKind::OneQubit) {
    if (group_id == 0) return {};
    if (nq < 1) throw InputError("draw_noise_plan: need at least one qubit");
    if (injection_points < 1) throw InputError("draw_noise_plan: need at least one injection point");
    Rng rng(seed, static_cast<std::uint64_t>(group_id));
    NoisePlan plan;
    plan.reserve(intrusions);
    for (int i = 0; i < intrusions; ++i) {
        NoiseEvent e;
        e.kind = kind;
        e.qhit = 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(nq)));
        if (kind == NoiseKind::TwoQubit) {
            if (nq < 2) throw InputError("draw_noise_plan: two-qubit noise needs two qubits");
            e.qhit2 = 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(nq - 1)));
            if (e.qhit2 >= e.qhit) ++e.qhit2; // uniform over pairs with qhit2 != qhit
        }
        e.eloc = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(injection_points)));
        e.alpha = rng.uniform(0.0, 2.0 * std::numbers::pi);
        e.beta = rng.uniform(0.0, std::numbers::pi);
        e.gamma = 0.0;
        plan.push_back(e);
    }
    return plan;
}

/// Apply every event of `plan` scheduled at checkpoint eloc.
inline void apply_noise(const NoisePlan& plan, int eloc, Shard& s, const Topology& t, Transport& tr) {
    for (const NoiseEvent& e : plan) {
        if (e.eloc != eloc) continue;
        if (e.kind == NoiseKind::OneQubit)
            one_op(e.qhit, wigner_d2(e.alpha, e.beta, e.gamma), s, t, tr);
        else
            two_op(e.qhit, e.qhit2, wigner_d4(e.alpha, e.beta, e.gamma), s, t, tr);
    }
}

inline NoiseHook noise_hook_for(const NoisePlan& plan) {
    if (plan.empty()) return {};
    return [&plan](int eloc, Shard& s, const Topology& t, Transport& tr) {
        apply_noise(plan, eloc, s, t, tr);
    };
}

// ---------------------------------------------------------------------------
// Plan text format, one event per line:
//   group kind qhit eloc alpha beta gamma
// kind is "one" or "two"; a two-qubit hit is written "qhit:qhit2".
// ---------------------------------------------------------------------------

inline void dump_noise_plans(std::ostream& os, const std::vector<NoisePlan>& per_group) {
    char line[160];
    for (std::size_t g = 0; g < per_group.size(); ++g)
        for (const NoiseEvent& e : per_group[g]) {
            if (e.kind == NoiseKind::OneQubit)
                std::snprintf(line, sizeof line, "%zu one %d %d %.17g %.17g %.17g\n", g, e.qhit,
                              e.eloc, e.alpha, e.beta, e.gamma);
            else
                std::snprintf(line, sizeof line, "%zu two %d:%d %d %.17g %.17g %.17g\n", g, e.qhit,
                              e.qhit2, e.eloc, e.alpha, e.beta, e.gamma);
            os << line;
        }
}

inline std::vector<NoisePlan> parse_noise_plans(std::istream& is, int group_count) {
    std::vector<NoisePlan> plans(group_count);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        int group = -1;
        std::string kind, hit;
        NoiseEvent e;
        if (!(fields >> group >> kind >> hit >> e.eloc >> e.alpha >> e.beta >> e.gamma))
            throw InputError("noise plan line " + std::to_string(lineno) + ": malformed");
        if (group < 0 || group >= group_count)
            throw InputError("noise plan line " + std::to_string(lineno) + ": group out of range");
        if (group == 0) throw InputError("noise plan line " + std::to_string(lineno) +
                                         ": group 0 must stay noiseless");
        if (kind == "one") {
            e.kind = NoiseKind::OneQubit;
            e.qhit = std::stoi(hit);
        } else if (kind == "two") {
            e.kind = NoiseKind::TwoQubit;
            const auto colon = hit.find(':');
            if (colon == std::string::npos)
                throw InputError("noise plan line " + std::to_string(lineno) + ": two-qubit hit needs a:b");
            e.qhit = std::stoi(hit.substr(0, colon));
            e.qhit2 = std::stoi(hit.substr(colon + 1));
        } else {
            throw InputError("noise plan line " + std::to_string(lineno) + ": unknown kind " + kind);
        }
        plans[group].push_back(e);
    }
    return plans;
}

// ---------------------------------------------------------------------------
// Concurrent noisy replicas.
// ---------------------------------------------------------------------------

/// This rank's slice of its group's final state, plus the shared weights.
struct MultiverseResult {
    Topology group_topology;
    Shard state;
    std::vector<double> weights;
    NoisePlan plan;
};

/// The algorithm body run inside each group: produce the group's final state
/// using the group-scoped topology/transport, injecting `noise` at the
/// declared checkpoints.
using GroupAlgorithm =
    std::function<Shard(const Topology& group_topo, Transport& group_tr, const NoiseHook& noise)>;

/// Split the communicator into config.group_count multiverses and run the
/// algorithm independently in each; group 0 runs noiseless, every other group
/// applies its own drawn (or replayed) plan. No message crosses a group
/// boundary here — the only cross-group traffic in a full run is the later
/// density-matrix assembly.
inline MultiverseResult run_multiverse(const GroupAlgorithm& algorithm, const MultiverseConfig& config,
                                       int injection_points, const Topology& t, Transport& tr) {
    if (config.group_count < 1 || t.nranks() % config.group_count != 0)
        throw ConfigError("run_multiverse: group count must divide rank count");
    MultiverseResult res;
    res.weights = config.effective_weights();
    res.group_topology = t.split(config.group_count);
    auto group_tr = tr.split_contiguous(config.group_count);

    if (config.replay != nullptr) {
        if (static_cast<int>(config.replay->size()) != config.group_count)
            throw ConfigError("run_multiverse: replay plan group count mismatch");
        res.plan = (*config.replay)[res.group_topology.group_id];
    } else
        res.plan = draw_noise_plan(res.group_topology.group_id, config.seed, t.nq, injection_points,
                                   config.intrusions, config.kind);
    res.state = algorithm(res.group_topology, *group_tr, noise_hook_for(res.plan));
    return res;
}

} // namespace qshard
