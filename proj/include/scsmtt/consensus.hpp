#pragma once

#include "scsmtt/scenario.hpp"

#include <cstdint>
#include <vector>

namespace scsmtt {

/// Reals transmitted by each agent, split by purpose.
struct CommCounters {
    /// Consensus payload traffic for beliefs and their normalization.
    std::uint64_t belief_reals = 0;
    /// Label diffusion and archive agreement traffic.
    std::uint64_t auxiliary_reals = 0;
    std::uint64_t invocations = 0;
    std::uint64_t rounds = 0;

    CommCounters& operator+=(const CommCounters& o) {
        belief_reals += o.belief_reals;
        auxiliary_reals += o.auxiliary_reals;
        invocations += o.invocations;
        rounds += o.rounds;
        return *this;
    }
};

enum class TrafficKind { belief, auxiliary };

/// Symmetric doubly stochastic weights W_ij = 1 / (1 + max(deg_i, deg_j)) on edges.
[[nodiscard]] Eigen::MatrixXd metropolis_weights(const NetworkGraph& graph);

using AgentValues = std::vector<Eigen::VectorXd>;

[[nodiscard]] AgentValues average_consensus(const NetworkGraph& graph, AgentValues values, int rounds);

[[nodiscard]] AgentValues sum_consensus(const NetworkGraph& graph, AgentValues values, int rounds);

/// Each round every agent keeps the lexicographically largest payload among itself and its neighbors.
[[nodiscard]] AgentValues max_consensus(const NetworkGraph& graph, AgentValues values, int rounds);

/// A graph with a fixed round budget that tallies what every consensus invocation transmits.
class ConsensusNetwork {
public:
    ConsensusNetwork(NetworkGraph graph, int average_rounds);

    /// Sum consensus followed by max-consensus over the graph diameter; all agents end bitwise equal.
    [[nodiscard]] AgentValues sum_and_agree(AgentValues values, TrafficKind kind = TrafficKind::belief);

    /// Max-consensus over the graph diameter.
    [[nodiscard]] AgentValues agree(AgentValues values, TrafficKind kind = TrafficKind::auxiliary);

    /// Records traffic that is exchanged alongside consensus rounds without its own iteration.
    void record(std::uint64_t reals_per_agent, TrafficKind kind);

    [[nodiscard]] const NetworkGraph& graph() const { return graph_; }
    [[nodiscard]] std::size_t agent_count() const { return graph_.size(); }
    [[nodiscard]] int average_rounds() const { return rounds_; }
    [[nodiscard]] const CommCounters& counters() const { return counters_; }
    void reset_counters() { counters_ = {}; }

private:
    void tally(std::uint64_t rounds, std::uint64_t payload, TrafficKind kind);

    NetworkGraph graph_;
    int rounds_;
    CommCounters counters_;
};

} // namespace scsmtt
