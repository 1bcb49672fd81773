#include "scsmtt/consensus.hpp"

#include <algorithm>

namespace scsmtt {

Eigen::MatrixXd metropolis_weights(const NetworkGraph& graph) {
    if (!graph.connected()) {
        throw DisconnectedGraphError("metropolis_weights: graph is disconnected");
    }
    const auto n = static_cast<Eigen::Index>(graph.size());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j : graph.neighbors[static_cast<std::size_t>(i)]) {
            const auto dmax = std::max(graph.degree(static_cast<std::size_t>(i)), graph.degree(static_cast<std::size_t>(j)));
            w(i, j) = 1.0 / (1.0 + static_cast<double>(dmax));
        }
        w(i, i) = 1.0 - w.row(i).sum();
    }
    return w;
}

namespace {

void check_shapes(const NetworkGraph& graph, const AgentValues& values) {
    if (values.size() != graph.size()) {
        throw DimensionError("consensus: one value per agent required");
    }
    for (const auto& v : values) {
        require_same_dim(v.size(), values.front().size(), "consensus payload");
    }
}

} // namespace

AgentValues average_consensus(const NetworkGraph& graph, AgentValues values, int rounds) {
    check_shapes(graph, values);
    if (values.empty() || rounds <= 0) {
        return values;
    }
    const Eigen::MatrixXd w = metropolis_weights(graph);
    AgentValues next(values.size());
    for (int r = 0; r < rounds; ++r) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            next[i] = w(ii, ii) * values[i];
            for (int j : graph.neighbors[i]) {
                next[i] += w(ii, j) * values[static_cast<std::size_t>(j)];
            }
        }
        std::swap(values, next);
    }
    return values;
}

AgentValues sum_consensus(const NetworkGraph& graph, AgentValues values, int rounds) {
    auto avg = average_consensus(graph, std::move(values), rounds);
    const double s = static_cast<double>(graph.size());
    for (auto& v : avg) {
        v *= s;
    }
    return avg;
}

AgentValues max_consensus(const NetworkGraph& graph, AgentValues values, int rounds) {
    check_shapes(graph, values);
    auto less = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
    };
    for (int r = 0; r < rounds; ++r) {
        AgentValues next = values;
        for (std::size_t i = 0; i < values.size(); ++i) {
            for (int j : graph.neighbors[i]) {
                if (less(next[i], values[static_cast<std::size_t>(j)])) {
                    next[i] = values[static_cast<std::size_t>(j)];
                }
            }
        }
        values = std::move(next);
    }
    return values;
}

ConsensusNetwork::ConsensusNetwork(NetworkGraph graph, int average_rounds)
    : graph_(std::move(graph)), rounds_(average_rounds) {
    if (average_rounds < 0) {
        throw std::invalid_argument("ConsensusNetwork: negative round count");
    }
    if (!graph_.connected()) {
        throw DisconnectedGraphError("ConsensusNetwork: graph is disconnected");
    }
}

void ConsensusNetwork::tally(std::uint64_t rounds, std::uint64_t payload, TrafficKind kind) {
    counters_.invocations += 1;
    counters_.rounds += rounds;
    record(rounds * payload, kind);
}

void ConsensusNetwork::record(std::uint64_t reals_per_agent, TrafficKind kind) {
    if (kind == TrafficKind::belief) {
        counters_.belief_reals += reals_per_agent;
    } else {
        counters_.auxiliary_reals += reals_per_agent;
    }
}

AgentValues ConsensusNetwork::sum_and_agree(AgentValues values, TrafficKind kind) {
    const auto payload = values.empty() ? 0u : static_cast<std::uint64_t>(values.front().size());
    auto summed = sum_consensus(graph_, std::move(values), rounds_);
    auto agreed = max_consensus(graph_, std::move(summed), graph_.diameter);
    tally(static_cast<std::uint64_t>(rounds_ + graph_.diameter), payload, kind);
    return agreed;
}

AgentValues ConsensusNetwork::agree(AgentValues values, TrafficKind kind) {
    const auto payload = values.empty() ? 0u : static_cast<std::uint64_t>(values.front().size());
    auto agreed = max_consensus(graph_, std::move(values), graph_.diameter);
    tally(static_cast<std::uint64_t>(graph_.diameter), payload, kind);
    return agreed;
}

} // namespace scsmtt
