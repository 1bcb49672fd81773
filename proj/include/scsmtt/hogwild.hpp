#pragma once

#include "scsmtt/consensus.hpp"
#include "scsmtt/gibbs.hpp"
#include "scsmtt/messages.hpp"

#include <map>
#include <ostream>

namespace scsmtt {

struct HogwildOptions {
    int rounds = 20;
    std::size_t top = 20;
    std::size_t max_components = kDefaultMaxComponents;
    double weight_floor = kDefaultWeightFloor;
    /// Archive keyed by component weight instead of the diffused label vector.
    bool distinct_weight_mode = false;
    /// When set, receives "round,agent,pt,label" rows.
    std::ostream* label_trace = nullptr;
    int pt_index = 0;
};

struct HogwildArchiveEntry {
    LabelVector labels;
    CanonicalInfo sums;
    double log_mass = kNegInf;
};

struct HogwildAgent {
    CanonicalTable table;
    int label = 0;
    double log_eta0 = 0.0;
    /// This agent's copy of the archive, keyed by label vector or by weight.
    std::map<LabelVector, HogwildArchiveEntry> archive;
};

struct HogwildState {
    std::vector<PreparedComponent> prior;
    std::vector<HogwildAgent> agents;
    double log_alpha_nonexist = kNegInf;
    /// Sum of log eta_s(0) after consensus; identical at all agents.
    double log_b0 = 0.0;
    int rounds_done = 0;

    [[nodiscard]] Eigen::Index dim() const { return prior.empty() ? 0 : prior.front().info.size(); }
};

/// Prepares the per-agent canonical tables. gammas holds one message per agent; agents that do
/// not observe the PT pass GammaMessage::unit().
[[nodiscard]] HogwildState make_hogwild_state(const PtBelief& alpha, std::span<const GammaMessage> gammas);

/// Initial label draw of one agent, weighted by the prior fused with each label alone.
[[nodiscard]] int hogwild_init(const HogwildState& state, std::size_t agent, std::mt19937_64& rng);

/// Log of the unnormalized conditional of agent s's label given network-wide sums.
[[nodiscard]] std::vector<double> hogwild_conditional_log_weights(const HogwildState& state,
                                                                  const CanonicalInfo& global, std::size_t agent);

/// One synchronous round: consensus on the current labels' sums, archiving, and a local resample
/// at every agent.
void hogwild_round(HogwildState& state, ConsensusNetwork& net, std::vector<std::mt19937_64>& rngs,
                   const HogwildOptions& options);

/// Consensus on log b0 followed by agreement on the archive digest.
void hogwild_finalize(HogwildState& state, ConsensusNetwork& net);

/// Normalized PT belief as materialized by one agent.
[[nodiscard]] PtBelief hogwild_agent_belief(const HogwildState& state, std::size_t agent,
                                            const HogwildOptions& options);

/// Full run: init, rounds, finalization. Returns every agent's belief.
[[nodiscard]] std::vector<PtBelief> hogwild_belief(HogwildState& state, ConsensusNetwork& net,
                                                   std::vector<std::mt19937_64>& rngs, const HogwildOptions& options);

/// Extrinsic PT message for agent s: the belief with agent s's likelihood removed, normalized.
/// Falls back to the normalized prior when nothing was archived.
[[nodiscard]] PtBelief extract_delta(const HogwildState& state, std::size_t agent, const PtBelief& alpha,
                                     const HogwildOptions& options);

} // namespace scsmtt
