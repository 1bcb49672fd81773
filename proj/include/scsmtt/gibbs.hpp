#pragma once

#include "scsmtt/gm.hpp"

#include <map>
#include <random>
#include <span>
#include <vector>

namespace scsmtt {

/// One label per likelihood message; label 0 selects the message's constant term.
using LabelVector = std::vector<int>;

/// Canonical parameters of every label of one likelihood message. Entry 0 is the constant term.
struct CanonicalTable {
    std::vector<CanonicalInfo> entries;

    [[nodiscard]] std::size_t label_count() const { return entries.size(); }
};

[[nodiscard]] CanonicalTable canonical_table(const LikelihoodMessage& msg, Eigen::Index dim);

struct ArchivedSample {
    CanonicalInfo sums;
    /// log of sum_j w^(j,i), the label vector's total product mass.
    double log_mass = kNegInf;
};

struct GibbsOptions {
    int iterations = 20;
    std::size_t top = 20;
    std::size_t max_components = kDefaultMaxComponents;
    double weight_floor = kDefaultWeightFloor;
};

struct GibbsProductState {
    std::vector<PreparedComponent> prior;
    std::vector<CanonicalTable> tables;
    LabelVector labels;
    CanonicalInfo sums;
    std::map<LabelVector, ArchivedSample> archive;

    [[nodiscard]] std::size_t likelihood_count() const { return tables.size(); }
    [[nodiscard]] Eigen::Index dim() const { return prior.empty() ? 0 : prior.front().info.size(); }
};

[[nodiscard]] GibbsProductState make_gibbs_state(const GaussianMixture& prior,
                                                 std::span<const LikelihoodMessage> likelihoods);

/// Canonical sums of a label vector, computed from scratch.
[[nodiscard]] CanonicalInfo label_sums(const GibbsProductState& state, const LabelVector& labels);

/// Same as label_sums but with likelihood `excluded` left out.
[[nodiscard]] CanonicalInfo label_sums_without(const GibbsProductState& state, const LabelVector& labels,
                                               std::size_t excluded);

/// Log of the initial label weights of likelihood l: log sum_j of the prior fused with each label alone.
[[nodiscard]] std::vector<double> init_label_log_weights(const GibbsProductState& state, std::size_t l);

/// Log of the unnormalized conditional of label l given the other current labels.
[[nodiscard]] std::vector<double> conditional_log_weights(const GibbsProductState& state, std::size_t l);

/// Samples every label independently from its initial weights, commits them and archives the result.
LabelVector gibbs_init_labels(GibbsProductState& state, std::mt19937_64& rng);

/// One systematic scan over all likelihoods, archiving the label vector after each update.
void gibbs_sweep(GibbsProductState& state, std::mt19937_64& rng);

/// Archived label vectors ordered by decreasing mass, ties in lexicographic label order.
[[nodiscard]] std::vector<const std::pair<const LabelVector, ArchivedSample>*> ranked_archive(
    const GibbsProductState& state);

/// Product components of the given label vectors against every prior component.
[[nodiscard]] GaussianMixture materialize_labels(const GibbsProductState& state,
                                                 std::span<const LabelVector> labels);

/// Top-ranked archived labels materialized and truncated. With no likelihoods this is the prior.
[[nodiscard]] GaussianMixture gibbs_materialize(const GibbsProductState& state, const GibbsOptions& options);

/// Product of the prior with every likelihood except `excluded`, built from the distinct
/// leave-one-out label vectors of the highest-mass archived samples. Unnormalized.
/// Returns an empty mixture when the archive is empty.
[[nodiscard]] GaussianMixture leave_one_out_mixture(const GibbsProductState& state, std::size_t excluded,
                                                    const GibbsOptions& options);

[[nodiscard]] GaussianMixture gibbs_product(const GaussianMixture& prior,
                                            std::span<const LikelihoodMessage> likelihoods,
                                            const GibbsOptions& options, std::mt19937_64& rng);

/// Runs init plus the configured sweeps on an existing state.
void gibbs_run(GibbsProductState& state, const GibbsOptions& options, std::mt19937_64& rng);

} // namespace scsmtt
