#include "scsmtt/gibbs.hpp"

#include <algorithm>
#include <set>

namespace scsmtt {

CanonicalTable canonical_table(const LikelihoodMessage& msg, Eigen::Index dim) {
    CanonicalTable t;
    t.entries.reserve(msg.size() + 1);
    t.entries.push_back(CanonicalInfo::null(dim, msg.log_constant));
    for (const auto& term : msg.terms) {
        require_same_dim(term.H.cols(), dim, "canonical_table");
        t.entries.push_back(canonicalize(term));
    }
    return t;
}

GibbsProductState make_gibbs_state(const GaussianMixture& prior, std::span<const LikelihoodMessage> likelihoods) {
    if (prior.empty()) {
        throw std::invalid_argument("make_gibbs_state: empty prior");
    }
    GibbsProductState st;
    st.prior = prepare(prior);
    const auto d = prior.dim();
    st.tables.reserve(likelihoods.size());
    for (const auto& msg : likelihoods) {
        st.tables.push_back(canonical_table(msg, d));
    }
    st.labels.assign(likelihoods.size(), 0);
    st.sums = label_sums(st, st.labels);
    return st;
}

CanonicalInfo label_sums(const GibbsProductState& state, const LabelVector& labels) {
    return label_sums_without(state, labels, labels.size());
}

CanonicalInfo label_sums_without(const GibbsProductState& state, const LabelVector& labels, std::size_t excluded) {
    require_same_dim(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(state.tables.size()),
                     "label_sums");
    CanonicalInfo s = CanonicalInfo::null(state.dim());
    for (std::size_t l = 0; l < labels.size(); ++l) {
        if (l == excluded) {
            continue;
        }
        s += state.tables[l].entries.at(static_cast<std::size_t>(labels[l]));
    }
    return s;
}

std::vector<double> init_label_log_weights(const GibbsProductState& state, std::size_t l) {
    const auto& table = state.tables.at(l);
    std::vector<double> w(table.label_count());
    for (std::size_t q = 0; q < w.size(); ++q) {
        w[q] = fused_log_mass(state.prior, table.entries[q]);
    }
    return w;
}

std::vector<double> conditional_log_weights(const GibbsProductState& state, std::size_t l) {
    const auto& table = state.tables.at(l);
    CanonicalInfo base = state.sums;
    base -= table.entries[static_cast<std::size_t>(state.labels[l])];
    return fused_log_mass_each(state.prior, base, table.entries);
}

namespace {

void commit(GibbsProductState& state, std::size_t l, int q, double log_mass) {
    const auto& table = state.tables[l];
    state.sums -= table.entries[static_cast<std::size_t>(state.labels[l])];
    state.sums += table.entries[static_cast<std::size_t>(q)];
    state.labels[l] = q;
    state.archive.try_emplace(state.labels, ArchivedSample{state.sums, log_mass});
}

} // namespace

LabelVector gibbs_init_labels(GibbsProductState& state, std::mt19937_64& rng) {
    for (std::size_t l = 0; l < state.tables.size(); ++l) {
        const auto w = init_label_log_weights(state, l);
        state.labels[l] = static_cast<int>(sample_log_categorical(std::span<const double>(w), rng));
    }
    state.sums = label_sums(state, state.labels);
    state.archive.try_emplace(state.labels, ArchivedSample{state.sums, fused_log_mass(state.prior, state.sums)});
    return state.labels;
}

void gibbs_sweep(GibbsProductState& state, std::mt19937_64& rng) {
    for (std::size_t l = 0; l < state.tables.size(); ++l) {
        const auto w = conditional_log_weights(state, l);
        const auto q = sample_log_categorical(std::span<const double>(w), rng);
        commit(state, l, static_cast<int>(q), w[q]);
    }
}

void gibbs_run(GibbsProductState& state, const GibbsOptions& options, std::mt19937_64& rng) {
    if (options.iterations < 1) {
        throw std::invalid_argument("gibbs_run: iterations must be >= 1");
    }
    if (state.tables.empty()) {
        return;
    }
    gibbs_init_labels(state, rng);
    for (int it = 0; it < options.iterations; ++it) {
        gibbs_sweep(state, rng);
    }
}

std::vector<const std::pair<const LabelVector, ArchivedSample>*> ranked_archive(const GibbsProductState& state) {
    std::vector<const std::pair<const LabelVector, ArchivedSample>*> out;
    out.reserve(state.archive.size());
    for (const auto& kv : state.archive) {
        out.push_back(&kv);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](auto* a, auto* b) { return a->second.log_mass > b->second.log_mass; });
    return out;
}

namespace {

void append_components(const GibbsProductState& state, const CanonicalInfo& sums, GaussianMixture& out) {
    for (const auto& p : state.prior) {
        try {
            auto g = fuse_prepared(p, sums);
            if (g.log_weight != kNegInf) {
                out.components.push_back(std::move(g));
            }
        } catch (const NumericalError&) {
            // Ill-conditioned fusion: the component is dropped.
        }
    }
}

} // namespace

GaussianMixture materialize_labels(const GibbsProductState& state, std::span<const LabelVector> labels) {
    GaussianMixture out;
    for (const auto& lv : labels) {
        append_components(state, label_sums(state, lv), out);
    }
    return out;
}

GaussianMixture gibbs_materialize(const GibbsProductState& state, const GibbsOptions& options) {
    GaussianMixture out;
    if (state.tables.empty()) {
        append_components(state, CanonicalInfo::null(state.dim()), out);
        return out;
    }
    const auto ranked = ranked_archive(state);
    const std::size_t n = std::min(options.top, ranked.size());
    for (std::size_t i = 0; i < n; ++i) {
        append_components(state, label_sums(state, ranked[i]->first), out);
    }
    return gm_truncate(out, options.max_components, options.weight_floor);
}

GaussianMixture leave_one_out_mixture(const GibbsProductState& state, std::size_t excluded,
                                      const GibbsOptions& options) {
    GaussianMixture out;
    if (state.archive.empty()) {
        return out;
    }
    std::set<LabelVector> seen;
    for (const auto* kv : ranked_archive(state)) {
        if (seen.size() >= options.top) {
            break;
        }
        LabelVector key = kv->first;
        key.at(excluded) = -1;
        if (!seen.insert(key).second) {
            continue;
        }
        append_components(state, label_sums_without(state, kv->first, excluded), out);
    }
    return gm_truncate(out, options.max_components, options.weight_floor);
}

GaussianMixture gibbs_product(const GaussianMixture& prior, std::span<const LikelihoodMessage> likelihoods,
                              const GibbsOptions& options, std::mt19937_64& rng) {
    if (likelihoods.empty()) {
        return prior;
    }
    auto state = make_gibbs_state(prior, likelihoods);
    gibbs_run(state, options, rng);
    return gibbs_materialize(state, options);
}

} // namespace scsmtt
