#pragma once

#include "scsmtt/linalg.hpp"

#include <span>
#include <vector>

namespace scsmtt {

/// c * N(x; mean, cov), with the scale held as log c.
struct ScaledGaussian {
    double log_weight = 0.0;
    Vector mean;
    Matrix cov;

    [[nodiscard]] Eigen::Index dim() const { return mean.size(); }
    [[nodiscard]] double weight() const { return std::exp(log_weight); }
    /// Log of the scaled density at x.
    [[nodiscard]] double log_eval(const Vector& x) const;
};

struct GaussianMixture {
    std::vector<ScaledGaussian> components;

    [[nodiscard]] bool empty() const { return components.empty(); }
    [[nodiscard]] std::size_t size() const { return components.size(); }
    [[nodiscard]] Eigen::Index dim() const { return components.empty() ? 0 : components.front().dim(); }
    [[nodiscard]] double log_total_weight() const;
    [[nodiscard]] double total_weight() const { return std::exp(log_total_weight()); }
    [[nodiscard]] double log_eval(const Vector& x) const;
    /// Weighted mean of the mixture, normalized by the total weight.
    [[nodiscard]] Vector mean() const;
    /// Adds delta to every log weight.
    void scale_log(double delta);
    /// Rescales so the weights sum to one. Leaves an empty mixture untouched.
    void normalize();
};

/// u * N(e; H x, C), a Gaussian likelihood term over x.
struct LikelihoodComponent {
    double log_u = 0.0;
    Vector e;
    Matrix H;
    Matrix C;
};

/// Information-form summary of a likelihood term: exp(c) * exp(x' e_tilde - x' C_tilde x / 2).
struct CanonicalInfo {
    Vector e_tilde;
    Matrix C_tilde;
    double c = 0.0;

    [[nodiscard]] static CanonicalInfo null(Eigen::Index d, double log_u0 = 0.0);
    CanonicalInfo& operator+=(const CanonicalInfo& o);
    CanonicalInfo& operator-=(const CanonicalInfo& o);
};

/// A likelihood message: constant term exp(log_constant) plus a sum of Gaussian terms.
struct LikelihoodMessage {
    double log_constant = kNegInf;
    std::vector<LikelihoodComponent> terms;

    [[nodiscard]] std::size_t size() const { return terms.size(); }
    /// Log of the message evaluated at x.
    [[nodiscard]] double log_eval(const Vector& x) const;
    [[nodiscard]] static LikelihoodMessage unit() {
        LikelihoodMessage m;
        m.log_constant = 0.0;
        return m;
    }
};

[[nodiscard]] double log_sum_exp(std::span<const double> values);

[[nodiscard]] ScaledGaussian gaussian_product_pair(const ScaledGaussian& a, const ScaledGaussian& b);

[[nodiscard]] CanonicalInfo canonicalize(const LikelihoodComponent& l);

[[nodiscard]] ScaledGaussian fuse_prior_with_info(const ScaledGaussian& prior, const CanonicalInfo& info);

[[nodiscard]] ScaledGaussian moment_match(const GaussianMixture& gm);

[[nodiscard]] ScaledGaussian gaussian_fractional_power(const ScaledGaussian& g, int s_count);

inline constexpr std::size_t kDefaultMaxComponents = 20;
inline constexpr double kDefaultWeightFloor = 1e-6;

[[nodiscard]] GaussianMixture gm_truncate(const GaussianMixture& gm,
                                          std::size_t max_components = kDefaultMaxComponents,
                                          double weight_floor = kDefaultWeightFloor);

/// Prior component in information form, cached for repeated fusion in sampler inner loops.
struct PreparedComponent {
    double log_weight = 0.0;
    Matrix precision;
    Vector info;
    double quad = 0.0;
    double log_det_cov = 0.0;

    [[nodiscard]] static PreparedComponent from(const ScaledGaussian& g);
};

[[nodiscard]] std::vector<PreparedComponent> prepare(const GaussianMixture& gm);

/// Log weight of fuse_prior_with_info(prior, info) without forming the posterior moments.
[[nodiscard]] double fused_log_weight(const PreparedComponent& prior, const CanonicalInfo& info);

/// log sum_j of fused_log_weight over all prior components.
[[nodiscard]] double fused_log_mass(std::span<const PreparedComponent> prior, const CanonicalInfo& info);

/// fused_log_mass(prior, base + entries[q]) for every q.
[[nodiscard]] std::vector<double> fused_log_mass_each(std::span<const PreparedComponent> prior,
                                                      const CanonicalInfo& base,
                                                      std::span<const CanonicalInfo> entries);

[[nodiscard]] ScaledGaussian fuse_prepared(const PreparedComponent& prior, const CanonicalInfo& info);

/// Draws an index with probability proportional to exp(log_weights[i]).
template <class Rng>
std::size_t sample_log_categorical(std::span<const double> log_weights, Rng& rng);

} // namespace scsmtt

#include "scsmtt/detail/sampling.hpp"
