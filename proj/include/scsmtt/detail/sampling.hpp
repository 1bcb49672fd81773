#pragma once

#include <random>

namespace scsmtt {

template <class Rng>
std::size_t sample_log_categorical(std::span<const double> log_weights, Rng& rng) {
    const double lse = log_sum_exp(log_weights);
    if (!std::isfinite(lse)) {
        throw NumericalError("sample_log_categorical: all weights are zero");
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < log_weights.size(); ++i) {
        const double p = std::exp(log_weights[i] - lse);
        if (p > 0.0) {
            last_positive = i;
        }
        acc += p;
        if (u < acc) {
            return i;
        }
    }
    return last_positive;
}

} // namespace scsmtt
