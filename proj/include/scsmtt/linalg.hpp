#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace scsmtt {

/// Largest state dimension handled by the fixed-capacity matrix types below.
inline constexpr int kMaxDim = 6;

using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
    if (a != b) {
        throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                             " vs " + std::to_string(b) + ")");
    }
}

[[nodiscard]] Matrix symmetrize(const Matrix& a);

/// Cholesky factor of the symmetrized matrix. If that fails, eps * I with
/// eps = 1e-9 * trace / d is added and the factorization retried once.
[[nodiscard]] Eigen::LLT<Matrix> robust_llt(const Matrix& a);

[[nodiscard]] double log_det(const Eigen::LLT<Matrix>& llt);

[[nodiscard]] Matrix inverse_spd(const Matrix& a);

/// Log of N(x; mean, cov).
[[nodiscard]] double log_gaussian_pdf(const Vector& x, const Vector& mean, const Matrix& cov);

/// Wraps an angle to (-pi, pi].
[[nodiscard]] double wrap_angle(double a);

} // namespace scsmtt
