#include "scsmtt/linalg.hpp"

namespace scsmtt {

Matrix symmetrize(const Matrix& a) {
    Matrix s = 0.5 * (a + a.transpose());
    return s;
}

Eigen::LLT<Matrix> robust_llt(const Matrix& a) {
    if (a.rows() != a.cols()) {
        throw DimensionError("robust_llt: matrix is not square");
    }
    Matrix s = symmetrize(a);
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() == Eigen::Success) {
        return llt;
    }
    const double eps = 1e-9 * s.trace() / static_cast<double>(s.rows());
    if (eps > 0.0 && std::isfinite(eps)) {
        s.diagonal().array() += eps;
        llt.compute(s);
        if (llt.info() == Eigen::Success) {
            return llt;
        }
    }
    throw NumericalError("robust_llt: matrix is not positive definite");
}

double log_det(const Eigen::LLT<Matrix>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Matrix inverse_spd(const Matrix& a) {
    auto llt = robust_llt(a);
    Matrix inv = llt.solve(Matrix::Identity(a.rows(), a.cols()));
    return symmetrize(inv);
}

double log_gaussian_pdf(const Vector& x, const Vector& mean, const Matrix& cov) {
    require_same_dim(x.size(), mean.size(), "log_gaussian_pdf");
    require_same_dim(x.size(), cov.rows(), "log_gaussian_pdf");
    auto llt = robust_llt(cov);
    Vector r = x - mean;
    Vector sol = llt.matrixL().solve(r);
    const double d = static_cast<double>(x.size());
    return -0.5 * (d * kLog2Pi + log_det(llt) + sol.squaredNorm());
}

double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::remainder(a, two_pi);
    if (w <= -std::numbers::pi) {
        w += two_pi;
    }
    return w;
}

} // namespace scsmtt
