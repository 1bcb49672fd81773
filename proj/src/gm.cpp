#include "scsmtt/gm.hpp"

#include <algorithm>
#include <numeric>

namespace scsmtt {

double ScaledGaussian::log_eval(const Vector& x) const {
    return log_weight + log_gaussian_pdf(x, mean, cov);
}

double GaussianMixture::log_total_weight() const {
    std::vector<double> lw;
    lw.reserve(components.size());
    for (const auto& c : components) {
        lw.push_back(c.log_weight);
    }
    return log_sum_exp(lw);
}

double GaussianMixture::log_eval(const Vector& x) const {
    std::vector<double> v;
    v.reserve(components.size());
    for (const auto& c : components) {
        v.push_back(c.log_eval(x));
    }
    return log_sum_exp(v);
}

Vector GaussianMixture::mean() const {
    if (components.empty()) {
        throw std::invalid_argument("GaussianMixture::mean: empty mixture");
    }
    const double lse = log_total_weight();
    Vector m = Vector::Zero(dim());
    for (const auto& c : components) {
        m += std::exp(c.log_weight - lse) * c.mean;
    }
    return m;
}

void GaussianMixture::scale_log(double delta) {
    for (auto& c : components) {
        c.log_weight += delta;
    }
}

void GaussianMixture::normalize() {
    if (components.empty()) {
        return;
    }
    const double lse = log_total_weight();
    if (!std::isfinite(lse)) {
        throw NumericalError("GaussianMixture::normalize: zero total weight");
    }
    scale_log(-lse);
}

double LikelihoodMessage::log_eval(const Vector& x) const {
    std::vector<double> v;
    v.reserve(terms.size() + 1);
    v.push_back(log_constant);
    for (const auto& t : terms) {
        v.push_back(t.log_u + log_gaussian_pdf(t.e, t.H * x, t.C));
    }
    return log_sum_exp(v);
}

CanonicalInfo CanonicalInfo::null(Eigen::Index d, double log_u0) {
    CanonicalInfo ci;
    ci.e_tilde = Vector::Zero(d);
    ci.C_tilde = Matrix::Zero(d, d);
    ci.c = log_u0;
    return ci;
}

CanonicalInfo& CanonicalInfo::operator+=(const CanonicalInfo& o) {
    e_tilde += o.e_tilde;
    C_tilde += o.C_tilde;
    c += o.c;
    return *this;
}

CanonicalInfo& CanonicalInfo::operator-=(const CanonicalInfo& o) {
    e_tilde -= o.e_tilde;
    C_tilde -= o.C_tilde;
    c -= o.c;
    return *this;
}

double log_sum_exp(std::span<const double> values) {
    if (values.empty()) {
        return kNegInf;
    }
    const double mx = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(mx)) {
        return mx;
    }
    double acc = 0.0;
    for (double v : values) {
        acc += std::exp(v - mx);
    }
    return mx + std::log(acc);
}

ScaledGaussian gaussian_product_pair(const ScaledGaussian& a, const ScaledGaussian& b) {
    require_same_dim(a.dim(), b.dim(), "gaussian_product_pair");
    const Matrix s = a.cov + b.cov;
    auto llt = robust_llt(s);
    ScaledGaussian out;
    out.log_weight = a.log_weight + b.log_weight + log_gaussian_pdf(a.mean, b.mean, s);
    const Matrix sa = llt.solve(a.cov);
    out.cov = symmetrize(b.cov * sa);
    out.mean = b.cov * llt.solve(a.mean) + a.cov * llt.solve(b.mean);
    return out;
}

CanonicalInfo canonicalize(const LikelihoodComponent& l) {
    require_same_dim(l.e.size(), l.H.rows(), "canonicalize");
    require_same_dim(l.e.size(), l.C.rows(), "canonicalize");
    auto llt = robust_llt(l.C);
    const Matrix a = llt.matrixL().solve(l.H);
    const Vector b = llt.matrixL().solve(l.e);
    CanonicalInfo ci;
    ci.C_tilde = symmetrize(a.transpose() * a);
    ci.e_tilde = a.transpose() * b;
    const double dz = static_cast<double>(l.e.size());
    ci.c = l.log_u - 0.5 * (dz * kLog2Pi + log_det(llt)) - 0.5 * b.squaredNorm();
    return ci;
}

PreparedComponent PreparedComponent::from(const ScaledGaussian& g) {
    auto llt = robust_llt(g.cov);
    PreparedComponent p;
    p.log_weight = g.log_weight;
    p.precision = symmetrize(llt.solve(Matrix::Identity(g.dim(), g.dim())));
    p.info = llt.solve(g.mean);
    p.quad = g.mean.dot(p.info);
    p.log_det_cov = log_det(llt);
    return p;
}

std::vector<PreparedComponent> prepare(const GaussianMixture& gm) {
    std::vector<PreparedComponent> out;
    out.reserve(gm.size());
    for (const auto& c : gm.components) {
        out.push_back(PreparedComponent::from(c));
    }
    return out;
}

namespace {

/// Fixed-size evaluation for the common state dimension; false when the Cholesky factorization
/// fails so the caller can retry with regularization.
template <int D>
bool fused_log_weight_fixed(const PreparedComponent& prior, const CanonicalInfo& info, double& out) {
    using M = Eigen::Matrix<double, D, D>;
    using V = Eigen::Matrix<double, D, 1>;
    const M p = prior.precision.template topLeftCorner<D, D>() + info.C_tilde.template topLeftCorner<D, D>();
    const Eigen::LLT<M> llt(p);
    if (llt.info() != Eigen::Success) {
        return false;
    }
    V half = prior.info.template head<D>() + info.e_tilde.template head<D>();
    llt.matrixL().solveInPlace(half);
    const double ld = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    out = prior.log_weight + info.c - 0.5 * prior.quad + 0.5 * half.squaredNorm() - 0.5 * (ld + prior.log_det_cov);
    return std::isfinite(out) || out == kNegInf;
}

} // namespace

double fused_log_weight(const PreparedComponent& prior, const CanonicalInfo& info) {
    require_same_dim(prior.info.size(), info.e_tilde.size(), "fused_log_weight");
    if (prior.log_weight == kNegInf || info.c == kNegInf) {
        return kNegInf;
    }
    if (prior.info.size() == 4) {
        double out = 0.0;
        if (fused_log_weight_fixed<4>(prior, info, out)) {
            return out;
        }
    }
    const Matrix post_precision = prior.precision + info.C_tilde;
    auto llt = robust_llt(post_precision);
    const Vector xi = prior.info + info.e_tilde;
    const Vector half = llt.matrixL().solve(xi);
    return prior.log_weight + info.c - 0.5 * prior.quad + 0.5 * half.squaredNorm() -
           0.5 * (log_det(llt) + prior.log_det_cov);
}

double fused_log_mass(std::span<const PreparedComponent> prior, const CanonicalInfo& info) {
    double buf[64];
    std::vector<double> heap;
    double* lw = buf;
    if (prior.size() > 64) {
        heap.resize(prior.size());
        lw = heap.data();
    }
    for (std::size_t j = 0; j < prior.size(); ++j) {
        try {
            lw[j] = fused_log_weight(prior[j], info);
        } catch (const NumericalError&) {
            lw[j] = kNegInf;
        }
    }
    return log_sum_exp(std::span<const double>(lw, prior.size()));
}

namespace {

std::vector<double> fused_log_mass_each_generic(std::span<const PreparedComponent> prior, const CanonicalInfo& base,
                                                std::span<const CanonicalInfo> entries) {
    std::vector<double> w(entries.size());
    CanonicalInfo cand = base;
    for (std::size_t q = 0; q < entries.size(); ++q) {
        cand.e_tilde = base.e_tilde + entries[q].e_tilde;
        cand.C_tilde = base.C_tilde + entries[q].C_tilde;
        cand.c = base.c + entries[q].c;
        w[q] = fused_log_mass(prior, cand);
    }
    return w;
}

/// Cholesky factorization of a small SPD matrix fused with the forward solve of xi. Returns the
/// squared norm of L^-1 xi and log det(L); false when a pivot is not positive.
template <int D>
bool small_cholesky_quad(const Eigen::Matrix<double, D, D>& a, const Eigen::Matrix<double, D, 1>& xi,
                         double& half_sq, double& log_det_half) {
    double l[D][D];
    double y[D];
    double diag_prod = 1.0;
    half_sq = 0.0;
    for (int j = 0; j < D; ++j) {
        double d = a(j, j);
        for (int k = 0; k < j; ++k) {
            d -= l[j][k] * l[j][k];
        }
        if (!(d > 0.0)) {
            return false;
        }
        const double ljj = std::sqrt(d);
        l[j][j] = ljj;
        diag_prod *= ljj;
        const double inv = 1.0 / ljj;
        for (int i = j + 1; i < D; ++i) {
            double v = a(i, j);
            for (int k = 0; k < j; ++k) {
                v -= l[i][k] * l[j][k];
            }
            l[i][j] = v * inv;
        }
        double r = xi(j);
        for (int k = 0; k < j; ++k) {
            r -= l[j][k] * y[k];
        }
        y[j] = r * inv;
        half_sq += y[j] * y[j];
    }
    log_det_half = std::log(diag_prod);
    return true;
}

template <int D>
std::vector<double> fused_log_mass_each_fixed(std::span<const PreparedComponent> prior, const CanonicalInfo& base,
                                              std::span<const CanonicalInfo> entries) {
    using M = Eigen::Matrix<double, D, D>;
    using V = Eigen::Matrix<double, D, 1>;
    struct Shifted {
        M a;
        V xi;
        double c;
    };
    std::vector<Shifted> shifted;
    shifted.reserve(prior.size());
    for (const auto& p : prior) {
        shifted.push_back({p.precision.template topLeftCorner<D, D>() + base.C_tilde.template topLeftCorner<D, D>(),
                           p.info.template head<D>() + base.e_tilde.template head<D>(),
                           p.log_weight + base.c - 0.5 * (p.quad + p.log_det_cov)});
    }
    std::vector<double> w(entries.size());
    std::vector<double> lw(prior.size());
    CanonicalInfo cand;
    for (std::size_t q = 0; q < entries.size(); ++q) {
        const auto& e = entries[q];
        const M ec = e.C_tilde.template topLeftCorner<D, D>();
        const V ee = e.e_tilde.template head<D>();
        for (std::size_t j = 0; j < prior.size(); ++j) {
            const auto& sh = shifted[j];
            if (prior[j].log_weight == kNegInf || e.c == kNegInf || base.c == kNegInf) {
                lw[j] = kNegInf;
                continue;
            }
            double v = kNegInf;
            double half_sq = 0.0, log_det_half = 0.0;
            if (small_cholesky_quad<D>(sh.a + ec, sh.xi + ee, half_sq, log_det_half)) {
                v = sh.c + e.c + 0.5 * half_sq - log_det_half;
            }
            if (!std::isfinite(v)) {
                cand.e_tilde = base.e_tilde + e.e_tilde;
                cand.C_tilde = base.C_tilde + e.C_tilde;
                cand.c = base.c + e.c;
                try {
                    v = fused_log_weight(prior[j], cand);
                } catch (const NumericalError&) {
                    v = kNegInf;
                }
            }
            lw[j] = v;
        }
        w[q] = log_sum_exp(lw);
    }
    return w;
}

} // namespace

std::vector<double> fused_log_mass_each(std::span<const PreparedComponent> prior, const CanonicalInfo& base,
                                        std::span<const CanonicalInfo> entries) {
    if (!prior.empty() && prior.front().info.size() == 4 && base.e_tilde.size() == 4) {
        return fused_log_mass_each_fixed<4>(prior, base, entries);
    }
    return fused_log_mass_each_generic(prior, base, entries);
}

ScaledGaussian fuse_prepared(const PreparedComponent& prior, const CanonicalInfo& info) {
    require_same_dim(prior.info.size(), info.e_tilde.size(), "fuse_prepared");
    const Matrix post_precision = prior.precision + info.C_tilde;
    auto llt = robust_llt(post_precision);
    const Vector xi = prior.info + info.e_tilde;
    ScaledGaussian out;
    out.cov = symmetrize(llt.solve(Matrix::Identity(xi.size(), xi.size())));
    out.mean = llt.solve(xi);
    const Vector half = llt.matrixL().solve(xi);
    if (prior.log_weight == kNegInf || info.c == kNegInf) {
        out.log_weight = kNegInf;
    } else {
        out.log_weight = prior.log_weight + info.c - 0.5 * prior.quad + 0.5 * half.squaredNorm() -
                         0.5 * (log_det(llt) + prior.log_det_cov);
    }
    return out;
}

ScaledGaussian fuse_prior_with_info(const ScaledGaussian& prior, const CanonicalInfo& info) {
    return fuse_prepared(PreparedComponent::from(prior), info);
}

ScaledGaussian moment_match(const GaussianMixture& gm) {
    if (gm.empty()) {
        throw NumericalError("moment_match: empty mixture");
    }
    const double lse = gm.log_total_weight();
    if (!std::isfinite(lse)) {
        throw NumericalError("moment_match: zero total weight");
    }
    const auto d = gm.dim();
    ScaledGaussian out;
    out.log_weight = lse;
    out.mean = Vector::Zero(d);
    for (const auto& c : gm.components) {
        require_same_dim(c.dim(), d, "moment_match");
        out.mean += std::exp(c.log_weight - lse) * c.mean;
    }
    out.cov = Matrix::Zero(d, d);
    for (const auto& c : gm.components) {
        const Vector diff = c.mean - out.mean;
        out.cov += std::exp(c.log_weight - lse) * (c.cov + diff * diff.transpose());
    }
    out.cov = symmetrize(out.cov);
    return out;
}

ScaledGaussian gaussian_fractional_power(const ScaledGaussian& g, int s_count) {
    if (s_count < 1) {
        throw std::invalid_argument("gaussian_fractional_power: s_count must be >= 1");
    }
    if (s_count == 1) {
        return g;
    }
    const double s = static_cast<double>(s_count);
    const double d = static_cast<double>(g.dim());
    const double ld = log_det(robust_llt(g.cov));
    const double ld_2pi = d * kLog2Pi + ld;
    ScaledGaussian out;
    out.mean = g.mean;
    out.cov = s * g.cov;
    out.log_weight = g.log_weight / s + 0.5 * (d * std::log(s) + ld_2pi) - ld_2pi / (2.0 * s);
    return out;
}

GaussianMixture gm_truncate(const GaussianMixture& gm, std::size_t max_components, double weight_floor) {
    if (max_components < 1) {
        throw std::invalid_argument("gm_truncate: max_components must be >= 1");
    }
    if (gm.empty()) {
        return gm;
    }
    std::vector<std::size_t> order(gm.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return gm.components[a].log_weight > gm.components[b].log_weight;
    });
    const double max_lw = gm.components[order.front()].log_weight;
    const double cutoff = weight_floor > 0.0 ? max_lw + std::log(weight_floor) : kNegInf;
    GaussianMixture out;
    for (std::size_t idx : order) {
        if (out.size() >= max_components) {
            break;
        }
        const double lw = gm.components[idx].log_weight;
        if (lw == kNegInf || lw < cutoff) {
            continue;
        }
        out.components.push_back(gm.components[idx]);
    }
    return out;
}

} // namespace scsmtt
