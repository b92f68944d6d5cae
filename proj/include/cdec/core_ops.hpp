#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cdec/errors.hpp"
#include "cdec/types.hpp"

namespace cdec {

// sgn(0) = 0, which keeps both thresholding maps continuous at the origin.
inline double sgn(double x) noexcept { return static_cast<double>((x > 0.0) - (x < 0.0)); }

// S_tau(x) = sgn(x) max(0, |x| - tau)
inline double soft_threshold(double x, double tau) noexcept {
    return sgn(x) * std::max(0.0, std::abs(x) - tau);
}

// T_tau(x) = sgn(x) min(|x|, tau)
inline double truncate(double x, double tau) noexcept { return sgn(x) * std::min(std::abs(x), tau); }

namespace detail {
inline void require_threshold(double tau, const char* op) {
    if (!(tau >= 0.0) || !std::isfinite(tau))
        throw InvalidArgument(std::string(op) + ": threshold must be finite and >= 0");
}
}  // namespace detail

template <class Derived>
typename Derived::PlainObject soft_threshold(const Eigen::MatrixBase<Derived>& x, double tau) {
    detail::require_threshold(tau, "soft_threshold");
    return x.unaryExpr([tau](double v) { return soft_threshold(v, tau); });
}

template <class Derived>
typename Derived::PlainObject truncate(const Eigen::MatrixBase<Derived>& x, double tau) {
    detail::require_threshold(tau, "truncate");
    return x.unaryExpr([tau](double v) { return truncate(v, tau); });
}

// Euclidean shrinkage v * max(0, 1 - tau / ||v||): the proximal map of tau ||.||_2.
// Zero stays zero.
template <class Derived>
typename Derived::PlainObject shrink_euclidean(const Eigen::MatrixBase<Derived>& v, double tau) {
    detail::require_threshold(tau, "shrink_euclidean");
    const double norm = v.norm();
    if (norm <= tau) return Derived::PlainObject::Zero(v.rows(), v.cols());
    return (1.0 - tau / norm) * v;
}

// One step of the Nesterov-type recursion theta <- 2 / (1 + sqrt(1 + 4 / theta^2)).
double theta_next(double theta);

// theta_0 .. theta_{count-1}, starting from theta_0 = 1.
std::vector<double> theta_schedule(std::size_t count);

// log cosh t without overflow: |t| + log1p(exp(-2|t|)) - log 2 for |t| >= 1,
// log1p(2 sinh^2(t/2)) below that.
double log_cosh(double t) noexcept;

enum class LossKind { log_cosh, mse };

const char* to_string(LossKind kind) noexcept;
LossKind loss_kind_from_string(const std::string& name);

// Batch losses. Columns are samples: each sample's residual is reduced by
// summing over components, then the batch is averaged over samples.
double log_cosh_loss(const Matrix& predictions, const Matrix& targets);
double mse_loss(const Matrix& predictions, const Matrix& targets);
double loss_value(LossKind kind, const Matrix& predictions, const Matrix& targets);

// d(loss)/d(predictions), same shape as predictions.
Matrix loss_gradient(LossKind kind, const Matrix& predictions, const Matrix& targets);

}  // namespace cdec
