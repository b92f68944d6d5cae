#include "cdec/core_ops.hpp"

#include <numbers>
#include <string>

namespace cdec {

double theta_next(double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) throw InvalidArgument("theta_next: theta must lie in (0, 1]");
    return 2.0 / (1.0 + std::sqrt(1.0 + 4.0 / (theta * theta)));
}

std::vector<double> theta_schedule(std::size_t count) {
    std::vector<double> out;
    out.reserve(count);
    double theta = 1.0;
    for (std::size_t k = 0; k < count; ++k) {
        out.push_back(theta);
        theta = theta_next(theta);
    }
    return out;
}

double log_cosh(double t) noexcept {
    const double a = std::abs(t);
    // Below 1 the large-argument form cancels; cosh a = 1 + 2 sinh^2(a/2) keeps full relative precision.
    if (a < 1.0) {
        const double s = std::sinh(0.5 * a);
        return std::log1p(2.0 * s * s);
    }
    return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

const char* to_string(LossKind kind) noexcept {
    return kind == LossKind::mse ? "mse" : "log-cosh";
}

LossKind loss_kind_from_string(const std::string& name) {
    if (name == "log-cosh" || name == "logcosh" || name == "log_cosh") return LossKind::log_cosh;
    if (name == "mse") return LossKind::mse;
    throw InvalidArgument("unknown loss '" + name + "' (expected log-cosh or mse)");
}

namespace {

void check_batch(const Matrix& predictions, const Matrix& targets, const char* op) {
    if (predictions.size() == 0) throw InvalidArgument(std::string(op) + ": empty batch");
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols())
        throw InvalidArgument(std::string(op) + ": prediction/target shape mismatch");
}

}  // namespace

double log_cosh_loss(const Matrix& predictions, const Matrix& targets) {
    check_batch(predictions, targets, "log_cosh_loss");
    double total = 0.0;
    for (Index j = 0; j < predictions.cols(); ++j) {
        double sample = 0.0;
        for (Index i = 0; i < predictions.rows(); ++i) sample += log_cosh(predictions(i, j) - targets(i, j));
        total += sample;
    }
    return total / static_cast<double>(predictions.cols());
}

double mse_loss(const Matrix& predictions, const Matrix& targets) {
    check_batch(predictions, targets, "mse_loss");
    double total = 0.0;
    for (Index j = 0; j < predictions.cols(); ++j) total += (predictions.col(j) - targets.col(j)).squaredNorm();
    return total / static_cast<double>(predictions.cols());
}

double loss_value(LossKind kind, const Matrix& predictions, const Matrix& targets) {
    return kind == LossKind::mse ? mse_loss(predictions, targets) : log_cosh_loss(predictions, targets);
}

Matrix loss_gradient(LossKind kind, const Matrix& predictions, const Matrix& targets) {
    check_batch(predictions, targets, "loss_gradient");
    const double scale = 1.0 / static_cast<double>(predictions.cols());
    if (kind == LossKind::mse) return (2.0 * scale) * (predictions - targets);
    return (predictions - targets).unaryExpr([scale](double r) { return scale * std::tanh(r); });
}

}  // namespace cdec
