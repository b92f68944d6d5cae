#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cdec/conic_solver.hpp"
#include "cdec/types.hpp"

namespace cdec {

// L unrolled solver iterations sharing one learnable analysis operator W.
// Step sizes, mu and the update form are fixed hyperparameters; only W learns.
class UnrolledDecoder {
public:
    UnrolledDecoder(int layers, Matrix W, Index measurements, double t1, double t2, double mu,
                    UpdateForm form = UpdateForm::conic);

    int layers() const noexcept { return layers_; }
    const Matrix& W() const noexcept { return W_; }
    Matrix& mutable_W() noexcept { return W_; }
    void set_W(Matrix W);

    Index N() const noexcept { return W_.rows(); }
    Index n() const noexcept { return W_.cols(); }
    Index m() const noexcept { return m_; }
    double t1() const noexcept { return t1_; }
    double t2() const noexcept { return t2_; }
    double mu() const noexcept { return mu_; }
    UpdateForm form() const noexcept { return form_; }
    const std::vector<double>& theta_schedule() const noexcept { return theta_; }

    Index parameter_count() const noexcept { return W_.size(); }

private:
    int layers_;
    Matrix W_;
    Index m_;
    double t1_, t2_, mu_;
    UpdateForm form_;
    std::vector<double> theta_;
};

// Cached quantities of one layer, for a batch of B columns.
struct LayerRecord {
    double theta = 1.0;
    Matrix z1, u1;  // N x B, state entering the layer
    Matrix z2, u2;  // m x B
    Matrix x;       // n x B, the layer's x-update
    Matrix p1;      // N x B, argument of the truncation
    Matrix p2;      // m x B, argument of the measurement shrinkage
};

struct ForwardTape {
    std::vector<LayerRecord> layers;
    Vector eps;
    Index N = 0, n = 0, m = 0, batch = 0;
};

struct ForwardResult {
    Matrix x_hat;  // n x B
    ForwardTape tape;
};

// Columns of Y / X0 / eps are independent samples. Without a tape only the
// output is produced.
ForwardResult forward(const UnrolledDecoder& decoder, const Matrix& A, const Matrix& Y, const Matrix& X0,
                      const Vector& eps, bool keep_tape = true);

Matrix forward_output(const UnrolledDecoder& decoder, const Matrix& A, const Matrix& Y, const Matrix& X0,
                      const Vector& eps);

struct DecoderGradient {
    Matrix W;   // d loss / d W, N x n
    Matrix x0;  // d loss / d X0, n x B
};

// Reverse pass through the unrolled graph given d loss / d x_hat (n x B).
// Threshold kinks get derivative 0.
DecoderGradient backward(const UnrolledDecoder& decoder, const Matrix& A, const ForwardTape& tape,
                         const Matrix& upstream);

struct DecoderSummary {
    int layers;
    Index N, n, m;
    Index parameters;
    double t1, t2, mu;
    UpdateForm form;
    std::vector<double> theta_schedule;
};

DecoderSummary describe(const UnrolledDecoder& decoder);
std::ostream& operator<<(std::ostream& out, const DecoderSummary& summary);

}  // namespace cdec
