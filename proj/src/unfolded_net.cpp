#include "cdec/unfolded_net.hpp"

#include <cmath>
#include <ostream>

#include "cdec/core_ops.hpp"
#include "cdec/errors.hpp"

namespace cdec {

UnrolledDecoder::UnrolledDecoder(int layers, Matrix W, Index measurements, double t1, double t2, double mu,
                                 UpdateForm form)
    : layers_(layers), W_(std::move(W)), m_(measurements), t1_(t1), t2_(t2), mu_(mu), form_(form) {
    if (layers_ < 1) throw InvalidArgument("decoder: need at least one layer");
    if (W_.size() == 0) throw InvalidArgument("decoder: empty analysis operator");
    if (m_ < 1) throw InvalidArgument("decoder: measurement dimension must be positive");
    if (!(t1_ > 0.0) || !(t2_ > 0.0) || !(mu_ > 0.0)) throw InvalidArgument("decoder: t1, t2, mu must be > 0");
    if (!W_.allFinite()) throw InvalidArgument("decoder: non-finite analysis operator");
    theta_ = cdec::theta_schedule(static_cast<std::size_t>(layers_));
}

void UnrolledDecoder::set_W(Matrix W) {
    if (W.rows() != W_.rows() || W.cols() != W_.cols()) throw InvalidArgument("decoder: W shape mismatch");
    W_ = std::move(W);
}

namespace {

void check_inputs(const UnrolledDecoder& d, const Matrix& A, const Matrix& Y, const Matrix& X0, const Vector& eps) {
    if (A.rows() != d.m() || A.cols() != d.n()) throw InvalidArgument("decoder: measurement matrix shape mismatch");
    if (Y.rows() != d.m()) throw InvalidArgument("decoder: measurements have wrong dimension");
    if (X0.rows() != d.n()) throw InvalidArgument("decoder: x0 has wrong dimension");
    if (X0.cols() != Y.cols() || eps.size() != Y.cols()) throw InvalidArgument("decoder: batch sizes disagree");
    if (Y.cols() == 0) throw InvalidArgument("decoder: empty batch");
}

// Column j shrunk by the Euclidean prox with threshold tau(j).
Matrix shrink_columns(const Matrix& P, const Vector& tau) {
    Matrix out(P.rows(), P.cols());
    for (Index j = 0; j < P.cols(); ++j) out.col(j) = shrink_euclidean(P.col(j), tau(j));
    return out;
}

Matrix soft_threshold_columns(const Matrix& P, const Vector& tau) {
    Matrix out(P.rows(), P.cols());
    for (Index j = 0; j < P.cols(); ++j) out.col(j) = soft_threshold(P.col(j), tau(j));
    return out;
}

}  // namespace

ForwardResult forward(const UnrolledDecoder& d, const Matrix& A, const Matrix& Y, const Matrix& X0,
                      const Vector& eps, bool keep_tape) {
    check_inputs(d, A, Y, X0, eps);
    const Matrix& W = d.W();
    const Index B = Y.cols();
    const bool conic = d.form() == UpdateForm::conic;

    Matrix z1 = Matrix::Zero(d.N(), B), u1 = Matrix::Zero(d.N(), B);
    Matrix z2 = Matrix::Zero(d.m(), B), u2 = Matrix::Zero(d.m(), B);
    Matrix X(d.n(), B), WX(d.N(), B), R(d.m(), B);

    ForwardResult result;
    if (keep_tape) {
        result.tape.layers.reserve(static_cast<std::size_t>(d.layers()));
        result.tape.eps = eps;
        result.tape.N = d.N();
        result.tape.n = d.n();
        result.tape.m = d.m();
        result.tape.batch = B;
    }
    for (int k = 0; k < d.layers(); ++k) {
        const double th = d.theta_schedule()[static_cast<std::size_t>(k)];
        const double s1 = d.t1() / th;
        const double s2 = d.t2() / th;

        const Matrix a1 = (1.0 - th) * u1 + th * z1;
        const Matrix a2 = (1.0 - th) * u2 + th * z2;
        X = X0 + (W.transpose() * a1 - A.transpose() * a2) / d.mu();
        if (!X.allFinite()) throw DivergenceError("decoder forward diverged", static_cast<std::size_t>(k));

        WX.noalias() = W * X;
        R = Y;
        R.noalias() -= A * X;
        Matrix P1, P2, z1n, z2n;
        if (conic) {
            P1 = z1 - s1 * WX;
            P2 = z2 - s2 * R;
            z1n = truncate(P1, 1.0);
            z2n = shrink_columns(P2, s2 * eps);
        } else {
            P1 = a1 - s1 * WX;
            P2 = a2 - s2 * R;
            z1n = truncate(P1, s1);
            z2n = soft_threshold_columns(P2, s2 * eps);
        }
        Matrix u1n = (1.0 - th) * u1 + th * z1n;
        Matrix u2n = (1.0 - th) * u2 + th * z2n;

        if (keep_tape) {
            LayerRecord rec;
            rec.theta = th;
            rec.z1 = std::move(z1);
            rec.u1 = std::move(u1);
            rec.z2 = std::move(z2);
            rec.u2 = std::move(u2);
            rec.x = X;
            rec.p1 = std::move(P1);
            rec.p2 = std::move(P2);
            result.tape.layers.push_back(std::move(rec));
        }
        z1 = std::move(z1n);
        u1 = std::move(u1n);
        z2 = std::move(z2n);
        u2 = std::move(u2n);
    }
    result.x_hat = std::move(X);
    return result;
}

Matrix forward_output(const UnrolledDecoder& d, const Matrix& A, const Matrix& Y, const Matrix& X0,
                      const Vector& eps) {
    return forward(d, A, Y, X0, eps, false).x_hat;
}

DecoderGradient backward(const UnrolledDecoder& d, const Matrix& A, const ForwardTape& tape, const Matrix& upstream) {
    if (tape.layers.size() != static_cast<std::size_t>(d.layers()) || tape.N != d.N() || tape.n != d.n() ||
        tape.m != d.m())
        throw InvalidArgument("backward: tape was not produced by this decoder");
    const Index B = tape.batch;
    if (upstream.rows() != d.n() || upstream.cols() != B) throw InvalidArgument("backward: upstream shape mismatch");
    if (A.rows() != d.m() || A.cols() != d.n()) throw InvalidArgument("backward: measurement matrix shape mismatch");

    const Matrix& W = d.W();
    const bool conic = d.form() == UpdateForm::conic;
    const double inv_mu = 1.0 / d.mu();

    DecoderGradient grad{Matrix::Zero(d.N(), d.n()), Matrix::Zero(d.n(), B)};
    // Adjoints of the state leaving the current layer.
    Matrix gz1 = Matrix::Zero(d.N(), B), gu1 = Matrix::Zero(d.N(), B);
    Matrix gz2 = Matrix::Zero(d.m(), B), gu2 = Matrix::Zero(d.m(), B);
    Matrix gx(d.n(), B), ga1(d.N(), B), ga2(d.m(), B);

    for (int k = d.layers() - 1; k >= 0; --k) {
        const LayerRecord& rec = tape.layers[static_cast<std::size_t>(k)];
        const double th = rec.theta;
        const double s1 = d.t1() / th;
        const double s2 = d.t2() / th;

        // z' feeds both the next layer and the averaged u'.
        const Matrix gz1_total = gz1 + th * gu1;
        const Matrix gz2_total = gz2 + th * gu2;

        const double radius = conic ? 1.0 : s1;
        const Matrix gp1 = (rec.p1.array().abs() < radius).select(gz1_total, 0.0);

        Matrix gp2(d.m(), B);
        for (Index j = 0; j < B; ++j) {
            const double tau = s2 * tape.eps(j);
            const auto p = rec.p2.col(j);
            const auto g = gz2_total.col(j);
            if (conic) {
                const double norm = p.norm();
                if (norm > tau) {
                    gp2.col(j) = (1.0 - tau / norm) * g + (tau * p.dot(g) / (norm * norm * norm)) * p;
                } else {
                    gp2.col(j).setZero();
                }
            } else {
                gp2.col(j) = (p.array().abs() > tau).select(g, 0.0);
            }
        }

        // p1 = b1 - s1 W x,  p2 = b2 - s2 (y - A x)
        if (k == d.layers() - 1) {
            gx = upstream;
        } else {
            gx.setZero();
        }
        gx.noalias() -= s1 * (W.transpose() * gp1);
        gx.noalias() += s2 * (A.transpose() * gp2);
        grad.W.noalias() -= s1 * (gp1 * rec.x.transpose());

        // x = x0 + (W^T a1 - A^T a2) / mu
        const Matrix a1 = (1.0 - th) * rec.u1 + th * rec.z1;
        grad.x0 += gx;
        grad.W.noalias() += inv_mu * (a1 * gx.transpose());
        ga1.noalias() = inv_mu * (W * gx);
        ga2.noalias() = -inv_mu * (A * gx);

        if (conic) {
            gu1 = (1.0 - th) * (gu1 + ga1);
            gz1 = th * ga1 + gp1;
            gu2 = (1.0 - th) * (gu2 + ga2);
            gz2 = th * ga2 + gp2;
        } else {
            ga1 += gp1;
            ga2 += gp2;
            gu1 = (1.0 - th) * (gu1 + ga1);
            gz1 = th * ga1;
            gu2 = (1.0 - th) * (gu2 + ga2);
            gz2 = th * ga2;
        }
    }
    return grad;
}

DecoderSummary describe(const UnrolledDecoder& d) {
    return {d.layers(), d.N(), d.n(), d.m(), d.parameter_count(), d.t1(), d.t2(), d.mu(), d.form(),
            d.theta_schedule()};
}

std::ostream& operator<<(std::ostream& out, const DecoderSummary& s) {
    out << "unrolled decoder: " << s.layers << " layers, W " << s.N << "x" << s.n << " (" << s.parameters
        << " parameters), m = " << s.m << "\n"
        << "  t1 = " << s.t1 << ", t2 = " << s.t2 << ", mu = " << s.mu << ", form = " << to_string(s.form) << "\n";
    for (std::size_t k = 0; k < s.theta_schedule.size(); ++k)
        out << "  layer " << k + 1 << ": theta = " << s.theta_schedule[k] << "\n";
    return out;
}

}  // namespace cdec
