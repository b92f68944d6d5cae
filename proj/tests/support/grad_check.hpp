#pragma once

// Finite-difference checks of the decoder gradient, shared by the unit and
// acceptance suites.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "cdec/continuation.hpp"
#include "cdec/core_ops.hpp"
#include "cdec/rng.hpp"
#include "cdec/sensing.hpp"
#include "cdec/unfolded_net.hpp"

struct GradCase {
    cdec::Matrix A;
    cdec::Matrix Y;
    cdec::Matrix X0;
    cdec::Vector eps;
    cdec::Matrix target;
};

inline GradCase make_grad_case(cdec::Index n, cdec::Index m, cdec::Index batch, std::uint64_t seed) {
    auto engine = cdec::make_engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    GradCase c;
    c.A.resize(m, n);
    for (cdec::Index i = 0; i < c.A.size(); ++i) c.A(i) = normal(engine) / std::sqrt(static_cast<double>(m));
    c.target.resize(n, batch);
    for (cdec::Index i = 0; i < c.target.size(); ++i) c.target(i) = normal(engine);
    c.Y = c.A * c.target;
    for (cdec::Index i = 0; i < c.Y.size(); ++i) c.Y(i) += 0.05 * normal(engine);
    c.eps = (c.Y - c.A * c.target).colwise().norm().transpose();
    c.X0 = c.A.transpose() * c.Y;
    return c;
}

// Smallest distance of any thresholded argument to its kink, over all layers and steps.
inline double kink_margin(const cdec::UnrolledDecoder& d, const cdec::ContinuedForward& fwd) {
    double margin = INFINITY;
    for (const auto& tape : fwd.tapes)
        for (const auto& rec : tape.layers) {
            const double s1 = d.t1() / rec.theta;
            const double s2 = d.t2() / rec.theta;
            const double r1 = d.form() == cdec::UpdateForm::conic ? 1.0 : s1;
            margin = std::min(margin, (rec.p1.array().abs() - r1).abs().minCoeff());
            for (cdec::Index j = 0; j < rec.p2.cols(); ++j) {
                const double tau = s2 * tape.eps(j);
                if (d.form() == cdec::UpdateForm::conic) {
                    margin = std::min(margin, std::abs(rec.p2.col(j).norm() - tau));
                } else {
                    margin = std::min(margin, (rec.p2.col(j).array().abs() - tau).abs().minCoeff());
                }
            }
        }
    return margin;
}

inline double case_loss(const cdec::UnrolledDecoder& d, const GradCase& c, int steps) {
    const cdec::Matrix out = cdec::continued_output(d, c.A, c.Y, c.X0, c.eps, steps);
    return cdec::log_cosh_loss(out, c.target);
}

struct GradCheckResult {
    double relative_error = INFINITY;  // ||analytic - fd|| / ||fd|| over the probed entries
    double max_entry_error = INFINITY;
    double margin = 0.0;
    int entries = 0;
};

// Central differences with step h on `entries` random entries of W.
inline GradCheckResult check_gradient(cdec::UnrolledDecoder d, const GradCase& c, int steps, int entries,
                                      std::uint64_t seed, double h = 1e-6) {
    GradCheckResult r;
    const auto fwd = cdec::continued_forward(d, c.A, c.Y, c.X0, c.eps, steps);
    r.margin = kink_margin(d, fwd);
    const cdec::Matrix upstream = cdec::loss_gradient(cdec::LossKind::log_cosh, fwd.x_hat, c.target);
    const cdec::Matrix g = cdec::continued_backward(d, c.A, fwd, upstream).W;
    auto engine = cdec::make_engine(seed);
    std::uniform_int_distribution<cdec::Index> row(0, d.N() - 1), col(0, d.n() - 1);
    double diff2 = 0.0, ref2 = 0.0, worst = 0.0;
    for (int e = 0; e < entries; ++e) {
        const cdec::Index i = row(engine), j = col(engine);
        const double w = d.W()(i, j);
        d.mutable_W()(i, j) = w + h;
        const double up = case_loss(d, c, steps);
        d.mutable_W()(i, j) = w - h;
        const double down = case_loss(d, c, steps);
        d.mutable_W()(i, j) = w;
        const double fd = (up - down) / (2.0 * h);
        diff2 += (g(i, j) - fd) * (g(i, j) - fd);
        ref2 += fd * fd;
        worst = std::max(worst, std::abs(g(i, j) - fd));
    }
    r.entries = entries;
    r.relative_error = std::sqrt(diff2) / std::max(std::sqrt(ref2), 1e-300);
    r.max_entry_error = worst;
    return r;
}
