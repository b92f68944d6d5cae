#include "cdec/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cdec/errors.hpp"
#include "cdec/rng.hpp"

namespace cdec {

namespace {

bool all_finite(const Matrix& M) { return M.allFinite(); }

}  // namespace

void SensingProblem::validate() const {
    if (A.size() == 0) throw InvalidArgument("sensing problem: empty measurement matrix");
    if (y.size() != A.rows()) throw InvalidArgument("sensing problem: y has wrong length");
    if (x0.size() != A.cols()) throw InvalidArgument("sensing problem: x0 has wrong length");
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidArgument("sensing problem: eps must be finite and >= 0");
    if (!all_finite(A) || !y.allFinite() || !x0.allFinite())
        throw InvalidArgument("sensing problem: non-finite entries");
}

const char* to_string(Split split) noexcept {
    switch (split) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
    }
    return "?";
}

SensingProblem Dataset::problem(const Matrix& A, Index i) const {
    if (i < 0 || i >= count()) throw InvalidArgument("dataset: sample index out of range");
    return SensingProblem{A, y.col(i), eps(i), x0.col(i)};
}

Dataset Dataset::subset(Index first, Index n_samples) const {
    if (first < 0 || n_samples < 0 || first + n_samples > count())
        throw InvalidArgument("dataset: subset out of range");
    return Dataset{x.middleCols(first, n_samples), y.middleCols(first, n_samples),
                   eps.segment(first, n_samples), x0.middleCols(first, n_samples), split};
}

Dataset Dataset::columns(const std::vector<Index>& idx) const {
    const auto k = static_cast<Index>(idx.size());
    Dataset out{Matrix(n(), k), Matrix(m(), k), Vector(k), Matrix(n(), k), split};
    for (Index j = 0; j < k; ++j) {
        const Index i = idx[static_cast<std::size_t>(j)];
        if (i < 0 || i >= count()) throw InvalidArgument("dataset: column index out of range");
        out.x.col(j) = x.col(i);
        out.y.col(j) = y.col(i);
        out.eps(j) = eps(i);
        out.x0.col(j) = x0.col(i);
    }
    return out;
}

void Dataset::validate() const {
    if (y.cols() != x.cols() || x0.cols() != x.cols() || eps.size() != x.cols())
        throw InvalidArgument("dataset: sample counts disagree");
    if (x0.rows() != x.rows()) throw InvalidArgument("dataset: x0 dimension differs from x");
}

Matrix gaussian_measurement_matrix(Index m, Index n, std::uint64_t seed) {
    if (m <= 0 || n <= 0) throw InvalidArgument("gaussian_measurement_matrix: dimensions must be positive");
    if (m >= n) throw InvalidArgument("gaussian_measurement_matrix: need m < n");
    auto engine = make_engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    Matrix A(m, n);
    // Row-major fill so the draw order does not depend on storage order.
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < n; ++j) A(i, j) = normal(engine) * scale;
    return A;
}

Measurement measure(const Vector& x, const Matrix& A, double noise_std, std::uint64_t seed) {
    if (x.size() != A.cols()) throw InvalidArgument("measure: x length does not match A");
    if (!(noise_std >= 0.0)) throw InvalidArgument("measure: noise_std must be >= 0");
    Vector noise = Vector::Zero(A.rows());
    if (noise_std > 0.0) {
        auto engine = make_engine(seed);
        std::normal_distribution<double> normal(0.0, noise_std);
        for (Index i = 0; i < noise.size(); ++i) noise(i) = normal(engine);
    }
    Measurement out;
    out.y = A * x + noise;
    out.eps = (out.y - A * x).norm();
    return out;
}

Vector default_x0(const Matrix& A, const Vector& y) {
    if (y.size() != A.rows()) throw InvalidArgument("default_x0: y length does not match A");
    return A.transpose() * y;
}

Matrix init_analysis_operator(Index N, Index n, std::uint64_t seed, BetaParams params) {
    if (n <= 0) throw InvalidArgument("init_analysis_operator: n must be positive");
    if (N <= n) throw InvalidArgument("init_analysis_operator: need a redundant operator (N > n)");
    if (!(params.alpha > 0.0 && params.beta > 0.0))
        throw InvalidArgument("init_analysis_operator: Beta parameters must be positive");
    auto engine = make_engine(seed);
    std::gamma_distribution<double> ga(params.alpha, 1.0);
    std::gamma_distribution<double> gb(params.beta, 1.0);
    const double mean = params.alpha / (params.alpha + params.beta);
    const double scale = 1.0 / std::sqrt(static_cast<double>(N));
    Matrix W(N, n);
    for (Index i = 0; i < N; ++i)
        for (Index j = 0; j < n; ++j) {
            const double a = ga(engine);
            const double b = gb(engine);
            W(i, j) = (a / (a + b) - mean) * scale;
        }
    return W;
}

Dataset make_dataset(const Matrix& x, const Matrix& A, double noise_std, std::uint64_t seed, Split split) {
    if (x.rows() != A.cols()) throw InvalidArgument("make_dataset: signal dimension does not match A");
    Dataset d{x, Matrix(A.rows(), x.cols()), Vector(x.cols()), Matrix(A.cols(), x.cols()), split};
    for (Index i = 0; i < x.cols(); ++i) {
        const auto meas = measure(x.col(i), A, noise_std, derive_seed(seed, "noise", static_cast<std::uint64_t>(i)));
        d.y.col(i) = meas.y;
        d.eps(i) = meas.eps;
    }
    d.x0.noalias() = A.transpose() * d.y;
    return d;
}

Dataset synthetic_sparse_dataset(const Matrix& A, Index sparsity, Index count, double noise_std,
                                 std::uint64_t seed) {
    const Index n = A.cols();
    if (sparsity <= 0 || sparsity > n)
        throw InvalidArgument("synthetic_sparse_dataset: sparsity must lie in [1, n]");
    if (count < 0) throw InvalidArgument("synthetic_sparse_dataset: negative count");
    auto engine = make_engine(derive_seed(seed, "support"));
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix x = Matrix::Zero(n, count);
    std::vector<Index> positions(static_cast<std::size_t>(n));
    for (Index c = 0; c < count; ++c) {
        std::iota(positions.begin(), positions.end(), Index{0});
        // Partial Fisher-Yates: the first `sparsity` slots are a uniform random subset.
        for (Index k = 0; k < sparsity; ++k) {
            std::uniform_int_distribution<Index> pick(k, n - 1);
            std::swap(positions[static_cast<std::size_t>(k)], positions[static_cast<std::size_t>(pick(engine))]);
            double v = 0.0;
            while (v == 0.0) v = normal(engine);
            x(positions[static_cast<std::size_t>(k)], c) = v;
        }
    }
    return make_dataset(x, A, noise_std, derive_seed(seed, "measure"));
}

double spectral_norm_estimate(const Matrix& M, int iterations, double tol) {
    if (M.size() == 0) throw InvalidArgument("spectral_norm_estimate: empty matrix");
    if (M.isZero(0.0)) return 0.0;
    // Fixed pseudo-random start; an all-ones start can be orthogonal to the top singular vector.
    auto engine = make_engine(0x5eedULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(M.cols());
    for (Index i = 0; i < v.size(); ++i) v(i) = normal(engine);
    v.normalize();
    double estimate = 0.0;
    for (int it = 0; it < std::max(iterations, 1); ++it) {
        Vector w = M.transpose() * (M * v);
        const double norm = w.norm();
        if (norm == 0.0) break;
        const double next = std::sqrt(v.dot(w));  // Rayleigh quotient of M^T M
        v = w / norm;
        const bool done = std::abs(next - estimate) <= tol * next;
        estimate = next;
        if (done) break;
    }
    return estimate;
}

}  // namespace cdec
