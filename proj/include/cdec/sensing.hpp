#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cdec/types.hpp"

namespace cdec {

// The data of one conic reconstruction problem
//   min ||W x||_1 + (mu/2) ||x - x0||^2  s.t.  ||y - A x||_2 <= eps
// minus W and mu, which belong to the solver / decoder.
struct SensingProblem {
    Matrix A;  // m x n, m < n
    Vector y;
    double eps = 0.0;
    Vector x0;

    Index m() const { return A.rows(); }
    Index n() const { return A.cols(); }
    void validate() const;
};

enum class Split { train, validation, test };
const char* to_string(Split split) noexcept;

// Column-paired samples: x.col(i), y.col(i), eps(i), x0.col(i) belong together.
// eps and x0 are computed once from the realized noise and frozen.
struct Dataset {
    Matrix x;   // n x count
    Matrix y;   // m x count
    Vector eps; // count
    Matrix x0;  // n x count
    Split split = Split::train;

    Index n() const { return x.rows(); }
    Index m() const { return y.rows(); }
    Index count() const { return x.cols(); }
    bool empty() const { return x.cols() == 0; }

    SensingProblem problem(const Matrix& A, Index i) const;
    Dataset subset(Index first, Index count) const;
    Dataset columns(const std::vector<Index>& idx) const;
    void validate() const;
};

// Gaussian ensemble with entries N(0,1)/sqrt(m).
Matrix gaussian_measurement_matrix(Index m, Index n, std::uint64_t seed);

struct Measurement {
    Vector y;
    double eps = 0.0;  // ||y - A x||_2 of the realized noise
};

Measurement measure(const Vector& x, const Matrix& A, double noise_std, std::uint64_t seed);

// x0 = A^T y
Vector default_x0(const Matrix& A, const Vector& y);

struct BetaParams {
    double alpha = 2.0;
    double beta = 2.0;
};

// Redundant analysis operator, N x n with N > n. Entries i.i.d. Beta(alpha, beta),
// shifted to zero mean and scaled by 1/sqrt(N).
Matrix init_analysis_operator(Index N, Index n, std::uint64_t seed, BetaParams params = {});

// Measures every column of `x` with independent noise; fills y, eps and x0.
Dataset make_dataset(const Matrix& x, const Matrix& A, double noise_std, std::uint64_t seed,
                     Split split = Split::train);

// `count` signals, each with exactly `sparsity` standard-normal nonzeros at
// uniformly random positions, measured through A.
Dataset synthetic_sparse_dataset(const Matrix& A, Index sparsity, Index count, double noise_std,
                                 std::uint64_t seed);

// Largest singular value by power iteration on M^T M. Stops when the relative
// change of the estimate drops below tol or after `iterations` rounds.
double spectral_norm_estimate(const Matrix& M, int iterations = 1000, double tol = 1e-12);

}  // namespace cdec
