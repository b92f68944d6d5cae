#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "cdec/sensing.hpp"
#include "cdec/types.hpp"

namespace cdec {

// How the two dual updates are formed.
//
//  conic       z1 <- T_1(z1 - s1 W x),           z2 <- shrink_2(z2 - s2 (y - A x), s2 eps)
//  as_printed  z1 <- T_s1(a1 - s1 W x),          z2 <- S_{s2 eps}(a2 - s2 (y - A x))   (componentwise)
//
// with s_i = t_i / theta_k and a_i = (1 - theta_k) u_i + theta_k z_i. Both share the
// x-update, the u-averaging and the theta recursion. `conic` converges to the
// minimizer of the l2-constrained problem; `as_printed` moves from the averaged
// point with a step that grows like 1/theta_k and is only usable for a handful of
// iterations (e.g. as a shallow unrolled network).
enum class UpdateForm { conic, as_printed };

const char* to_string(UpdateForm form) noexcept;
UpdateForm update_form_from_string(const std::string& name);

struct SolverConfig {
    double t1 = 1.0;  // dual step for z1 (analysis coefficients)
    double t2 = 1.0;  // dual step for z2 (measurement residual)
    double mu = 1.0;
    int max_iters = 500;
    double rel_tol = 0.0;  // stop when ||x_k - x_{k-1}|| / max(1, ||x_{k-1}||) < rel_tol
    UpdateForm form = UpdateForm::conic;
    bool record_trace = true;

    void validate() const;
};

struct StepSizes {
    double t1;
    double t2;
};

// t1 = mu / sigma_max(W)^2, t2 = mu / sigma_max(A)^2 (a zero operator gets step mu).
// The dual gradient is 1/mu-Lipschitz in each block, hence the factor.
StepSizes default_step_sizes(const Matrix& W, const Matrix& A, double mu = 1.0);

struct SolverState {
    Vector x;
    Vector z1, z2;
    Vector u1, u2;
    double theta = 1.0;
    std::size_t k = 0;
};

SolverState solver_init(const SensingProblem& problem, const Matrix& W);

// One pass of the loop body: x-update, the two dual updates, the two
// averaging updates and the theta recursion, in that order.
void solver_step(SolverState& state, const SensingProblem& problem, const Matrix& W, const SolverConfig& config);

struct TraceRow {
    std::size_t iter = 0;
    double objective = 0.0;
    double feasibility_gap = 0.0;
    double rel_change = 0.0;  // NaN on the first iteration
};

struct SolveResult {
    Vector x_hat;
    std::vector<TraceRow> trace;
    std::size_t iterations = 0;
};

SolveResult solve(const SensingProblem& problem, const Matrix& W, const SolverConfig& config);

// ||W x||_1 + (mu/2) ||x - x0||^2
double objective(const Vector& x, const Matrix& W, double mu, const Vector& x0);

// max(0, ||y - A x||_2 - eps)
double feasibility_gap(const Vector& x, const Matrix& A, const Vector& y, double eps);

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

}  // namespace cdec
