#pragma once

#include <vector>

#include "cdec/conic_solver.hpp"
#include "cdec/sensing.hpp"
#include "cdec/unfolded_net.hpp"

namespace cdec {

// Extrapolation weight j / (j + 3) of the warm-start update.
double continuation_weight(int j);

// Warm start for step j+1 from the reconstructions of steps j and j+1:
//   x0 <- prev + w_j (next - prev).
// At j = 0 there is no earlier reconstruction; the first solve stands in for it,
// so the second step starts from the first solution.
template <typename M>
M next_initial_guess(int j, const M& previous, const M& next) {
    return previous + continuation_weight(j) * (next - previous);
}

struct ContinuedSolveResult {
    Vector x_star;
    std::vector<SolveResult> steps;  // one inner solve per continuation step
};

// J warm-started runs of the model-based solver, each with `config.max_iters`
// iterations. Only y, A, eps and the initial guess of `problem` are read.
ContinuedSolveResult continued_solve(const SensingProblem& problem, const Matrix& W, const SolverConfig& config,
                                     int steps);

struct ContinuedForward {
    Matrix x_hat;                    // n x B, output of the last step
    std::vector<Matrix> outputs;     // per-step reconstructions, length J
    std::vector<ForwardTape> tapes;  // empty unless requested
};

// The unfolded decoder wrapped in J warm-start steps (batched over columns).
ContinuedForward continued_forward(const UnrolledDecoder& decoder, const Matrix& A, const Matrix& Y,
                                   const Matrix& X0, const Vector& eps, int steps, bool keep_tape = true);

Matrix continued_output(const UnrolledDecoder& decoder, const Matrix& A, const Matrix& Y, const Matrix& X0,
                        const Vector& eps, int steps);

// Reverse pass through all J steps and the warm-start arithmetic between them.
// The x0 adjoint refers to the initial guess fed to the first step.
DecoderGradient continued_backward(const UnrolledDecoder& decoder, const Matrix& A, const ContinuedForward& forward,
                                   const Matrix& upstream);

}  // namespace cdec
