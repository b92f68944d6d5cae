#include "cdec/continuation.hpp"

#include <string>

#include "cdec/errors.hpp"

namespace cdec {

double continuation_weight(int j) {
    if (j < 0) throw InvalidArgument("continuation_weight: j must be >= 0");
    return static_cast<double>(j) / static_cast<double>(j + 3);
}

namespace {

void check_steps(int steps) {
    if (steps < 1) throw InvalidArgument("continuation: need at least one step");
}

DivergenceError at_step(const DivergenceError& inner, int j) {
    return DivergenceError(std::string("continuation step ") + std::to_string(j) + ": " + inner.what(),
                           static_cast<std::size_t>(j));
}

}  // namespace

ContinuedSolveResult continued_solve(const SensingProblem& problem, const Matrix& W, const SolverConfig& config,
                                     int steps) {
    check_steps(steps);
    ContinuedSolveResult result;
    result.steps.reserve(static_cast<std::size_t>(steps));
    SensingProblem current = problem;
    Vector previous;
    for (int j = 0; j < steps; ++j) {
        try {
            result.steps.push_back(solve(current, W, config));
        } catch (const DivergenceError& e) {
            throw at_step(e, j);
        }
        const Vector& next = result.steps.back().x_hat;
        if (j == 0) previous = next;
        if (j + 1 < steps) current.x0 = next_initial_guess(j, previous, next);
        previous = next;
    }
    result.x_star = result.steps.back().x_hat;
    return result;
}

ContinuedForward continued_forward(const UnrolledDecoder& decoder, const Matrix& A, const Matrix& Y,
                                   const Matrix& X0, const Vector& eps, int steps, bool keep_tape) {
    check_steps(steps);
    ContinuedForward result;
    result.outputs.reserve(static_cast<std::size_t>(steps));
    if (keep_tape) result.tapes.reserve(static_cast<std::size_t>(steps));
    Matrix current = X0;
    for (int j = 0; j < steps; ++j) {
        ForwardResult step;
        try {
            step = forward(decoder, A, Y, current, eps, keep_tape);
        } catch (const DivergenceError& e) {
            throw at_step(e, j);
        }
        if (keep_tape) result.tapes.push_back(std::move(step.tape));
        result.outputs.push_back(std::move(step.x_hat));
        const Matrix& next = result.outputs.back();
        const Matrix& previous = j == 0 ? next : result.outputs[static_cast<std::size_t>(j) - 1];
        if (j + 1 < steps) current = next_initial_guess(j, previous, next);
    }
    result.x_hat = result.outputs.back();
    return result;
}

Matrix continued_output(const UnrolledDecoder& decoder, const Matrix& A, const Matrix& Y, const Matrix& X0,
                        const Vector& eps, int steps) {
    return continued_forward(decoder, A, Y, X0, eps, steps, false).x_hat;
}

DecoderGradient continued_backward(const UnrolledDecoder& decoder, const Matrix& A, const ContinuedForward& fwd,
                                   const Matrix& upstream) {
    const int steps = static_cast<int>(fwd.outputs.size());
    if (steps < 1 || fwd.tapes.size() != fwd.outputs.size())
        throw InvalidArgument("continued_backward: forward pass was run without a tape");

    // g_out[j] is the adjoint of the output of step j.
    std::vector<Matrix> g_out(static_cast<std::size_t>(steps));
    for (auto& g : g_out) g = Matrix::Zero(upstream.rows(), upstream.cols());
    g_out.back() = upstream;

    DecoderGradient total{Matrix::Zero(decoder.N(), decoder.n()), Matrix()};
    for (int j = steps - 1; j >= 0; --j) {
        const auto uj = static_cast<std::size_t>(j);
        DecoderGradient g = backward(decoder, A, fwd.tapes[uj], g_out[uj]);
        total.W += g.W;
        if (j == 0) {
            total.x0 = std::move(g.x0);
            break;
        }
        // Input of step j = (1 - w) out[j-2] + w out[j-1], with out[-1] standing for out[0].
        const double w = continuation_weight(j - 1);
        g_out[uj - 1] += w * g.x0;
        const std::size_t earlier = j >= 2 ? uj - 2 : 0;
        g_out[earlier] += (1.0 - w) * g.x0;
    }
    return total;
}

}  // namespace cdec
