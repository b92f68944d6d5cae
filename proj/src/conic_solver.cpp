#include "cdec/conic_solver.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "cdec/core_ops.hpp"
#include "cdec/errors.hpp"

namespace cdec {

const char* to_string(UpdateForm form) noexcept { return form == UpdateForm::as_printed ? "as-printed" : "conic"; }

UpdateForm update_form_from_string(const std::string& name) {
    if (name == "conic") return UpdateForm::conic;
    if (name == "as-printed" || name == "as_printed") return UpdateForm::as_printed;
    throw InvalidArgument("unknown update form '" + name + "' (expected conic or as-printed)");
}

void SolverConfig::validate() const {
    if (!(t1 > 0.0) || !(t2 > 0.0) || !(mu > 0.0)) throw InvalidArgument("solver config: t1, t2, mu must be > 0");
    if (max_iters < 1) throw InvalidArgument("solver config: max_iters must be >= 1");
    if (!(rel_tol >= 0.0)) throw InvalidArgument("solver config: rel_tol must be >= 0");
}

StepSizes default_step_sizes(const Matrix& W, const Matrix& A, double mu) {
    if (!(mu > 0.0)) throw InvalidArgument("default_step_sizes: mu must be > 0");
    auto step = [mu](const Matrix& M) {
        const double s = spectral_norm_estimate(M);
        return s > 0.0 ? mu / (s * s) : mu;
    };
    return {step(W), step(A)};
}

namespace {

void check_dims(const SensingProblem& problem, const Matrix& W) {
    problem.validate();
    if (W.cols() != problem.n()) throw InvalidArgument("solver: W has wrong number of columns");
    if (W.rows() == 0) throw InvalidArgument("solver: W has no rows");
}

}  // namespace

SolverState solver_init(const SensingProblem& problem, const Matrix& W) {
    check_dims(problem, W);
    SolverState s;
    s.x = problem.x0;
    s.z1 = Vector::Zero(W.rows());
    s.z2 = Vector::Zero(problem.m());
    s.u1 = s.z1;
    s.u2 = s.z2;
    s.theta = 1.0;
    s.k = 0;
    return s;
}

void solver_step(SolverState& s, const SensingProblem& problem, const Matrix& W, const SolverConfig& config) {
    const Matrix& A = problem.A;
    if (s.z1.size() != W.rows() || s.z2.size() != A.rows() || s.x.size() != A.cols())
        throw InvalidArgument("solver_step: state does not match the problem dimensions");
    const double th = s.theta;
    const double s1 = config.t1 / th;
    const double s2 = config.t2 / th;

    const Vector a1 = (1.0 - th) * s.u1 + th * s.z1;
    const Vector a2 = (1.0 - th) * s.u2 + th * s.z2;
    s.x = problem.x0 + (W.transpose() * a1 - A.transpose() * a2) / config.mu;

    const Vector Wx = W * s.x;
    const Vector residual = problem.y - A * s.x;
    if (config.form == UpdateForm::conic) {
        s.z1 = truncate(s.z1 - s1 * Wx, 1.0);
        s.z2 = shrink_euclidean(s.z2 - s2 * residual, s2 * problem.eps);
    } else {
        s.z1 = truncate(a1 - s1 * Wx, s1);
        s.z2 = soft_threshold(a2 - s2 * residual, s2 * problem.eps);
    }
    s.u1 = (1.0 - th) * s.u1 + th * s.z1;
    s.u2 = (1.0 - th) * s.u2 + th * s.z2;

    if (!s.x.allFinite() || !s.z1.allFinite() || !s.z2.allFinite())
        throw DivergenceError("solver diverged", s.k);
    s.theta = theta_next(th);
    ++s.k;
}

SolveResult solve(const SensingProblem& problem, const Matrix& W, const SolverConfig& config) {
    config.validate();
    SolverState state = solver_init(problem, W);
    SolveResult result;
    if (config.record_trace) result.trace.reserve(static_cast<std::size_t>(config.max_iters));
    Vector previous;
    for (int it = 0; it < config.max_iters; ++it) {
        solver_step(state, problem, W, config);
        double rel_change = std::numeric_limits<double>::quiet_NaN();
        if (it > 0) rel_change = (state.x - previous).norm() / std::max(1.0, previous.norm());
        if (config.record_trace)
            result.trace.push_back({static_cast<std::size_t>(it), objective(state.x, W, config.mu, problem.x0),
                                    feasibility_gap(state.x, problem.A, problem.y, problem.eps), rel_change});
        ++result.iterations;
        if (it > 0 && rel_change < config.rel_tol) break;
        previous = state.x;
    }
    result.x_hat = std::move(state.x);
    return result;
}

double objective(const Vector& x, const Matrix& W, double mu, const Vector& x0) {
    if (W.cols() != x.size() || x0.size() != x.size()) throw InvalidArgument("objective: dimension mismatch");
    return (W * x).lpNorm<1>() + 0.5 * mu * (x - x0).squaredNorm();
}

double feasibility_gap(const Vector& x, const Matrix& A, const Vector& y, double eps) {
    if (A.cols() != x.size() || A.rows() != y.size()) throw InvalidArgument("feasibility_gap: dimension mismatch");
    return std::max(0.0, (y - A * x).norm() - eps);
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
    out << "iter,objective,feasibility_gap,rel_change\n";
    out << std::setprecision(17);
    for (const auto& row : trace)
        out << row.iter << ',' << row.objective << ',' << row.feasibility_gap << ',' << row.rel_change << '\n';
}

}  // namespace cdec
