#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "cdec/conic_solver.hpp"
#include "cdec/core_ops.hpp"
#include "cdec/errors.hpp"
#include "cdec/rng.hpp"
#include "toy_oracle.hpp"

using namespace cdec;

namespace {

SensingProblem random_problem(Index m, Index n, std::uint64_t seed, double eps_scale = 0.5) {
    auto engine = make_engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    SensingProblem p;
    p.A.resize(m, n);
    for (Index i = 0; i < p.A.size(); ++i) p.A(i) = normal(engine);
    p.y.resize(m);
    for (Index i = 0; i < m; ++i) p.y(i) = normal(engine);
    p.x0.resize(n);
    for (Index i = 0; i < n; ++i) p.x0(i) = normal(engine);
    p.eps = eps_scale * p.y.norm();
    return p;
}

Matrix random_matrix(Index r, Index c, std::uint64_t seed) {
    auto engine = make_engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix M(r, c);
    for (Index i = 0; i < M.size(); ++i) M(i) = normal(engine);
    return M;
}

}  // namespace

TEST(SolverInit, ZeroDualsAndUnitTheta) {
    const SensingProblem p = random_problem(3, 5, 1);
    const Matrix W = random_matrix(7, 5, 2);
    const SolverState s = solver_init(p, W);
    EXPECT_EQ(s.theta, 1.0);
    EXPECT_EQ(s.k, 0u);
    EXPECT_EQ(s.z1.size(), 7);
    EXPECT_EQ(s.z2.size(), 3);
    EXPECT_TRUE(s.z1.isZero(0.0));
    EXPECT_TRUE(s.z2.isZero(0.0));
    EXPECT_EQ(s.u1, s.z1);
    EXPECT_EQ(s.u2, s.z2);
    EXPECT_EQ(s.x, p.x0);
}

TEST(SolverInit, DimensionErrors) {
    const SensingProblem p = random_problem(3, 5, 1);
    EXPECT_THROW(solver_init(p, random_matrix(7, 4, 2)), InvalidArgument);
    EXPECT_THROW(solver_init(p, Matrix(0, 5)), InvalidArgument);
    SensingProblem empty;
    EXPECT_THROW(solver_init(empty, Matrix::Identity(2, 2)), InvalidArgument);
}

TEST(SolverStep, FirstStepReturnsX0) {
    for (UpdateForm form : {UpdateForm::conic, UpdateForm::as_printed}) {
        const SensingProblem p = random_problem(3, 6, 4);
        const Matrix W = random_matrix(9, 6, 5);
        SolverConfig c;
        c.form = form;
        SolverState s = solver_init(p, W);
        solver_step(s, p, W, c);
        EXPECT_EQ(s.x, p.x0);
        EXPECT_EQ(s.k, 1u);
        EXPECT_EQ(s.theta, theta_next(1.0));
    }
}

TEST(SolverStep, ZeroOperatorAndSlackConstraintKeepX0) {
    const SensingProblem base = random_problem(4, 6, 6);
    SensingProblem p = base;
    p.eps = 1e6;
    const Matrix W = Matrix::Zero(8, 6);
    for (UpdateForm form : {UpdateForm::conic, UpdateForm::as_printed}) {
        SolverConfig c;
        c.form = form;
        c.max_iters = 50;
        EXPECT_EQ(solve(p, W, c).x_hat, p.x0);
    }
}

TEST(SolverStep, ThetaFollowsTheRecursion) {
    const SensingProblem p = random_problem(3, 5, 7);
    const Matrix W = random_matrix(6, 5, 8);
    SolverConfig c;
    SolverState s = solver_init(p, W);
    const auto schedule = theta_schedule(30);
    for (int k = 0; k < 30; ++k) {
        EXPECT_EQ(s.theta, schedule[static_cast<std::size_t>(k)]);
        solver_step(s, p, W, c);
    }
}

TEST(SolverStep, TruncationBoundHoldsEveryIteration) {
    const SensingProblem p = random_problem(4, 8, 9);
    const Matrix W = random_matrix(12, 8, 10);
    const StepSizes t = default_step_sizes(W, p.A);
    for (UpdateForm form : {UpdateForm::conic, UpdateForm::as_printed}) {
        SolverConfig c;
        c.t1 = t.t1;
        c.t2 = t.t2;
        c.form = form;
        SolverState s = solver_init(p, W);
        for (int k = 0; k < 40; ++k) {
            const double bound = form == UpdateForm::conic ? 1.0 : c.t1 / s.theta;
            solver_step(s, p, W, c);
            EXPECT_LE(s.z1.lpNorm<Eigen::Infinity>(), bound) << "iteration " << k;
        }
    }
}

TEST(SolverStep, DivergenceCarriesIteration) {
    SensingProblem p = random_problem(3, 5, 11);
    const Matrix W = random_matrix(6, 5, 12);
    SolverConfig c;
    c.t1 = 1e300;
    c.t2 = 1e300;
    c.mu = 1e-300;
    c.max_iters = 100;
    try {
        solve(p, W, c);
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_LT(e.index(), 100u);
    }
}

TEST(SolverConfig, Validation) {
    SolverConfig c;
    c.t1 = 0.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = SolverConfig{};
    c.max_iters = 0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = SolverConfig{};
    c.rel_tol = -1.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    EXPECT_EQ(update_form_from_string("as-printed"), UpdateForm::as_printed);
    EXPECT_THROW(update_form_from_string("other"), InvalidArgument);
}

TEST(Solve, ExactIterationCountAndTrace) {
    const SensingProblem p = random_problem(3, 5, 13);
    const Matrix W = random_matrix(6, 5, 14);
    SolverConfig c;
    c.max_iters = 37;
    const SolveResult r = solve(p, W, c);
    EXPECT_EQ(r.iterations, 37u);
    ASSERT_EQ(r.trace.size(), 37u);
    EXPECT_TRUE(std::isnan(r.trace[0].rel_change));
    EXPECT_EQ(r.trace.back().iter, 36u);
    EXPECT_NEAR(r.trace.back().objective, objective(r.x_hat, W, c.mu, p.x0), 1e-15);

    std::ostringstream csv;
    write_trace_csv(csv, r.trace);
    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "iter,objective,feasibility_gap,rel_change");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 37);
}

TEST(Solve, RelativeToleranceStopsEarly) {
    const SensingProblem p = random_problem(3, 5, 15);
    const Matrix W = random_matrix(6, 5, 16);
    SolverConfig c;
    const StepSizes t = default_step_sizes(W, p.A);
    c.t1 = t.t1;
    c.t2 = t.t2;
    c.max_iters = 100000;
    c.rel_tol = 1e-6;
    const SolveResult r = solve(p, W, c);
    EXPECT_LT(r.iterations, 100000u);
    EXPECT_LT(r.trace.back().rel_change, 1e-6);
}

TEST(Solve, BitwiseDeterministic) {
    const SensingProblem p = random_problem(6, 10, 17);
    const Matrix W = random_matrix(20, 10, 18);
    SolverConfig c;
    const StepSizes t = default_step_sizes(W, p.A);
    c.t1 = t.t1;
    c.t2 = t.t2;
    c.max_iters = 200;
    const SolveResult a = solve(p, W, c), b = solve(p, W, c);
    EXPECT_EQ(a.x_hat, b.x_hat);
    for (std::size_t k = 0; k < a.trace.size(); ++k) EXPECT_EQ(a.trace[k].objective, b.trace[k].objective);
}

TEST(Objective, MatchesNaiveLoops) {
    const SensingProblem p = random_problem(4, 7, 19);
    const Matrix W = random_matrix(9, 7, 20);
    Vector x = random_matrix(7, 1, 21);
    double l1 = 0.0;
    for (Index i = 0; i < W.rows(); ++i) {
        double row = 0.0;
        for (Index j = 0; j < W.cols(); ++j) row += W(i, j) * x(j);
        l1 += std::abs(row);
    }
    double quad = 0.0;
    for (Index j = 0; j < x.size(); ++j) quad += (x(j) - p.x0(j)) * (x(j) - p.x0(j));
    EXPECT_NEAR(objective(x, W, 0.7, p.x0), l1 + 0.35 * quad, 1e-12);

    double res = 0.0;
    for (Index i = 0; i < p.A.rows(); ++i) {
        double r = p.y(i);
        for (Index j = 0; j < p.A.cols(); ++j) r -= p.A(i, j) * x(j);
        res += r * r;
    }
    EXPECT_NEAR(feasibility_gap(x, p.A, p.y, 0.1), std::max(0.0, std::sqrt(res) - 0.1), 1e-12);
    EXPECT_EQ(feasibility_gap(x, p.A, p.y, 1e9), 0.0);
    EXPECT_EQ(objective(p.x0, Matrix::Zero(9, 7), 3.0, p.x0), 0.0);
    EXPECT_THROW(objective(x, Matrix::Zero(9, 6), 1.0, p.x0), InvalidArgument);
    EXPECT_THROW(feasibility_gap(x, p.A, Vector::Zero(3), 0.1), InvalidArgument);
}

TEST(Solve, ToyProblemsMatchGridSearch) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const ToyInstance toy = make_toy_instance(seed);
        SolverConfig c;
        const StepSizes t = default_step_sizes(toy.W, toy.problem.A);
        c.t1 = t.t1;
        c.t2 = t.t2;
        c.mu = toy.mu;
        c.max_iters = 5000;
        c.record_trace = false;
        const Vector x = solve(toy.problem, toy.W, c).x_hat;
        const GridOptimum best = grid_optimum(toy);
        EXPECT_NEAR(objective(x, toy.W, toy.mu, toy.problem.x0), best.value, 1e-3) << "seed " << seed;
        EXPECT_LE(feasibility_gap(x, toy.problem.A, toy.problem.y, toy.problem.eps), 1e-3) << "seed " << seed;
    }
}

TEST(Solve, RecoversSparseSignals) {
    const Index n = 64, m = 32, s = 4;
    auto engine = make_engine(3);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix A(m, n);
    for (Index i = 0; i < A.size(); ++i) A(i) = normal(engine) / std::sqrt(static_cast<double>(m));
    for (int trial = 0; trial < 5; ++trial) {
        Vector x = Vector::Zero(n);
        for (Index k = 0; k < s; ++k) x((trial * 17 + k * 13) % n) = normal(engine);
        SensingProblem p{A, A * x, 0.0, Vector()};
        p.x0 = A.transpose() * p.y;
        SolverConfig c;
        c.mu = 0.2;
        const StepSizes t = default_step_sizes(Matrix::Identity(n, n), A, c.mu);
        c.t1 = t.t1;
        c.t2 = t.t2;
        c.max_iters = 20000;
        c.record_trace = false;
        const Vector xh = solve(p, Matrix::Identity(n, n), c).x_hat;
        EXPECT_LE((xh - x).norm() / x.norm(), 5e-2) << "trial " << trial;
    }
}

TEST(StepSizes, InverseSquaredSpectralNorms) {
    Matrix W = Matrix::Identity(3, 3) * 2.0;
    Matrix A = Matrix::Zero(2, 3);
    A(0, 0) = 0.5;
    const StepSizes t = default_step_sizes(W, A);
    EXPECT_NEAR(t.t1, 0.25, 1e-12);
    EXPECT_NEAR(t.t2, 4.0, 1e-12);
    EXPECT_EQ(default_step_sizes(Matrix::Zero(2, 2), A).t1, 1.0);
    const StepSizes scaled = default_step_sizes(W, A, 0.5);
    EXPECT_NEAR(scaled.t1, 0.125, 1e-12);
    EXPECT_NEAR(scaled.t2, 2.0, 1e-12);
    EXPECT_THROW(default_step_sizes(W, A, 0.0), InvalidArgument);
}
