#pragma once

// Two-dimensional instances of the constrained problem and a brute-force
// minimizer over a grid, used as an independent oracle for the solver.

#include <cmath>
#include <limits>
#include <random>

#include "cdec/conic_solver.hpp"
#include "cdec/rng.hpp"

struct ToyInstance {
    cdec::SensingProblem problem;
    cdec::Matrix W;
    double mu = 1.0;
};

inline ToyInstance make_toy_instance(std::uint64_t seed) {
    auto engine = cdec::make_engine(cdec::derive_seed(seed, "toy"));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    ToyInstance t;
    t.problem.A.resize(2, 2);
    t.W.resize(2, 2);
    for (int i = 0; i < 4; ++i) t.problem.A(i) = normal(engine);
    for (int i = 0; i < 4; ++i) t.W(i) = normal(engine);
    cdec::Vector truth(2);
    truth << unif(engine), unif(engine);
    t.problem.y = t.problem.A * truth;
    for (int i = 0; i < 2; ++i) t.problem.y(i) += 0.1 * normal(engine);
    t.problem.eps = 0.2;
    t.problem.x0 = t.problem.A.transpose() * t.problem.y;
    return t;
}

struct GridOptimum {
    double value = std::numeric_limits<double>::infinity();
    double x1 = 0.0, x2 = 0.0;
};

// Feasible minimum of ||W x||_1 + (mu/2)||x - x0||^2 on [-2, 2]^2: a step-1e-2
// sweep, then a step-1e-4 sweep of the cell around the coarse winner.
inline GridOptimum grid_optimum(const ToyInstance& t) {
    const auto& A = t.problem.A;
    const auto& y = t.problem.y;
    const auto& x0 = t.problem.x0;
    auto eval = [&](double a, double b, GridOptimum& best) {
        const double r0 = y(0) - A(0, 0) * a - A(0, 1) * b;
        const double r1 = y(1) - A(1, 0) * a - A(1, 1) * b;
        if (std::sqrt(r0 * r0 + r1 * r1) > t.problem.eps) return;
        const double f = std::abs(t.W(0, 0) * a + t.W(0, 1) * b) + std::abs(t.W(1, 0) * a + t.W(1, 1) * b) +
                         0.5 * t.mu * ((a - x0(0)) * (a - x0(0)) + (b - x0(1)) * (b - x0(1)));
        if (f < best.value) best = {f, a, b};
    };
    GridOptimum coarse;
    for (int i = 0; i <= 400; ++i)
        for (int j = 0; j <= 400; ++j) eval(-2.0 + 0.01 * i, -2.0 + 0.01 * j, coarse);
    GridOptimum fine = coarse;
    for (int i = -200; i <= 200; ++i)
        for (int j = -200; j <= 200; ++j) eval(coarse.x1 + 1e-4 * i, coarse.x2 + 1e-4 * j, fine);
    return fine;
}
