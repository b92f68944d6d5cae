#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cdec/core_ops.hpp"
#include "cdec/sensing.hpp"
#include "cdec/unfolded_net.hpp"

namespace cdec {

struct Directions {
    Matrix d1;
    Matrix d2;
};

// Two Gaussian directions shaped like W, each row rescaled to the norm of the
// matching row of W. Rows of W that are zero give zero direction rows.
Directions random_directions(const Matrix& W, std::uint64_t seed);

struct LandscapeMeta {
    std::string model_id;
    std::string dataset_id;
    std::uint64_t seed = 0;
    std::string normalization = "row";
    std::string direction_id;
};

struct LandscapeGrid {
    std::vector<double> alphas;
    std::vector<double> betas;
    Matrix losses;  // alphas.size() x betas.size(); NaN marks a failed point
    LandscapeMeta meta;

    Index missing() const;
};

// `count` evenly spaced points on [lo, hi]; with an odd count the midpoint of a
// symmetric range is exactly 0.
std::vector<double> linspace(double lo, double hi, int count);

struct ScanSettings {
    LossKind loss = LossKind::log_cosh;
    int continuation_steps = 1;
};

// losses(i, j) = loss of the decoder with W + alphas[i] d1 + betas[j] d2.
// The decoder passed in is never modified.
LandscapeGrid scan(const UnrolledDecoder& decoder, const Matrix& A, const Dataset& split, const Directions& dirs,
                   const std::vector<double>& alphas, const std::vector<double>& betas, const ScanSettings& settings);

enum class RoughnessScale { log, linear };

struct Roughness {
    double value = 0.0;
    Index points = 0;  // interior points that entered the mean
};

// Mean |discrete Laplacian| over interior points whose 5-point stencil is fully
// valid, by default of log(loss). Requires uniformly spaced axes.
Roughness roughness(const LandscapeGrid& grid, RoughnessScale scale = RoughnessScale::log);

void write_grid_csv(std::ostream& out, const LandscapeGrid& grid);
std::string grid_meta_json(const LandscapeGrid& grid, const std::string& extra_json = "{}");

}  // namespace cdec
