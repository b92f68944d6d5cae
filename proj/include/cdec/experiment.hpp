#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cdec/config.hpp"
#include "cdec/conic_solver.hpp"
#include "cdec/trainer.hpp"
#include "cdec/unfolded_net.hpp"

namespace cdec {

struct DataSpec {
    std::string source = "synthetic-digits";  // synthetic-digits | idx | png | sparse | cache
    std::string train_path;
    std::string test_path;
    int side = 28;        // synthetic-digits canvas
    int downsample = 2;   // average-pooling factor for image sources
    Index train_count = 5000;
    Index test_count = 1000;
    Index dimension = 64;  // sparse source only
    Index sparsity = 4;    // sparse source only
};

struct SensingSpec {
    double m_ratio = 0.25;
    double noise_std = 1e-4;
};

struct ModelSpec {
    int layers = 5;
    int continuation_steps = 1;
    int redundancy = 10;
    double mu = 1.0;
    double t1 = 0.0;  // 0 = 1 / sigma_max(W_init)^2
    double t2 = 0.0;  // 0 = 1 / sigma_max(A)^2
    UpdateForm form = UpdateForm::conic;
    double beta_alpha = 2.0;
    double beta_beta = 2.0;
};

struct TrainSpec {
    TrainConfig config;
    double validation_fraction = 0.1;
};

struct ExperimentSpec {
    std::uint64_t seed = 0;
    DataSpec data;
    SensingSpec sensing;
    ModelSpec model;
    TrainSpec train;
    std::vector<std::uint64_t> seeds;  // for grids; empty = {seed}
    std::string output_dir = "runs";
};

// Builds a spec from [experiment] [data] [sensing] [model] [train] sections.
// Unknown keys and out-of-range values raise ConfigError with the line number.
ExperimentSpec experiment_from_config(const KeyValueConfig& cfg);
void validate(const ExperimentSpec& spec);

// Keys experiment_from_config understands, for --set validation and docs.
const std::vector<std::string>& experiment_config_keys();

// Signals, measurement operator and splits for one root seed. Every consumer
// gets its own child seed, so runs that differ only in the model share data.
TrainingData build_training_data(const ExperimentSpec& spec, std::uint64_t root_seed);

// The same without carving out the validation split (what gen-data caches).
TrainingData build_splits(const ExperimentSpec& spec, std::uint64_t root_seed);

// Beta-initialized decoder for the data's dimensions.
UnrolledDecoder build_decoder(const ExperimentSpec& spec, const Matrix& A, std::uint64_t root_seed);

Index measurement_count(Index n, double m_ratio);

}  // namespace cdec
