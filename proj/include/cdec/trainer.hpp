#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cdec/core_ops.hpp"
#include "cdec/sensing.hpp"
#include "cdec/unfolded_net.hpp"

namespace cdec {

struct AdamState {
    Matrix m;  // first moment
    Matrix v;  // second moment
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    AdamState() = default;
    AdamState(Index rows, Index cols) : m(Matrix::Zero(rows, cols)), v(Matrix::Zero(rows, cols)) {}
};

// Bias-corrected Adam update of W in place.
void adam_step(Matrix& W, const Matrix& grad, AdamState& state, double lr);

struct TrainConfig {
    int batch_size = 128;
    double learning_rate = 1e-3;
    int max_epochs = 100;
    int patience = 10;  // epochs without a better validation EGE before stopping
    LossKind loss = LossKind::log_cosh;
    int continuation_steps = 1;
    std::uint64_t seed = 0;  // minibatch order
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const;
};

// Sensing operator shared by all splits plus the three splits.
struct TrainingData {
    Matrix A;
    Dataset train;
    Dataset validation;
    Dataset test;
};

// Moves a seeded random `fraction` of `train` into a validation split.
void carve_validation(TrainingData& data, double fraction, std::uint64_t seed);

struct EpochRecord {
    int epoch = 0;  // 0 = before any update
    double train_loss = 0.0;
    double val_loss = 0.0;
    double test_loss = 0.0;
    double ege = 0.0;  // |val_loss - train_loss|, the stopping signal
};

struct Metrics {
    double train_loss = 0.0;
    double val_loss = 0.0;
    double test_loss = 0.0;
    double ege = 0.0;  // |test_loss - train_loss| of the returned snapshot
    int best_epoch = 0;
    int epochs_run = 0;
    std::vector<EpochRecord> history;
};

// Mean per-sample loss of the continued decoder over a whole split, computed in
// fixed-size chunks so large splits do not need one giant batch.
double evaluate_loss(const UnrolledDecoder& decoder, const Matrix& A, const Dataset& split, LossKind loss,
                     int continuation_steps, Index chunk = 512);

// Train / test losses of a fixed decoder and their gap.
Metrics evaluate(const UnrolledDecoder& decoder, const Matrix& A, const Dataset& train, const Dataset& test,
                 LossKind loss, int continuation_steps);

struct TrainResult {
    Matrix W;  // snapshot with the smallest validation EGE
    Metrics metrics;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Minibatch Adam on W. Returns the snapshot whose EGE is minimal among epochs
// 1..max_epochs that were run (the initial W when max_epochs = 0). The decoder
// is left holding the returned snapshot.
TrainResult train(UnrolledDecoder& decoder, const TrainingData& data, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history);

// One experiment cell: architecture, continuation and loss.
struct CellSpec {
    int layers = 5;
    int continuation_steps = 1;
    int redundancy = 10;  // N = redundancy * n
    LossKind loss = LossKind::log_cosh;

    std::string key() const;
};

struct CellRun {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    Metrics metrics;
};

struct CellSummary {
    CellSpec cell;
    std::vector<CellRun> runs;
    int succeeded = 0;
    double mean_train_loss = 0.0;
    double mean_test_loss = 0.0;
    double mean_ege = 0.0;
};

// Runs every cell for every seed. `run_one` does the actual work for one
// (cell, seed); an exception marks that run failed and the grid continues.
using CellRunner = std::function<Metrics(const CellSpec&, std::uint64_t seed)>;
std::vector<CellSummary> run_matrix(const std::vector<CellSpec>& cells, const std::vector<std::uint64_t>& seeds,
                                    const CellRunner& run_one);

void write_results_csv(std::ostream& out, const std::vector<CellSummary>& table);

}  // namespace cdec
