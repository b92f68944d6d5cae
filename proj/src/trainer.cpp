#include "cdec/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "cdec/continuation.hpp"
#include "cdec/errors.hpp"
#include "cdec/rng.hpp"

namespace cdec {

void adam_step(Matrix& W, const Matrix& grad, AdamState& s, double lr) {
    if (grad.rows() != W.rows() || grad.cols() != W.cols()) throw InvalidArgument("adam_step: gradient shape mismatch");
    if (s.m.size() == 0 && s.v.size() == 0) {
        s.m = Matrix::Zero(W.rows(), W.cols());
        s.v = Matrix::Zero(W.rows(), W.cols());
    }
    if (s.m.rows() != W.rows() || s.m.cols() != W.cols() || s.v.rows() != W.rows() || s.v.cols() != W.cols())
        throw InvalidArgument("adam_step: state shape mismatch");
    if (!(lr > 0.0)) throw InvalidArgument("adam_step: learning rate must be > 0");
    ++s.step;
    s.m = s.beta1 * s.m + (1.0 - s.beta1) * grad;
    s.v = s.beta2 * s.v + (1.0 - s.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
    W.array() -= lr * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + s.eps);
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw InvalidArgument("train: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw InvalidArgument("train: learning_rate must be > 0");
    if (max_epochs < 0) throw InvalidArgument("train: max_epochs must be >= 0");
    if (patience < 1) throw InvalidArgument("train: patience must be >= 1");
    if (continuation_steps < 1) throw InvalidArgument("train: continuation_steps must be >= 1");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) || !(adam_eps > 0.0))
        throw InvalidArgument("train: Adam constants out of range");
}

void carve_validation(TrainingData& data, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction < 1.0)) throw InvalidArgument("carve_validation: fraction must be in [0, 1)");
    const Index total = data.train.count();
    const auto held = static_cast<Index>(std::llround(fraction * static_cast<double>(total)));
    std::vector<Index> order(static_cast<std::size_t>(total));
    std::iota(order.begin(), order.end(), Index{0});
    auto engine = make_engine(seed);
    std::shuffle(order.begin(), order.end(), engine);
    std::vector<Index> val(order.begin(), order.begin() + held);
    std::vector<Index> rest(order.begin() + held, order.end());
    std::sort(val.begin(), val.end());
    std::sort(rest.begin(), rest.end());
    data.validation = data.train.columns(val);
    data.validation.split = Split::validation;
    data.train = data.train.columns(rest);
    data.train.split = Split::train;
}

double evaluate_loss(const UnrolledDecoder& decoder, const Matrix& A, const Dataset& split, LossKind loss,
                     int continuation_steps, Index chunk) {
    if (split.empty()) throw InvalidArgument("evaluate: empty split");
    if (chunk < 1) throw InvalidArgument("evaluate: chunk must be >= 1");
    double total = 0.0;
    for (Index first = 0; first < split.count(); first += chunk) {
        const Index len = std::min(chunk, split.count() - first);
        const Matrix out = continued_output(decoder, A, split.y.middleCols(first, len), split.x0.middleCols(first, len),
                                            split.eps.segment(first, len), continuation_steps);
        total += loss_value(loss, out, split.x.middleCols(first, len)) * static_cast<double>(len);
    }
    return total / static_cast<double>(split.count());
}

Metrics evaluate(const UnrolledDecoder& decoder, const Matrix& A, const Dataset& train, const Dataset& test,
                 LossKind loss, int continuation_steps) {
    Metrics m;
    m.train_loss = evaluate_loss(decoder, A, train, loss, continuation_steps);
    m.test_loss = evaluate_loss(decoder, A, test, loss, continuation_steps);
    m.ege = std::abs(m.test_loss - m.train_loss);
    return m;
}

namespace {

EpochRecord record_epoch(int epoch, const UnrolledDecoder& d, const TrainingData& data, const TrainConfig& c) {
    EpochRecord r;
    r.epoch = epoch;
    r.train_loss = evaluate_loss(d, data.A, data.train, c.loss, c.continuation_steps);
    r.val_loss = data.validation.empty() ? r.train_loss
                                         : evaluate_loss(d, data.A, data.validation, c.loss, c.continuation_steps);
    r.test_loss = evaluate_loss(d, data.A, data.test, c.loss, c.continuation_steps);
    r.ege = std::abs(r.val_loss - r.train_loss);
    if (!std::isfinite(r.train_loss) || !std::isfinite(r.val_loss) || !std::isfinite(r.test_loss))
        throw DivergenceError("training loss is not finite", static_cast<std::size_t>(epoch));
    return r;
}

}  // namespace

TrainResult train(UnrolledDecoder& decoder, const TrainingData& data, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
    config.validate();
    data.train.validate();
    if (data.train.empty() || data.test.empty()) throw InvalidArgument("train: train and test splits must be non-empty");
    if (data.train.n() != decoder.n() || data.train.m() != decoder.m())
        throw InvalidArgument("train: decoder dimensions do not match the data");

    AdamState adam(decoder.N(), decoder.n());
    adam.beta1 = config.adam_beta1;
    adam.beta2 = config.adam_beta2;
    adam.eps = config.adam_eps;

    TrainResult result;
    Metrics& metrics = result.metrics;
    metrics.history.push_back(record_epoch(0, decoder, data, config));
    if (on_epoch) on_epoch(metrics.history.back());
    result.W = decoder.W();
    double best_ege = 0.0;
    int since_best = 0;

    const Index count = data.train.count();
    std::vector<Index> order(static_cast<std::size_t>(count));
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::iota(order.begin(), order.end(), Index{0});
        auto engine = make_engine(derive_seed(config.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), engine);

        for (Index first = 0; first < count; first += config.batch_size) {
            const Index len = std::min<Index>(config.batch_size, count - first);
            const std::vector<Index> idx(order.begin() + first, order.begin() + first + len);
            const Dataset batch = data.train.columns(idx);
            try {
                const ContinuedForward fwd =
                    continued_forward(decoder, data.A, batch.y, batch.x0, batch.eps, config.continuation_steps);
                const Matrix upstream = loss_gradient(config.loss, fwd.x_hat, batch.x);
                const DecoderGradient grad = continued_backward(decoder, data.A, fwd, upstream);
                if (!grad.W.allFinite()) throw DivergenceError("non-finite gradient", static_cast<std::size_t>(epoch));
                adam_step(decoder.mutable_W(), grad.W, adam, config.learning_rate);
            } catch (const DivergenceError& e) {
                throw DivergenceError(std::string("training diverged: ") + e.what(), static_cast<std::size_t>(epoch));
            }
        }

        metrics.history.push_back(record_epoch(epoch, decoder, data, config));
        const EpochRecord& rec = metrics.history.back();
        if (on_epoch) on_epoch(rec);
        metrics.epochs_run = epoch;
        if (epoch == 1 || rec.ege < best_ege) {
            best_ege = rec.ege;
            metrics.best_epoch = epoch;
            result.W = decoder.W();
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
    }

    const EpochRecord& best = metrics.history[static_cast<std::size_t>(metrics.best_epoch)];
    metrics.train_loss = best.train_loss;
    metrics.val_loss = best.val_loss;
    metrics.test_loss = best.test_loss;
    metrics.ege = std::abs(best.test_loss - best.train_loss);
    decoder.set_W(result.W);
    return result;
}

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
    out << "epoch,train_loss,val_loss,test_loss,ege\n" << std::setprecision(17);
    for (const auto& r : history)
        out << r.epoch << ',' << r.train_loss << ',' << r.val_loss << ',' << r.test_loss << ',' << r.ege << '\n';
}

std::string CellSpec::key() const {
    std::ostringstream s;
    s << "L" << layers << "_J" << continuation_steps << "_N" << redundancy << "n_" << to_string(loss);
    return s.str();
}

std::vector<CellSummary> run_matrix(const std::vector<CellSpec>& cells, const std::vector<std::uint64_t>& seeds,
                                    const CellRunner& run_one) {
    if (cells.empty() || seeds.empty()) throw InvalidArgument("run_matrix: empty grid");
    std::vector<CellSummary> table;
    for (const auto& cell : cells) {
        CellSummary row;
        row.cell = cell;
        for (auto seed : seeds) {
            CellRun run;
            run.seed = seed;
            try {
                run.metrics = run_one(cell, seed);
                run.ok = true;
            } catch (const std::exception& e) {
                run.error = e.what();
            }
            row.runs.push_back(std::move(run));
        }
        for (const auto& run : row.runs) {
            if (!run.ok) continue;
            ++row.succeeded;
            row.mean_train_loss += run.metrics.train_loss;
            row.mean_test_loss += run.metrics.test_loss;
            row.mean_ege += run.metrics.ege;
        }
        if (row.succeeded > 0) {
            row.mean_train_loss /= row.succeeded;
            row.mean_test_loss /= row.succeeded;
            row.mean_ege /= row.succeeded;
        }
        table.push_back(std::move(row));
    }
    return table;
}

void write_results_csv(std::ostream& out, const std::vector<CellSummary>& table) {
    out << "cell,layers,continuation_steps,redundancy,loss,runs,succeeded,mean_train_loss,mean_test_loss,mean_ege\n"
        << std::setprecision(17);
    for (const auto& r : table)
        out << r.cell.key() << ',' << r.cell.layers << ',' << r.cell.continuation_steps << ',' << r.cell.redundancy
            << ',' << to_string(r.cell.loss) << ',' << r.runs.size() << ',' << r.succeeded << ','
            << r.mean_train_loss << ',' << r.mean_test_loss << ',' << r.mean_ege << '\n';
}

}  // namespace cdec
