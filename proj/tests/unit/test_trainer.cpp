#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cdec/errors.hpp"
#include "cdec/rng.hpp"
#include "cdec/sensing.hpp"
#include "cdec/trainer.hpp"

using namespace cdec;

namespace {

long count_lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

TrainingData small_data(std::uint64_t seed, Index train = 160, Index test = 40) {
    TrainingData d;
    d.A = gaussian_measurement_matrix(8, 16, derive_seed(seed, "sensing"));
    d.train = synthetic_sparse_dataset(d.A, 3, train, 1e-3, derive_seed(seed, "data", 0));
    d.test = synthetic_sparse_dataset(d.A, 3, test, 1e-3, derive_seed(seed, "data", 1));
    d.test.split = Split::test;
    carve_validation(d, 0.2, derive_seed(seed, "validation"));
    return d;
}

UnrolledDecoder small_decoder(const TrainingData& d, std::uint64_t seed, int layers = 4) {
    const Matrix W = init_analysis_operator(48, 16, seed);
    const StepSizes t = default_step_sizes(W, d.A);
    return UnrolledDecoder(layers, W, d.A.rows(), t.t1, t.t2, 1.0);
}

TrainConfig small_config() {
    TrainConfig c;
    c.batch_size = 32;
    c.learning_rate = 1e-2;
    c.max_epochs = 12;
    c.patience = 4;
    c.seed = 5;
    return c;
}

}  // namespace

TEST(Adam, ZeroGradientLeavesWeightsUnchanged) {
    Matrix W = Matrix::Random(3, 4);
    const Matrix before = W;
    AdamState s(3, 4);
    adam_step(W, Matrix::Zero(3, 4), s, 0.1);
    EXPECT_EQ(W, before);
    EXPECT_EQ(s.step, 1);
}

// One bias-corrected step: m_hat = g, v_hat = g^2, so the update is
// -lr g / (|g| + eps), magnitude lr |g| / (|g| + eps).
TEST(Adam, FirstStepHasMagnitudeLearningRate) {
    Matrix W = Matrix::Zero(2, 3);
    Matrix g(2, 3);
    g << 1.0, -2.0, 1e-3, -5e-2, 3.0, -7.0;
    AdamState s(2, 3);
    adam_step(W, g, s, 1e-3);
    for (Index i = 0; i < g.size(); ++i) {
        const double expected = -1e-3 * g(i) / (std::abs(g(i)) + 1e-8);
        EXPECT_NEAR(W(i), expected, 1e-15);
        EXPECT_NEAR(std::abs(W(i)), 1e-3, 1e-8);
    }
}

TEST(Adam, SecondStepMatchesClosedForm) {
    Matrix W = Matrix::Zero(1, 1);
    AdamState s(1, 1);
    const double g1 = 0.5, g2 = -1.5, lr = 0.01;
    adam_step(W, Matrix::Constant(1, 1, g1), s, lr);
    adam_step(W, Matrix::Constant(1, 1, g2), s, lr);
    const double m = 0.9 * 0.1 * g1 + 0.1 * g2, v = 0.999 * 0.001 * g1 * g1 + 0.001 * g2 * g2;
    const double mh = m / (1 - 0.81), vh = v / (1 - 0.999 * 0.999);
    const double w1 = -lr * g1 / (std::abs(g1) + 1e-8);
    EXPECT_NEAR(W(0, 0), w1 - lr * mh / (std::sqrt(vh) + 1e-8), 1e-15);
}

TEST(Adam, DeterministicAndShapeChecked) {
    Matrix a = Matrix::Ones(2, 2), b = a;
    AdamState sa(2, 2), sb(2, 2);
    const Matrix g = Matrix::Constant(2, 2, 0.3);
    adam_step(a, g, sa, 0.1);
    adam_step(b, g, sb, 0.1);
    EXPECT_EQ(a, b);
    EXPECT_THROW(adam_step(a, Matrix::Ones(3, 2), sa, 0.1), InvalidArgument);
    AdamState wrong(1, 1);
    EXPECT_THROW(adam_step(a, g, wrong, 0.1), InvalidArgument);
}

TEST(TrainConfig, Validation) {
    TrainConfig c;
    EXPECT_NO_THROW(c.validate());
    c.batch_size = 0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = TrainConfig{};
    c.learning_rate = 0.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = TrainConfig{};
    c.max_epochs = -1;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = TrainConfig{};
    c.patience = 0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = TrainConfig{};
    c.continuation_steps = 0;
    EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(CarveValidation, SplitsTrainDisjointly) {
    const TrainingData d = small_data(1, 100, 10);
    EXPECT_EQ(d.validation.count(), 20);
    EXPECT_EQ(d.train.count(), 80);
    EXPECT_EQ(d.validation.split, Split::validation);
    for (Index i = 0; i < d.validation.count(); ++i)
        for (Index j = 0; j < d.train.count(); ++j) ASSERT_NE(d.validation.x.col(i), d.train.x.col(j));
    const TrainingData again = small_data(1, 100, 10);
    EXPECT_EQ(again.validation.x, d.validation.x);
}

TEST(Evaluate, IdenticalSplitsGiveZeroGap) {
    const TrainingData d = small_data(2);
    const UnrolledDecoder dec = small_decoder(d, 3);
    const Metrics m = evaluate(dec, d.A, d.test, d.test, LossKind::log_cosh, 2);
    EXPECT_EQ(m.ege, 0.0);
    EXPECT_EQ(m.train_loss, m.test_loss);
    EXPECT_EQ(evaluate(dec, d.A, d.train, d.test, LossKind::log_cosh, 2).test_loss, m.test_loss);
    Dataset empty = d.test.subset(0, 0);
    EXPECT_THROW(evaluate_loss(dec, d.A, empty, LossKind::mse, 1), InvalidArgument);
}

TEST(Evaluate, ChunkingDoesNotChangeTheMean) {
    const TrainingData d = small_data(4);
    const UnrolledDecoder dec = small_decoder(d, 5);
    const double whole = evaluate_loss(dec, d.A, d.train, LossKind::log_cosh, 1, 100000);
    EXPECT_NEAR(evaluate_loss(dec, d.A, d.train, LossKind::log_cosh, 1, 7), whole, 1e-14 * whole);
}

TEST(Train, ZeroEpochsKeepsInitialization) {
    const TrainingData d = small_data(6);
    UnrolledDecoder dec = small_decoder(d, 7);
    const Matrix W0 = dec.W();
    TrainConfig c = small_config();
    c.max_epochs = 0;
    const TrainResult r = train(dec, d, c);
    EXPECT_EQ(r.W, W0);
    EXPECT_EQ(dec.W(), W0);
    ASSERT_EQ(r.metrics.history.size(), 1u);
    EXPECT_EQ(r.metrics.best_epoch, 0);
    EXPECT_EQ(r.metrics.epochs_run, 0);
    EXPECT_EQ(r.metrics.test_loss, evaluate_loss(dec, d.A, d.test, LossKind::log_cosh, 1));
}

TEST(Train, ReturnsSnapshotWithSmallestRecordedGap) {
    const TrainingData d = small_data(8);
    UnrolledDecoder dec = small_decoder(d, 9);
    const TrainConfig c = small_config();
    int callbacks = 0;
    const TrainResult r = train(dec, d, c, [&](const EpochRecord&) { ++callbacks; });
    const auto& h = r.metrics.history;
    EXPECT_EQ(callbacks, static_cast<int>(h.size()));
    EXPECT_EQ(static_cast<int>(h.size()), r.metrics.epochs_run + 1);
    int best = 1;
    for (std::size_t e = 1; e < h.size(); ++e) {
        EXPECT_GE(h[e].ege, 0.0);
        EXPECT_EQ(h[e].ege, std::abs(h[e].val_loss - h[e].train_loss));
        if (h[e].ege < h[static_cast<std::size_t>(best)].ege) best = static_cast<int>(e);
    }
    EXPECT_EQ(r.metrics.best_epoch, best);
    EXPECT_EQ(dec.W(), r.W);
    // The stored snapshot reproduces the recorded losses.
    EXPECT_EQ(evaluate_loss(dec, d.A, d.test, c.loss, 1), h[static_cast<std::size_t>(best)].test_loss);
    EXPECT_EQ(r.metrics.ege, std::abs(r.metrics.test_loss - r.metrics.train_loss));
    // Early stopping fires `patience` epochs after the best one, or the run ends.
    EXPECT_TRUE(r.metrics.epochs_run == c.max_epochs || r.metrics.epochs_run == best + c.patience);
}

TEST(Train, ReducesTheLossAndIsDeterministic) {
    const TrainingData d = small_data(10, 400, 80);
    UnrolledDecoder a = small_decoder(d, 11), b = small_decoder(d, 11);
    TrainConfig c = small_config();
    c.patience = 100;
    c.continuation_steps = 2;
    const TrainResult ra = train(a, d, c), rb = train(b, d, c);
    EXPECT_EQ(ra.W, rb.W);
    std::ostringstream ha, hb;
    write_history_csv(ha, ra.metrics.history);
    write_history_csv(hb, rb.metrics.history);
    EXPECT_EQ(ha.str(), hb.str());
    EXPECT_LT(ra.metrics.history.back().train_loss, ra.metrics.history.front().train_loss);
}

TEST(Train, RejectsMismatchedDecoder) {
    const TrainingData d = small_data(12);
    UnrolledDecoder dec(3, Matrix::Ones(10, 5), 8, 1, 1, 1);
    EXPECT_THROW(train(dec, d, small_config()), InvalidArgument);
}

TEST(Train, HugeLearningRateReportsDivergenceEpoch) {
    const TrainingData d = small_data(13);
    UnrolledDecoder dec = small_decoder(d, 14, 8);
    TrainConfig c = small_config();
    c.learning_rate = 1e200;
    try {
        train(dec, d, c);
        SUCCEED() << "training survived";
    } catch (const DivergenceError& e) {
        EXPECT_GE(e.index(), 1u);
    }
}

TEST(HistoryCsv, HeaderAndRows) {
    std::vector<EpochRecord> h(2);
    h[1].epoch = 1;
    h[1].train_loss = 0.5;
    std::ostringstream out;
    write_history_csv(out, h);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "epoch,train_loss,val_loss,test_loss,ege");
    EXPECT_EQ(count_lines(out.str()), 3);
}

TEST(RunMatrix, SingleCellSingleSeed) {
    const auto table = run_matrix({CellSpec{}}, {1}, [](const CellSpec&, std::uint64_t) {
        Metrics m;
        m.test_loss = 2.0;
        return m;
    });
    ASSERT_EQ(table.size(), 1u);
    EXPECT_EQ(table[0].succeeded, 1);
    EXPECT_EQ(table[0].mean_test_loss, 2.0);
    EXPECT_EQ(table[0].cell.key(), "L5_J1_N10n_log-cosh");
    std::ostringstream out;
    write_results_csv(out, table);
    EXPECT_EQ(count_lines(out.str()), 2);
}

TEST(RunMatrix, MeansAreArithmeticOverSeedsAndFailuresAreRecorded) {
    std::vector<CellSpec> cells(2);
    cells[1].continuation_steps = 4;
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    auto value = [](std::uint64_t s, int j) { return 0.1 * static_cast<double>(s) + 0.013 * j; };
    const auto table = run_matrix(cells, seeds, [&](const CellSpec& c, std::uint64_t s) {
        if (c.continuation_steps == 4 && s == 3) throw DivergenceError("boom", 2);
        Metrics m;
        m.test_loss = value(s, c.continuation_steps);
        m.ege = value(s, c.continuation_steps) / 7.0;
        return m;
    });
    ASSERT_EQ(table.size(), 2u);
    for (const auto& row : table) {
        double sum = 0.0, ege = 0.0;
        int ok = 0;
        for (auto s : seeds) {
            if (row.cell.continuation_steps == 4 && s == 3) continue;
            sum += value(s, row.cell.continuation_steps);
            ege += value(s, row.cell.continuation_steps) / 7.0;
            ++ok;
        }
        EXPECT_EQ(row.succeeded, ok);
        EXPECT_NEAR(row.mean_test_loss, sum / ok, 1e-15);
        EXPECT_NEAR(row.mean_ege, ege / ok, 1e-15);
        EXPECT_EQ(row.runs.size(), seeds.size());
    }
    EXPECT_FALSE(table[1].runs[2].ok);
    EXPECT_NE(table[1].runs[2].error.find("boom"), std::string::npos);
    EXPECT_THROW(run_matrix({}, seeds, {}), InvalidArgument);
}
