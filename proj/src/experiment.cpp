#include "cdec/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "cdec/dataset_io.hpp"
#include "cdec/errors.hpp"
#include "cdec/rng.hpp"

namespace cdec {

const std::vector<std::string>& experiment_config_keys() {
    static const std::vector<std::string> keys = {
        "experiment.seed", "experiment.seeds", "experiment.output_dir",
        "data.source", "data.train_path", "data.test_path", "data.side", "data.downsample",
        "data.train_count", "data.test_count", "data.dimension", "data.sparsity",
        "sensing.m_ratio", "sensing.noise_std",
        "model.layers", "model.continuation_steps", "model.redundancy", "model.mu", "model.t1", "model.t2",
        "model.form", "model.beta_alpha", "model.beta_beta",
        "train.batch_size", "train.learning_rate", "train.max_epochs", "train.patience", "train.loss",
        "train.validation_fraction", "train.adam_beta1", "train.adam_beta2", "train.adam_eps",
    };
    return keys;
}

namespace {

int as_int(const KeyValueConfig& cfg, const std::string& key, int fallback) {
    const long long v = cfg.get_int(key, fallback);
    if (v < INT32_MIN || v > INT32_MAX) throw ConfigError("'" + key + "' is out of range");
    return static_cast<int>(v);
}

std::size_t line_of(const KeyValueConfig& cfg, const std::string& key) {
    const auto it = cfg.entries().find(key);
    return it == cfg.entries().end() ? 0 : it->second.line;
}

void require(bool ok, const KeyValueConfig& cfg, const std::string& key, const std::string& message) {
    if (!ok) throw ConfigError("'" + key + "' " + message, line_of(cfg, key));
}

}  // namespace

ExperimentSpec experiment_from_config(const KeyValueConfig& cfg) {
    const auto& keys = experiment_config_keys();
    cfg.require_known(std::set<std::string>(keys.begin(), keys.end()));

    ExperimentSpec s;
    s.seed = cfg.get_u64("experiment.seed", s.seed);
    for (const auto& item : cfg.get_list("experiment.seeds", {})) {
        KeyValueConfig one;
        one.set("seed", item);
        try {
            s.seeds.push_back(one.get_u64("seed", 0));
        } catch (const ConfigError&) {
            throw ConfigError("'experiment.seeds' must list non-negative integers", line_of(cfg, "experiment.seeds"));
        }
    }
    s.output_dir = cfg.get_string("experiment.output_dir", s.output_dir);

    DataSpec& d = s.data;
    d.source = cfg.get_string("data.source", d.source);
    d.train_path = cfg.get_string("data.train_path", d.train_path);
    d.test_path = cfg.get_string("data.test_path", d.test_path);
    d.side = as_int(cfg, "data.side", d.side);
    d.downsample = as_int(cfg, "data.downsample", d.downsample);
    d.train_count = cfg.get_int("data.train_count", d.train_count);
    d.test_count = cfg.get_int("data.test_count", d.test_count);
    d.dimension = cfg.get_int("data.dimension", d.dimension);
    d.sparsity = cfg.get_int("data.sparsity", d.sparsity);
    const std::set<std::string> sources = {"synthetic-digits", "idx", "png", "sparse", "cache"};
    require(sources.count(d.source) > 0, cfg, "data.source",
            "must be one of synthetic-digits, idx, png, sparse, cache");
    if (d.source == "idx" || d.source == "png" || d.source == "cache") {
        for (const char* key : {"data.train_path", "data.test_path"}) {
            const std::string path = cfg.get_string(key, "");
            require(!path.empty(), cfg, key, "is required for source " + d.source);
            const bool pattern = path.find_first_of("*?[") != std::string::npos;
            require(pattern || std::filesystem::exists(path), cfg, key, "names a path that does not exist: " + path);
        }
    }
    require(d.side >= 8, cfg, "data.side", "must be >= 8");
    require(d.downsample >= 1, cfg, "data.downsample", "must be >= 1");
    require(d.train_count >= 1, cfg, "data.train_count", "must be >= 1");
    require(d.test_count >= 1, cfg, "data.test_count", "must be >= 1");
    require(d.dimension >= 2, cfg, "data.dimension", "must be >= 2");
    require(d.sparsity >= 1 && d.sparsity <= d.dimension, cfg, "data.sparsity", "must lie in [1, dimension]");

    s.sensing.m_ratio = cfg.get_double("sensing.m_ratio", s.sensing.m_ratio);
    s.sensing.noise_std = cfg.get_double("sensing.noise_std", s.sensing.noise_std);
    require(s.sensing.m_ratio > 0.0 && s.sensing.m_ratio < 1.0, cfg, "sensing.m_ratio", "must lie in (0, 1)");
    require(s.sensing.noise_std >= 0.0, cfg, "sensing.noise_std", "must be >= 0");

    ModelSpec& m = s.model;
    m.layers = as_int(cfg, "model.layers", m.layers);
    m.continuation_steps = as_int(cfg, "model.continuation_steps", m.continuation_steps);
    m.redundancy = as_int(cfg, "model.redundancy", m.redundancy);
    m.mu = cfg.get_double("model.mu", m.mu);
    m.t1 = cfg.get_double("model.t1", m.t1);
    m.t2 = cfg.get_double("model.t2", m.t2);
    m.beta_alpha = cfg.get_double("model.beta_alpha", m.beta_alpha);
    m.beta_beta = cfg.get_double("model.beta_beta", m.beta_beta);
    try {
        m.form = update_form_from_string(cfg.get_string("model.form", to_string(m.form)));
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what(), line_of(cfg, "model.form"));
    }
    require(m.layers >= 1, cfg, "model.layers", "must be >= 1");
    require(m.continuation_steps >= 1, cfg, "model.continuation_steps", "must be >= 1");
    require(m.redundancy >= 2, cfg, "model.redundancy", "must be >= 2 (the operator must be redundant)");
    require(m.mu > 0.0, cfg, "model.mu", "must be > 0");
    require(m.t1 >= 0.0, cfg, "model.t1", "must be >= 0 (0 selects the spectral default)");
    require(m.t2 >= 0.0, cfg, "model.t2", "must be >= 0 (0 selects the spectral default)");
    require(m.beta_alpha > 0.0, cfg, "model.beta_alpha", "must be > 0");
    require(m.beta_beta > 0.0, cfg, "model.beta_beta", "must be > 0");

    TrainConfig& t = s.train.config;
    t.batch_size = as_int(cfg, "train.batch_size", t.batch_size);
    t.learning_rate = cfg.get_double("train.learning_rate", 1e-4);
    t.max_epochs = as_int(cfg, "train.max_epochs", t.max_epochs);
    t.patience = as_int(cfg, "train.patience", t.patience);
    t.adam_beta1 = cfg.get_double("train.adam_beta1", t.adam_beta1);
    t.adam_beta2 = cfg.get_double("train.adam_beta2", t.adam_beta2);
    t.adam_eps = cfg.get_double("train.adam_eps", t.adam_eps);
    try {
        t.loss = loss_kind_from_string(cfg.get_string("train.loss", to_string(t.loss)));
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what(), line_of(cfg, "train.loss"));
    }
    s.train.validation_fraction = cfg.get_double("train.validation_fraction", s.train.validation_fraction);
    require(t.batch_size >= 1, cfg, "train.batch_size", "must be >= 1");
    require(t.learning_rate > 0.0, cfg, "train.learning_rate", "must be > 0");
    require(t.max_epochs >= 0, cfg, "train.max_epochs", "must be >= 0");
    require(t.patience >= 1, cfg, "train.patience", "must be >= 1");
    require(t.adam_beta1 >= 0.0 && t.adam_beta1 < 1.0, cfg, "train.adam_beta1", "must lie in [0, 1)");
    require(t.adam_beta2 >= 0.0 && t.adam_beta2 < 1.0, cfg, "train.adam_beta2", "must lie in [0, 1)");
    require(t.adam_eps > 0.0, cfg, "train.adam_eps", "must be > 0");
    require(s.train.validation_fraction >= 0.0 && s.train.validation_fraction < 1.0, cfg,
            "train.validation_fraction", "must lie in [0, 1)");
    t.continuation_steps = m.continuation_steps;
    return s;
}

void validate(const ExperimentSpec& spec) {
    if (spec.model.layers < 1 || spec.model.continuation_steps < 1 || spec.model.redundancy < 2 ||
        !(spec.model.mu > 0.0))
        throw ConfigError("model settings out of range");
    if (!(spec.sensing.m_ratio > 0.0 && spec.sensing.m_ratio < 1.0)) throw ConfigError("sensing.m_ratio out of range");
    spec.train.config.validate();
}

Index measurement_count(Index n, double m_ratio) {
    const auto m = static_cast<Index>(std::llround(m_ratio * static_cast<double>(n)));
    return std::clamp<Index>(m, 1, n - 1);
}

namespace {

Matrix load_images(const DataSpec& d, const std::string& path, Index limit) {
    ImageSet images;
    if (d.source == "idx") {
        images = load_idx_images(path, d.downsample, static_cast<std::size_t>(limit));
    } else {
        images = load_png_grayscale(path);
        if (d.downsample > 1) images = downsample(images, d.downsample);
        if (images.count() > limit) images.pixels.conservativeResize(Eigen::NoChange, limit);
    }
    if (images.count() == 0) throw IoError("no images found in " + path);
    return images.pixels;
}

}  // namespace

TrainingData build_splits(const ExperimentSpec& spec, std::uint64_t root_seed) {
    validate(spec);
    const DataSpec& d = spec.data;
    TrainingData data;
    if (d.source == "cache") {
        data.train = read_dataset_cache(d.train_path, Split::train);
        data.test = read_dataset_cache(d.test_path, Split::test);
        if (data.train.n() != data.test.n() || data.train.m() != data.test.m())
            throw FormatError("dataset caches disagree on dimensions", 4);
        if (data.train.count() > d.train_count) data.train = data.train.subset(0, d.train_count);
        if (data.test.count() > d.test_count) data.test = data.test.subset(0, d.test_count);
        data.A = gaussian_measurement_matrix(data.train.m(), data.train.n(), derive_seed(root_seed, "sensing"));
        // Cached measurements were produced with some operator; refuse to pair them with another one.
        if (!(data.A * data.train.x - data.train.y).colwise().norm().isApprox(data.train.eps.transpose(), 1e-6))
            throw ConfigError("dataset cache was not generated with this seed's measurement operator");
    } else {
        Matrix train_x, test_x;
        if (d.source == "synthetic-digits") {
            const ImageSet all = downsample(
                synthetic_digit_images(d.train_count + d.test_count, d.side, derive_seed(root_seed, "data")),
                d.downsample);
            train_x = all.pixels.leftCols(d.train_count);
            test_x = all.pixels.rightCols(d.test_count);
        } else if (d.source != "sparse") {
            train_x = load_images(d, d.train_path, d.train_count);
            test_x = load_images(d, d.test_path, d.test_count);
            if (train_x.rows() != test_x.rows()) throw FormatError("train and test images differ in size", 0);
        }
        const Index n = d.source == "sparse" ? d.dimension : train_x.rows();
        const Index m = measurement_count(n, spec.sensing.m_ratio);
        data.A = gaussian_measurement_matrix(m, n, derive_seed(root_seed, "sensing"));
        if (d.source == "sparse") {
            data.train = synthetic_sparse_dataset(data.A, d.sparsity, d.train_count, spec.sensing.noise_std,
                                                  derive_seed(root_seed, "data", 0));
            data.test = synthetic_sparse_dataset(data.A, d.sparsity, d.test_count, spec.sensing.noise_std,
                                                 derive_seed(root_seed, "data", 1));
        } else {
            data.train = make_dataset(train_x, data.A, spec.sensing.noise_std, derive_seed(root_seed, "noise", 0));
            data.test = make_dataset(test_x, data.A, spec.sensing.noise_std, derive_seed(root_seed, "noise", 1));
        }
    }
    data.train.split = Split::train;
    data.test.split = Split::test;
    return data;
}

TrainingData build_training_data(const ExperimentSpec& spec, std::uint64_t root_seed) {
    TrainingData data = build_splits(spec, root_seed);
    carve_validation(data, spec.train.validation_fraction, derive_seed(root_seed, "validation"));
    return data;
}

UnrolledDecoder build_decoder(const ExperimentSpec& spec, const Matrix& A, std::uint64_t root_seed) {
    const ModelSpec& m = spec.model;
    const Index n = A.cols();
    Matrix W = init_analysis_operator(m.redundancy * n, n, derive_seed(root_seed, "init"),
                                      BetaParams{m.beta_alpha, m.beta_beta});
    const StepSizes auto_steps = default_step_sizes(W, A, m.mu);
    const double t1 = m.t1 > 0.0 ? m.t1 : auto_steps.t1;
    const double t2 = m.t2 > 0.0 ? m.t2 : auto_steps.t2;
    return UnrolledDecoder(m.layers, std::move(W), A.rows(), t1, t2, m.mu, m.form);
}

}  // namespace cdec
