#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "cdec/artifacts.hpp"
#include "cdec/checkpoint.hpp"
#include "cdec/continuation.hpp"
#include "cdec/dataset_io.hpp"
#include "cdec/errors.hpp"
#include "cdec/experiment.hpp"
#include "cdec/landscape.hpp"
#include "cdec/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace cdec;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kDivergence = 3, kIo = 4 };

struct Common {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out_dir;
    bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("-c,--config", c.config_path, "key=value config file with [section] headers");
    cmd->add_option("--set", c.sets, "override one setting, e.g. --set train.max_epochs=20")->take_all();
    cmd->add_option("-o,--out", c.out_dir, "output directory (default: experiment.output_dir, or $CDEC_OUT)");
    cmd->add_flag("-q,--quiet", c.quiet, "suppress progress output");
}

// Config file, then --set overrides, then subcommand flags (already folded into `flags`).
KeyValueConfig resolve_config(const Common& c, const std::map<std::string, std::string>& defaults,
                              const std::map<std::string, std::string>& flags) {
    KeyValueConfig cfg;
    if (!c.config_path.empty()) cfg = KeyValueConfig::load(c.config_path);
    for (const auto& [k, v] : defaults)
        if (!cfg.has(k)) cfg.set(k, v);
    for (const auto& s : c.sets) cfg.apply_override(s);
    for (const auto& [k, v] : flags) cfg.set(k, v);
    return cfg;
}

fs::path output_dir(const Common& c, const ExperimentSpec& spec, const KeyValueConfig& cfg) {
    if (!c.out_dir.empty()) return c.out_dir;
    if (!cfg.has("experiment.output_dir"))
        if (const char* env = std::getenv("CDEC_OUT"); env && *env) return env;
    return spec.output_dir;
}

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

void write_vector_csv(const fs::path& path, const char* column, const Vector& v) {
    std::ostringstream out;
    out << column << "\n" << std::setprecision(17);
    for (Index i = 0; i < v.size(); ++i) out << v(i) << "\n";
    write_text_file(path, out.str());
}

std::string data_config_text(const KeyValueConfig& cfg) {
    std::ostringstream s;
    for (const auto& [k, e] : cfg.entries())
        if (k.rfind("data.", 0) == 0 || k.rfind("sensing.", 0) == 0) s << k << '=' << e.value << '\n';
    return s.str();
}

std::string data_config_id(const KeyValueConfig& cfg) { return git_blob_sha1(data_config_text(cfg)).substr(0, 16); }

std::string dataset_id(const KeyValueConfig& cfg, std::uint64_t seed) {
    return git_blob_sha1(data_config_text(cfg) + "seed=" + std::to_string(seed) + "\n").substr(0, 16);
}

std::string with_seed(const KeyValueConfig& cfg, std::uint64_t seed) {
    KeyValueConfig copy = cfg;
    copy.set("experiment.seed", std::to_string(seed));
    return copy.canonical();
}

std::mutex log_mutex;

void log(bool quiet, const std::string& line) {
    if (quiet) return;
    std::lock_guard<std::mutex> lock(log_mutex);
    std::cerr << line << std::endl;
}

// ---------------------------------------------------------------- solve

struct SolveOptions {
    Common common;
    int steps = 1;
    int iters = 500;
    double rel_tol = 0.0;
    Index sample = 0;
    std::string operator_kind = "identity";
    std::string checkpoint;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

int cmd_solve(const SolveOptions& o) {
    std::map<std::string, std::string> flags;
    if (o.seed_given) flags["experiment.seed"] = std::to_string(o.seed);
    const KeyValueConfig cfg = resolve_config(
        o.common, {{"data.source", "sparse"}, {"data.train_count", "1"}, {"data.test_count", "16"},
                   {"sensing.m_ratio", "0.5"}, {"sensing.noise_std", "0"}, {"train.validation_fraction", "0"}},
        flags);
    const ExperimentSpec spec = experiment_from_config(cfg);
    if (o.steps < 1) throw ConfigError("--continuation-steps must be >= 1");
    if (o.iters < 1) throw ConfigError("--iters must be >= 1");

    const TrainingData data = build_splits(spec, spec.seed);
    if (o.sample < 0 || o.sample >= data.test.count())
        throw ConfigError("--sample " + std::to_string(o.sample) + " is outside the test split (size " +
                          std::to_string(data.test.count()) + ")");
    const Index n = data.A.cols();

    Matrix W;
    if (!o.checkpoint.empty()) {
        W = read_checkpoint(fs::path(o.checkpoint)).W();
        if (W.cols() != n) throw ConfigError("checkpoint operator does not match the signal dimension");
    } else if (o.operator_kind == "identity") {
        W = Matrix::Identity(n, n);
    } else if (o.operator_kind == "beta") {
        W = init_analysis_operator(spec.model.redundancy * n, n, derive_seed(spec.seed, "init"),
                                   BetaParams{spec.model.beta_alpha, spec.model.beta_beta});
    } else {
        throw ConfigError("--operator must be identity or beta");
    }

    SolverConfig sc;
    const StepSizes steps = default_step_sizes(W, data.A, spec.model.mu);
    sc.t1 = spec.model.t1 > 0.0 ? spec.model.t1 : steps.t1;
    sc.t2 = spec.model.t2 > 0.0 ? spec.model.t2 : steps.t2;
    sc.mu = spec.model.mu;
    sc.max_iters = o.iters;
    sc.rel_tol = o.rel_tol;
    sc.form = spec.model.form;

    const SensingProblem problem = data.test.problem(data.A, o.sample);
    const ContinuedSolveResult result = continued_solve(problem, W, sc, o.steps);

    std::vector<TraceRow> trace;
    for (const auto& step : result.steps)
        for (TraceRow row : step.trace) {
            row.iter = trace.size();
            trace.push_back(row);
        }
    const fs::path out = output_dir(o.common, spec, cfg);
    std::ostringstream trace_csv;
    write_trace_csv(trace_csv, trace);
    write_text_file(out / "trace.csv", trace_csv.str());
    write_vector_csv(out / "x_hat.csv", "x_hat", result.x_star);
    write_vector_csv(out / "x_true.csv", "x_true", data.test.x.col(o.sample));

    const Vector truth = data.test.x.col(o.sample);
    const double rel_err = (result.x_star - truth).norm() / std::max(truth.norm(), 1e-300);
    const std::string resolved = cfg.canonical();
    json extra;
    extra["continuation_steps"] = o.steps;
    extra["iterations_per_step"] = o.iters;
    extra["sample"] = o.sample;
    extra["relative_error"] = rel_err;
    for (const char* name : {"trace.csv", "x_hat.csv", "x_true.csv"}) write_sidecar(out / name, resolved, extra.dump());
    std::cout << "relative error " << fmt(rel_err) << ", objective " << fmt(trace.back().objective)
              << ", feasibility gap " << fmt(trace.back().feasibility_gap) << ", " << trace.size()
              << " iterations\nwrote " << (out / "trace.csv").string() << " and " << (out / "x_hat.csv").string()
              << "\n";
    return kOk;
}

// ---------------------------------------------------------------- train

struct TrainOptions {
    Common common;
    std::map<std::string, std::string> flags;
    int jobs = 1;
};

json metrics_json(const ExperimentSpec& spec, std::uint64_t seed, const Metrics& m, const std::string& data_id,
                  const std::string& data_config, const UnrolledDecoder& decoder) {
    json j;
    CellSpec cell{spec.model.layers, spec.model.continuation_steps, spec.model.redundancy, spec.train.config.loss};
    j["cell"] = cell.key();
    j["layers"] = cell.layers;
    j["continuation_steps"] = cell.continuation_steps;
    j["redundancy"] = cell.redundancy;
    j["loss"] = to_string(cell.loss);
    j["seed"] = seed;
    j["dataset_id"] = data_id;
    j["dataset_config"] = data_config;
    j["status"] = "ok";
    j["train_loss"] = m.train_loss;
    j["val_loss"] = m.val_loss;
    j["test_loss"] = m.test_loss;
    j["ege"] = m.ege;
    j["best_epoch"] = m.best_epoch;
    j["epochs_run"] = m.epochs_run;
    j["initial_test_loss"] = m.history.front().test_loss;
    j["parameters"] = decoder.parameter_count();
    j["t1"] = decoder.t1();
    j["t2"] = decoder.t2();
    j["mu"] = decoder.mu();
    return j;
}

void train_one(const ExperimentSpec& base, const KeyValueConfig& cfg, std::uint64_t seed, const fs::path& dir,
               bool quiet) {
    ExperimentSpec spec = base;
    spec.seed = seed;
    spec.train.config.seed = derive_seed(seed, "shuffle");
    const TrainingData data = build_training_data(spec, seed);
    UnrolledDecoder decoder = build_decoder(spec, data.A, seed);
    const std::string tag = "[seed " + std::to_string(seed) + "] ";
    log(quiet, tag + "n=" + std::to_string(data.train.n()) + " m=" + std::to_string(data.train.m()) +
                   " N=" + std::to_string(decoder.N()) + " L=" + std::to_string(decoder.layers()) +
                   " J=" + std::to_string(spec.model.continuation_steps) + " train/val/test=" +
                   std::to_string(data.train.count()) + "/" + std::to_string(data.validation.count()) + "/" +
                   std::to_string(data.test.count()));
    const auto t0 = std::chrono::steady_clock::now();
    const TrainResult result = train(decoder, data, spec.train.config, [&](const EpochRecord& r) {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream s;
        s << tag << "epoch " << r.epoch << "  train " << std::setprecision(6) << r.train_loss << "  val "
          << r.val_loss << "  test " << r.test_loss << "  ege " << r.ege << "  (" << std::setprecision(3) << secs
          << " s)";
        log(quiet, s.str());
    });

    const std::string resolved = with_seed(cfg, seed);
    const std::string data_id = dataset_id(cfg, seed);
    const json metrics = metrics_json(spec, seed, result.metrics, data_id, data_config_id(cfg), decoder);
    write_checkpoint(dir / "model.bin", decoder);
    std::ostringstream history;
    write_history_csv(history, result.metrics.history);
    write_text_file(dir / "history.csv", history.str());
    write_text_file(dir / "metrics.json", metrics.dump(2) + "\n");
    for (const char* name : {"model.bin", "history.csv", "metrics.json"})
        write_sidecar(dir / name, resolved, json{{"seed", seed}, {"dataset_id", data_id}}.dump());
    std::ostringstream s;
    s << tag << "best epoch " << result.metrics.best_epoch << ": test " << fmt(result.metrics.test_loss) << ", EGE "
      << fmt(result.metrics.ege) << " -> " << dir.string();
    log(false, s.str());
}

int cmd_train(const TrainOptions& o) {
    const KeyValueConfig cfg = resolve_config(o.common, {}, o.flags);
    const ExperimentSpec spec = experiment_from_config(cfg);
    if (o.jobs < 1) throw ConfigError("--jobs must be >= 1");
    const fs::path out = output_dir(o.common, spec, cfg);
    std::vector<std::uint64_t> seeds = spec.seeds.empty() ? std::vector<std::uint64_t>{spec.seed} : spec.seeds;
    if (seeds.size() == 1) {
        train_one(spec, cfg, seeds.front(), out, o.common.quiet);
        return kOk;
    }
    // Several seeds: isolated sub-directories, optionally in parallel.
    std::atomic<std::size_t> next{0};
    std::vector<std::string> errors(seeds.size());
    std::vector<int> codes(seeds.size(), kOk);
    auto worker = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
            try {
                train_one(spec, cfg, seeds[i], out / ("seed-" + std::to_string(seeds[i])), o.common.quiet);
            } catch (const DivergenceError& e) {
                errors[i] = e.what();
                codes[i] = kDivergence;
            } catch (const std::exception& e) {
                errors[i] = e.what();
                codes[i] = kFailure;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min<int>(o.jobs, static_cast<int>(seeds.size())); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    int code = kOk;
    for (std::size_t i = 0; i < seeds.size(); ++i)
        if (codes[i] != kOk) {
            std::cerr << "seed " << seeds[i] << " failed: " << errors[i] << "\n";
            code = code == kOk ? codes[i] : code;
        }
    return code;
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
    Common common;
    std::string checkpoint;
    std::map<std::string, std::string> flags;
};

int cmd_eval(const EvalOptions& o) {
    const KeyValueConfig cfg = resolve_config(o.common, {}, o.flags);
    const ExperimentSpec spec = experiment_from_config(cfg);
    const UnrolledDecoder decoder = read_checkpoint(fs::path(o.checkpoint));
    const TrainingData data = build_training_data(spec, spec.seed);
    if (data.train.n() != decoder.n() || data.train.m() != decoder.m())
        throw ConfigError("checkpoint dimensions do not match the configured data");
    const int J = spec.model.continuation_steps;
    const LossKind loss = spec.train.config.loss;
    const Metrics m = evaluate(decoder, data.A, data.train, data.test, loss, J);
    json j;
    j["checkpoint"] = o.checkpoint;
    j["checkpoint_sha1"] = file_blob_sha1(o.checkpoint);
    j["continuation_steps"] = J;
    j["loss"] = to_string(loss);
    j["train_loss"] = m.train_loss;
    j["test_loss"] = m.test_loss;
    j["ege"] = m.ege;
    if (!data.validation.empty()) j["val_loss"] = evaluate_loss(decoder, data.A, data.validation, loss, J);
    std::cout << describe(decoder) << "train " << fmt(m.train_loss) << "  test " << fmt(m.test_loss) << "  EGE "
              << fmt(m.ege) << "\n";
    if (!o.common.out_dir.empty()) {
        const fs::path path = fs::path(o.common.out_dir) / "eval.json";
        write_text_file(path, j.dump(2) + "\n");
        write_sidecar(path, cfg.canonical());
    }
    return kOk;
}

// ---------------------------------------------------------------- landscape

struct LandscapeOptions {
    Common common;
    std::string checkpoint;
    std::map<std::string, std::string> flags;
    int points = 25;
    double range = 1.0;
    std::uint64_t direction_seed = 0;
    bool direction_seed_given = false;
    Index samples = 0;
    std::string split = "test";
};

int cmd_landscape(const LandscapeOptions& o) {
    const KeyValueConfig cfg = resolve_config(o.common, {}, o.flags);
    const ExperimentSpec spec = experiment_from_config(cfg);
    if (o.points < 3) throw ConfigError("--points must be >= 3");
    if (!(o.range > 0.0)) throw ConfigError("--range must be > 0");
    const fs::path ckpt(o.checkpoint);
    const std::string model_id = file_blob_sha1(ckpt);
    const UnrolledDecoder decoder = read_checkpoint(ckpt);
    const TrainingData data = build_training_data(spec, spec.seed);
    if (data.train.n() != decoder.n() || data.train.m() != decoder.m())
        throw ConfigError("checkpoint dimensions do not match the configured data");
    Dataset split;
    if (o.split == "test") {
        split = data.test;
    } else if (o.split == "train") {
        split = data.train;
    } else {
        throw ConfigError("--split must be train or test");
    }
    if (o.samples > 0 && o.samples < split.count()) split = split.subset(0, o.samples);

    const std::uint64_t dseed = o.direction_seed_given ? o.direction_seed : derive_seed(spec.seed, "directions");
    const Directions dirs = random_directions(decoder.W(), dseed);
    const auto axis = linspace(-o.range, o.range, o.points);
    ScanSettings settings{spec.train.config.loss, spec.model.continuation_steps};
    const auto t0 = std::chrono::steady_clock::now();
    LandscapeGrid grid = scan(decoder, data.A, split, dirs, axis, axis, settings);
    grid.meta.model_id = model_id;
    grid.meta.dataset_id = dataset_id(cfg, spec.seed);
    grid.meta.seed = dseed;
    grid.meta.direction_id = matrix_id(dirs.d1).substr(0, 16) + matrix_id(dirs.d2).substr(0, 16);
    if (file_blob_sha1(ckpt) != model_id) throw IoError("checkpoint changed during the scan");

    const fs::path out = output_dir(o.common, spec, cfg);
    std::ostringstream csv;
    write_grid_csv(csv, grid);
    write_text_file(out / "grid.csv", csv.str());
    json extra;
    extra["continuation_steps"] = settings.continuation_steps;
    extra["loss"] = to_string(settings.loss);
    extra["samples"] = split.count();
    extra["split"] = o.split;
    write_text_file(out / "grid.json", grid_meta_json(grid, extra.dump()));
    write_sidecar(out / "grid.csv", cfg.canonical(), json{{"direction_seed", dseed}}.dump());
    const Roughness r = roughness(grid);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << o.points << "x" << o.points << " grid, origin loss "
              << fmt(grid.losses(o.points / 2, o.points / 2)) << ", roughness " << fmt(r.value) << " over "
              << r.points << " points, " << grid.missing() << " missing (" << std::setprecision(3) << secs
              << " s)\nwrote " << (out / "grid.csv").string() << "\n";
    return kOk;
}

// ---------------------------------------------------------------- compare

struct CompareOptions {
    std::string results;
    std::string out;
};

int cmd_compare(const CompareOptions& o) {
    if (!fs::is_directory(o.results)) throw IoError("results directory not found: " + o.results);
    struct Run {
        json metrics;
        fs::path path;
    };
    std::vector<Run> runs;
    for (const auto& entry : fs::recursive_directory_iterator(o.results))
        if (entry.is_regular_file() && entry.path().filename() == "metrics.json") {
            try {
                runs.push_back({json::parse(read_text_file(entry.path())), entry.path()});
            } catch (const json::exception& e) {
                std::cerr << "skipping unreadable " << entry.path().string() << ": " << e.what() << "\n";
            }
        }
    std::sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) { return a.path < b.path; });
    if (runs.empty()) throw IoError("no completed runs (metrics.json) under " + o.results);

    // Runs of the same cell over different data are not averaged together.
    struct Group {
        std::string cell;
        std::string dataset;
        int layers = 0, steps = 0, redundancy = 0;
        std::string loss;
        std::vector<json> runs;
    };
    std::map<std::string, std::set<std::string>> datasets_per_cell;
    std::map<std::pair<std::string, std::string>, Group> groups;
    std::set<int> all_layers, all_steps, all_redundancy;
    std::set<std::string> all_losses, seen_cells;
    for (const auto& r : runs) {
        const json& m = r.metrics;
        const std::string cell = m.value("cell", "?");
        // Each seed draws its own data; only a differing data config separates runs.
        const std::string data_cfg = m.value("dataset_config", "");
        auto& g = groups[{cell, data_cfg}];
        g.cell = cell;
        g.dataset = data_cfg;
        g.layers = m.value("layers", 0);
        g.steps = m.value("continuation_steps", 0);
        g.redundancy = m.value("redundancy", 0);
        g.loss = m.value("loss", "?");
        g.runs.push_back(m);
        datasets_per_cell[cell].insert(data_cfg);
        all_layers.insert(g.layers);
        all_steps.insert(g.steps);
        all_redundancy.insert(g.redundancy);
        all_losses.insert(g.loss);
        seen_cells.insert(cell);
    }

    std::ostringstream csv;
    csv << "cell,layers,continuation_steps,redundancy,loss,runs,mean_test_loss,mean_ege,mean_train_loss,flag\n"
        << std::setprecision(17);
    std::ostringstream table;
    table << std::left << std::setw(28) << "cell" << std::right << std::setw(6) << "runs" << std::setw(16)
          << "test loss" << std::setw(16) << "EGE" << "  note\n";
    for (const auto& [key, g] : groups) {
        double test = 0, ege = 0, tr = 0;
        for (const auto& m : g.runs) {
            test += m.value("test_loss", 0.0);
            ege += m.value("ege", 0.0);
            tr += m.value("train_loss", 0.0);
        }
        const double k = static_cast<double>(g.runs.size());
        const std::string flag = datasets_per_cell[g.cell].size() > 1 ? "heterogeneous" : "";
        csv << g.cell << ',' << g.layers << ',' << g.steps << ',' << g.redundancy << ',' << g.loss << ','
            << g.runs.size() << ',' << test / k << ',' << ege / k << ',' << tr / k << ',' << flag << '\n';
        table << std::left << std::setw(28) << g.cell << std::right << std::setw(6) << g.runs.size()
              << std::setw(16) << std::setprecision(6) << test / k << std::setw(16) << ege / k << "  " << flag
              << "\n";
    }
    std::vector<std::string> missing;
    for (int L : all_layers)
        for (int J : all_steps)
            for (int R : all_redundancy)
                for (const auto& loss : all_losses) {
                    CellSpec c{L, J, R, loss_kind_from_string(loss)};
                    if (!seen_cells.count(c.key())) missing.push_back(c.key());
                }
    std::cout << table.str();
    if (!missing.empty()) {
        std::cout << "missing cells:";
        for (const auto& m : missing) std::cout << " " << m;
        std::cout << "\n";
    }
    const fs::path out = o.out.empty() ? fs::path(o.results) / "summary.csv" : fs::path(o.out);
    write_text_file(out, csv.str());
    std::cout << "wrote " << out.string() << "\n";
    return kOk;
}

// ---------------------------------------------------------------- gen-data

struct GenOptions {
    Common common;
    std::map<std::string, std::string> flags;
    int preview = 0;
};

int cmd_gen_data(const GenOptions& o) {
    const KeyValueConfig cfg = resolve_config(o.common, {}, o.flags);
    const ExperimentSpec spec = experiment_from_config(cfg);
    const TrainingData data = build_splits(spec, spec.seed);
    const fs::path out = output_dir(o.common, spec, cfg);
    fs::create_directories(out);
    write_dataset_cache(out / "train.bin", data.train);
    write_dataset_cache(out / "test.bin", data.test);
    const std::string resolved = cfg.canonical();
    for (const char* name : {"train.bin", "test.bin"})
        write_sidecar(out / name, resolved, json{{"n", data.train.n()}, {"m", data.train.m()}}.dump());
    const auto side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(data.train.n()))));
    if (o.preview > 0 && side * side == data.train.n()) {
        for (Index i = 0; i < std::min<Index>(o.preview, data.train.count()); ++i)
            write_png_grayscale(out / ("preview-" + std::to_string(i) + ".png"),
                                data.train.x.col(i).cwiseMax(0.0).cwiseMin(1.0), side, side);
    }
    std::cout << "n=" << data.train.n() << " m=" << data.train.m() << " train=" << data.train.count()
              << " test=" << data.test.count() << "\nwrote " << (out / "train.bin").string() << " and "
              << (out / "test.bin").string() << "\n";
    return kOk;
}

// Flags that map one-to-one onto config keys.
void add_model_flags(CLI::App* cmd, std::map<std::string, std::string>& flags) {
    auto bind = [&](const std::string& name, const std::string& key, const std::string& help) {
        cmd->add_option_function<std::string>(
            name, [&flags, key](const std::string& v) { flags[key] = v; }, help);
    };
    bind("--seed", "experiment.seed", "root seed");
    bind("--seeds", "experiment.seeds", "comma-separated root seeds (one run each)");
    bind("--layers", "model.layers", "unrolled layers L");
    bind("--continuation-steps", "model.continuation_steps", "continuation steps J");
    bind("--redundancy", "model.redundancy", "N = redundancy * n");
    bind("--mu", "model.mu", "penalty mu");
    bind("--loss", "train.loss", "log-cosh or mse");
    bind("--epochs", "train.max_epochs", "maximum epochs");
    bind("--lr", "train.learning_rate", "Adam learning rate");
    bind("--batch-size", "train.batch_size", "minibatch size");
    bind("--source", "data.source", "synthetic-digits | idx | png | sparse | cache");
    bind("--train-path", "data.train_path", "training images / cache");
    bind("--test-path", "data.test_path", "test images / cache");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continued unrolled decoders for compressed sensing"};
    app.require_subcommand(1);

    SolveOptions solve_o;
    auto* solve_cmd = app.add_subcommand("solve", "model-based reconstruction of one measured sample");
    add_common(solve_cmd, solve_o.common);
    solve_cmd->add_option("-J,--continuation-steps", solve_o.steps, "warm-start steps (1 = plain solver)");
    solve_cmd->add_option("--iters", solve_o.iters, "solver iterations per continuation step");
    solve_cmd->add_option("--rel-tol", solve_o.rel_tol, "stop a step early on relative x change below this");
    solve_cmd->add_option("--sample", solve_o.sample, "index into the test split");
    solve_cmd->add_option("--operator", solve_o.operator_kind, "identity or beta (random redundant operator)");
    solve_cmd->add_option("--checkpoint", solve_o.checkpoint, "use the operator of a trained decoder");
    solve_cmd->add_option("--seed", solve_o.seed, "root seed")->each([&](const std::string&) {
        solve_o.seed_given = true;
    });

    TrainOptions train_o;
    auto* train_cmd = app.add_subcommand("train", "train a (continued) unrolled decoder");
    add_common(train_cmd, train_o.common);
    add_model_flags(train_cmd, train_o.flags);
    train_cmd->add_option("--jobs", train_o.jobs, "parallel seeds when several are given");

    EvalOptions eval_o;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the configured data");
    add_common(eval_cmd, eval_o.common);
    add_model_flags(eval_cmd, eval_o.flags);
    eval_cmd->add_option("--checkpoint", eval_o.checkpoint, "decoder checkpoint")->required();

    LandscapeOptions land_o;
    auto* land_cmd = app.add_subcommand("landscape", "loss over a 2-D slice around a trained operator");
    add_common(land_cmd, land_o.common);
    add_model_flags(land_cmd, land_o.flags);
    land_cmd->add_option("--checkpoint", land_o.checkpoint, "decoder checkpoint")->required();
    land_cmd->add_option("--points", land_o.points, "grid points per axis");
    land_cmd->add_option("--range", land_o.range, "axes span [-range, range]");
    land_cmd->add_option("--samples", land_o.samples, "evaluate on the first K samples of the split (0 = all)");
    land_cmd->add_option("--split", land_o.split, "train or test");
    land_cmd->add_option("--direction-seed", land_o.direction_seed, "seed of the two random directions")
        ->each([&](const std::string&) { land_o.direction_seed_given = true; });

    CompareOptions cmp_o;
    auto* cmp_cmd = app.add_subcommand("compare", "seed-averaged summary of training runs");
    cmp_cmd->add_option("results", cmp_o.results, "directory searched for metrics.json")->required();
    cmp_cmd->add_option("-o,--out", cmp_o.out, "summary CSV (default: <results>/summary.csv)");

    GenOptions gen_o;
    auto* gen_cmd = app.add_subcommand("gen-data", "build and cache measured train/test splits");
    add_common(gen_cmd, gen_o.common);
    add_model_flags(gen_cmd, gen_o.flags);
    gen_cmd->add_option("--preview", gen_o.preview, "also write the first K training images as PNG");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*solve_cmd) return cmd_solve(solve_o);
        if (*train_cmd) return cmd_train(train_o);
        if (*eval_cmd) return cmd_eval(eval_o);
        if (*land_cmd) return cmd_landscape(land_o);
        if (*cmp_cmd) return cmd_compare(cmp_o);
        if (*gen_cmd) return cmd_gen_data(gen_o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kConfig;
    } catch (const DivergenceError& e) {
        std::cerr << "diverged: " << e.what() << "\n";
        return kDivergence;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kIo;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}
