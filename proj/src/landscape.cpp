#include "cdec/landscape.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>

#include <json.hpp>

#include "cdec/errors.hpp"
#include "cdec/rng.hpp"
#include "cdec/trainer.hpp"

namespace cdec {

namespace {

Matrix scaled_direction(const Matrix& W, std::uint64_t seed) {
    auto engine = make_engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix D(W.rows(), W.cols());
    for (Index i = 0; i < D.rows(); ++i)
        for (Index j = 0; j < D.cols(); ++j) D(i, j) = normal(engine);
    for (Index i = 0; i < D.rows(); ++i) {
        const double target = W.row(i).norm();
        const double norm = D.row(i).norm();
        if (target == 0.0 || norm == 0.0) {
            D.row(i).setZero();
        } else {
            D.row(i) *= target / norm;
        }
    }
    return D;
}

bool uniform(const std::vector<double>& axis) {
    if (axis.size() < 2) return true;
    const double h = axis[1] - axis[0];
    for (std::size_t i = 1; i < axis.size(); ++i)
        if (std::abs((axis[i] - axis[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h))) return false;
    return h > 0.0;
}

void check_axis(const std::vector<double>& axis, const char* name) {
    if (axis.empty()) throw InvalidArgument(std::string("scan: empty ") + name + " axis");
    bool has_zero = false;
    for (std::size_t i = 0; i < axis.size(); ++i) {
        if (!std::isfinite(axis[i])) throw InvalidArgument(std::string("scan: non-finite ") + name + " value");
        if (i > 0 && !(axis[i] > axis[i - 1])) throw InvalidArgument(std::string("scan: ") + name + " not sorted");
        has_zero = has_zero || axis[i] == 0.0;
    }
    if (!has_zero) throw InvalidArgument(std::string("scan: ") + name + " axis must contain 0");
}

}  // namespace

Directions random_directions(const Matrix& W, std::uint64_t seed) {
    if (W.size() == 0) throw InvalidArgument("random_directions: empty W");
    return {scaled_direction(W, derive_seed(seed, "direction", 0)), scaled_direction(W, derive_seed(seed, "direction", 1))};
}

Index LandscapeGrid::missing() const { return (losses.array() != losses.array()).count(); }

std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) throw InvalidArgument("linspace: count must be >= 1");
    if (count == 1) return {lo};
    std::vector<double> out(static_cast<std::size_t>(count));
    const int mid2 = count - 1;
    for (int i = 0; i < count; ++i) {
        // Symmetric evaluation keeps mirrored points exact negatives of each other.
        out[static_cast<std::size_t>(i)] = (lo * (mid2 - i) + hi * i) / mid2;
    }
    if (lo == -hi && count % 2 == 1) out[static_cast<std::size_t>(count / 2)] = 0.0;
    return out;
}

LandscapeGrid scan(const UnrolledDecoder& decoder, const Matrix& A, const Dataset& split, const Directions& dirs,
                   const std::vector<double>& alphas, const std::vector<double>& betas, const ScanSettings& settings) {
    check_axis(alphas, "alpha");
    check_axis(betas, "beta");
    const Matrix& W = decoder.W();
    if (dirs.d1.rows() != W.rows() || dirs.d1.cols() != W.cols() || dirs.d2.rows() != W.rows() ||
        dirs.d2.cols() != W.cols())
        throw InvalidArgument("scan: directions must have the shape of W");
    if (split.empty()) throw InvalidArgument("scan: empty split");

    LandscapeGrid grid;
    grid.alphas = alphas;
    grid.betas = betas;
    grid.losses.resize(static_cast<Index>(alphas.size()), static_cast<Index>(betas.size()));

    UnrolledDecoder probe = decoder;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        for (std::size_t j = 0; j < betas.size(); ++j) {
            if (alphas[i] == 0.0 && betas[j] == 0.0) {
                probe.set_W(W);
            } else {
                probe.set_W(W + alphas[i] * dirs.d1 + betas[j] * dirs.d2);
            }
            double value = std::numeric_limits<double>::quiet_NaN();
            try {
                value = evaluate_loss(probe, A, split, settings.loss, settings.continuation_steps);
            } catch (const DivergenceError&) {
            }
            if (!std::isfinite(value)) value = std::numeric_limits<double>::quiet_NaN();
            grid.losses(static_cast<Index>(i), static_cast<Index>(j)) = value;
        }
    }
    return grid;
}

Roughness roughness(const LandscapeGrid& grid, RoughnessScale scale) {
    const Index na = grid.losses.rows(), nb = grid.losses.cols();
    if (na != static_cast<Index>(grid.alphas.size()) || nb != static_cast<Index>(grid.betas.size()))
        throw InvalidArgument("roughness: grid does not match its axes");
    if (!uniform(grid.alphas) || !uniform(grid.betas)) throw InvalidArgument("roughness: axes must be uniformly spaced");

    Matrix f = grid.losses;
    if (scale == RoughnessScale::log) {
        for (Index i = 0; i < na; ++i)
            for (Index j = 0; j < nb; ++j) {
                const double v = f(i, j);
                f(i, j) = v > 0.0 ? std::log(v) : std::numeric_limits<double>::quiet_NaN();
            }
    }
    Roughness r;
    if (na < 3 || nb < 3) return r;
    const double ha = grid.alphas[1] - grid.alphas[0];
    const double hb = grid.betas[1] - grid.betas[0];
    double sum = 0.0;
    for (Index i = 1; i + 1 < na; ++i) {
        for (Index j = 1; j + 1 < nb; ++j) {
            const double c = f(i, j);
            const double lap = (f(i + 1, j) - 2.0 * c + f(i - 1, j)) / (ha * ha) +
                               (f(i, j + 1) - 2.0 * c + f(i, j - 1)) / (hb * hb);
            if (!std::isfinite(lap)) continue;
            sum += std::abs(lap);
            ++r.points;
        }
    }
    if (r.points > 0) r.value = sum / static_cast<double>(r.points);
    return r;
}

void write_grid_csv(std::ostream& out, const LandscapeGrid& grid) {
    out << "alpha,beta,loss\n" << std::setprecision(17);
    for (std::size_t i = 0; i < grid.alphas.size(); ++i)
        for (std::size_t j = 0; j < grid.betas.size(); ++j) {
            const double v = grid.losses(static_cast<Index>(i), static_cast<Index>(j));
            out << grid.alphas[i] << ',' << grid.betas[j] << ',';
            if (std::isnan(v)) {
                out << "nan";
            } else {
                out << v;
            }
            out << '\n';
        }
}

std::string grid_meta_json(const LandscapeGrid& grid, const std::string& extra_json) {
    nlohmann::ordered_json j;
    j["model_id"] = grid.meta.model_id;
    j["dataset_id"] = grid.meta.dataset_id;
    j["seed"] = grid.meta.seed;
    j["normalization"] = grid.meta.normalization;
    j["direction_id"] = grid.meta.direction_id;
    j["alpha_count"] = grid.alphas.size();
    j["beta_count"] = grid.betas.size();
    j["alpha_range"] = {grid.alphas.front(), grid.alphas.back()};
    j["beta_range"] = {grid.betas.front(), grid.betas.back()};
    j["missing"] = grid.missing();
    const Roughness r = roughness(grid);
    j["roughness"] = r.value;
    j["roughness_points"] = r.points;
    const auto extra = nlohmann::ordered_json::parse(extra_json);
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    return j.dump(2) + "\n";
}

}  // namespace cdec
