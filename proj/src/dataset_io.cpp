#include "cdec/dataset_io.hpp"

#include <glob.h>
#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>

#include "cdec/errors.hpp"
#include "cdec/rng.hpp"

namespace cdec {

namespace fs = std::filesystem;

namespace {

constexpr std::uint32_t kIdxImages = 0x00000803;
constexpr std::uint32_t kIdxLabels = 0x00000801;

std::vector<unsigned char> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t offset, const fs::path& path) {
    if (offset + 4 > buf.size()) throw FormatError(path.string() + ": truncated IDX header", offset);
    return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
           (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void write_be32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                                static_cast<char>(v)};
    out.write(b.data(), 4);
}

}  // namespace

ImageSet downsample(const ImageSet& images, int factor) {
    if (factor < 1) throw InvalidArgument("downsample: factor must be >= 1");
    if (factor == 1) return images;
    if (images.rows % factor != 0 || images.cols % factor != 0)
        throw InvalidArgument("downsample: factor must divide the image sides");
    ImageSet out;
    out.rows = images.rows / factor;
    out.cols = images.cols / factor;
    out.pixels.resize(static_cast<Index>(out.rows) * out.cols, images.count());
    const double inv = 1.0 / (factor * factor);
    for (Index c = 0; c < images.count(); ++c)
        for (int r = 0; r < out.rows; ++r)
            for (int q = 0; q < out.cols; ++q) {
                double acc = 0.0;
                for (int dr = 0; dr < factor; ++dr)
                    for (int dq = 0; dq < factor; ++dq)
                        acc += images.pixels((r * factor + dr) * images.cols + q * factor + dq, c);
                out.pixels(r * out.cols + q, c) = acc * inv;
            }
    return out;
}

ImageSet load_idx_images(const fs::path& path, int downsample_factor, std::size_t limit) {
    const auto buf = read_file(path);
    const auto magic = read_be32(buf, 0, path);
    if (magic != kIdxImages)
        throw FormatError(path.string() + ": bad IDX image magic " + std::to_string(magic), 0);
    const auto count = read_be32(buf, 4, path);
    const auto rows = read_be32(buf, 8, path);
    const auto cols = read_be32(buf, 12, path);
    if (rows == 0 || cols == 0) throw FormatError(path.string() + ": zero image side", 8);
    const std::size_t pixels = std::size_t{rows} * cols;
    const std::size_t take = limit ? std::min<std::size_t>(limit, count) : count;
    const std::size_t need = 16 + take * pixels;
    if (buf.size() < need) {
        const std::size_t complete = (buf.size() - 16) / pixels;
        throw FormatError(path.string() + ": truncated after " + std::to_string(complete) + " of " +
                              std::to_string(count) + " images",
                          buf.size());
    }
    ImageSet images;
    images.rows = static_cast<int>(rows);
    images.cols = static_cast<int>(cols);
    images.pixels.resize(static_cast<Index>(pixels), static_cast<Index>(take));
    for (std::size_t i = 0; i < take; ++i)
        for (std::size_t p = 0; p < pixels; ++p)
            images.pixels(static_cast<Index>(p), static_cast<Index>(i)) = buf[16 + i * pixels + p] / 255.0;
    return downsample(images, downsample_factor);
}

std::vector<std::uint8_t> load_idx_labels(const fs::path& path) {
    const auto buf = read_file(path);
    const auto magic = read_be32(buf, 0, path);
    if (magic != kIdxLabels) throw FormatError(path.string() + ": bad IDX label magic " + std::to_string(magic), 0);
    const auto count = read_be32(buf, 4, path);
    if (buf.size() < 8 + std::size_t{count}) throw FormatError(path.string() + ": truncated label file", buf.size());
    return std::vector<std::uint8_t>(buf.begin() + 8, buf.begin() + 8 + count);
}

void write_idx_images(const fs::path& path, const ImageSet& images) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write_be32(out, kIdxImages);
    write_be32(out, static_cast<std::uint32_t>(images.count()));
    write_be32(out, static_cast<std::uint32_t>(images.rows));
    write_be32(out, static_cast<std::uint32_t>(images.cols));
    for (Index c = 0; c < images.count(); ++c)
        for (Index p = 0; p < images.dimension(); ++p) {
            const double v = std::clamp(images.pixels(p, c), 0.0, 1.0);
            out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
        }
    if (!out) throw IoError("write failed for " + path.string());
}

namespace {

std::vector<std::string> expand_pattern(const std::string& pattern) {
    std::string effective = pattern;
    if (fs::is_directory(pattern)) effective = (fs::path(pattern) / "*.png").string();
    glob_t g{};
    const int rc = ::glob(effective.c_str(), 0, nullptr, &g);
    std::vector<std::string> out;
    if (rc == 0)
        for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
    globfree(&g);
    if (rc != 0 && rc != GLOB_NOMATCH) throw IoError("glob failed for " + pattern);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

ImageSet load_png_grayscale(const std::string& pattern) {
    const auto files = expand_pattern(pattern);
    if (files.empty()) throw IoError("no images match " + pattern);
    ImageSet images;
    std::vector<Vector> columns;
    for (const auto& file : files) {
        png_image image{};
        image.version = PNG_IMAGE_VERSION;
        if (!png_image_begin_read_from_file(&image, file.c_str()))
            throw FormatError(file + ": " + image.message, 0);
        image.format = PNG_FORMAT_RGB;
        std::vector<unsigned char> rgb(PNG_IMAGE_SIZE(image));
        if (!png_image_finish_read(&image, nullptr, rgb.data(), 0, nullptr)) {
            png_image_free(&image);
            throw FormatError(file + ": " + image.message, 0);
        }
        const int h = static_cast<int>(image.height);
        const int w = static_cast<int>(image.width);
        if (columns.empty()) {
            images.rows = h;
            images.cols = w;
        } else if (h != images.rows || w != images.cols) {
            throw FormatError(file + ": size " + std::to_string(h) + "x" + std::to_string(w) + " differs from " +
                                  std::to_string(images.rows) + "x" + std::to_string(images.cols),
                              0);
        }
        Vector v(static_cast<Index>(h) * w);
        for (Index p = 0; p < v.size(); ++p) {
            const auto* px = &rgb[static_cast<std::size_t>(p) * 3];
            v(p) = (0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]) / 255.0;
        }
        columns.push_back(std::move(v));
    }
    images.pixels.resize(static_cast<Index>(images.rows) * images.cols, static_cast<Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) images.pixels.col(static_cast<Index>(c)) = columns[c];
    return images;
}

void write_png_grayscale(const fs::path& path, const Vector& image, int rows, int cols) {
    if (image.size() != static_cast<Index>(rows) * cols) throw InvalidArgument("write_png_grayscale: size mismatch");
    std::vector<unsigned char> gray(static_cast<std::size_t>(image.size()));
    for (Index p = 0; p < image.size(); ++p)
        gray[static_cast<std::size_t>(p)] =
            static_cast<unsigned char>(std::lround(std::clamp(image(p), 0.0, 1.0) * 255.0));
    png_image out{};
    out.version = PNG_IMAGE_VERSION;
    out.width = static_cast<png_uint_32>(cols);
    out.height = static_cast<png_uint_32>(rows);
    out.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&out, path.c_str(), 0, gray.data(), 0, nullptr))
        throw IoError("cannot write " + path.string() + ": " + out.message);
}

// ---------------------------------------------------------------------------
// Synthetic digits

namespace {

struct Point {
    double x, y;
};
using Stroke = std::vector<Point>;
using Glyph = std::vector<Stroke>;

Stroke ellipse(double cx, double cy, double rx, double ry, int segments = 16) {
    Stroke s;
    for (int i = 0; i <= segments; ++i) {
        const double a = 2.0 * std::numbers::pi * i / segments;
        s.push_back({cx + rx * std::cos(a), cy + ry * std::sin(a)});
    }
    return s;
}

// Unit-square glyphs, y pointing down.
const std::array<Glyph, 10>& glyphs() {
    static const std::array<Glyph, 10> g = {
        Glyph{ellipse(0.5, 0.5, 0.2, 0.32)},
        Glyph{{{0.42, 0.27}, {0.55, 0.15}, {0.55, 0.85}}},
        Glyph{{{0.3, 0.3}, {0.4, 0.17}, {0.6, 0.17}, {0.7, 0.3}, {0.65, 0.45}, {0.3, 0.85}, {0.72, 0.85}}},
        Glyph{{{0.3, 0.2}, {0.6, 0.15}, {0.7, 0.3}, {0.5, 0.48}, {0.72, 0.65}, {0.6, 0.85}, {0.3, 0.8}}},
        Glyph{{{0.62, 0.85}, {0.62, 0.15}, {0.28, 0.6}, {0.76, 0.6}}},
        Glyph{{{0.7, 0.15}, {0.35, 0.15}, {0.32, 0.45}, {0.6, 0.42}, {0.72, 0.6}, {0.6, 0.83}, {0.3, 0.8}}},
        Glyph{{{0.65, 0.15}, {0.4, 0.35}, {0.3, 0.65}, {0.45, 0.85}, {0.65, 0.78}, {0.68, 0.6}, {0.5, 0.5},
               {0.33, 0.6}}},
        Glyph{{{0.28, 0.15}, {0.72, 0.15}, {0.45, 0.85}}},
        Glyph{ellipse(0.5, 0.32, 0.16, 0.16), ellipse(0.5, 0.67, 0.2, 0.18)},
        Glyph{ellipse(0.5, 0.33, 0.17, 0.17), {{0.67, 0.35}, {0.6, 0.85}}},
    };
    return g;
}

double segment_distance(Point p, Point a, Point b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double ex = p.x - (a.x + t * dx), ey = p.y - (a.y + t * dy);
    return std::sqrt(ex * ex + ey * ey);
}

}  // namespace

ImageSet synthetic_digit_images(Index count, int side, std::uint64_t seed) {
    if (count < 0 || side < 8) throw InvalidArgument("synthetic_digit_images: need count >= 0 and side >= 8");
    auto engine = make_engine(seed);
    std::uniform_int_distribution<int> digit(0, 9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto between = [&](double lo, double hi) { return lo + (hi - lo) * unit(engine); };

    ImageSet images;
    images.rows = side;
    images.cols = side;
    images.pixels = Matrix::Zero(static_cast<Index>(side) * side, count);
    for (Index c = 0; c < count; ++c) {
        const Glyph& glyph = glyphs()[static_cast<std::size_t>(digit(engine))];
        const double angle = between(-0.25, 0.25);
        const double sx = between(0.8, 1.1), sy = between(0.85, 1.1);
        const double shear = between(-0.2, 0.2);
        const double tx = between(-0.07, 0.07), ty = between(-0.07, 0.07);
        const double width = between(0.045, 0.08);  // stroke half-width in unit coordinates
        const double ink = between(0.8, 1.0);
        const double ca = std::cos(angle), sa = std::sin(angle);

        std::vector<std::pair<Point, Point>> segments;
        for (const auto& stroke : glyph)
            for (std::size_t k = 0; k + 1 < stroke.size(); ++k) {
                auto map = [&](Point p) {
                    const double u = (p.x - 0.5) * sx + shear * (p.y - 0.5);
                    const double v = (p.y - 0.5) * sy;
                    return Point{0.5 + ca * u - sa * v + tx, 0.5 + sa * u + ca * v + ty};
                };
                segments.emplace_back(map(stroke[k]), map(stroke[k + 1]));
            }
        const double pixel = 1.0 / side;
        for (int r = 0; r < side; ++r)
            for (int q = 0; q < side; ++q) {
                const Point p{(q + 0.5) * pixel, (r + 0.5) * pixel};
                double d = 1e9;
                for (const auto& [a, b] : segments) d = std::min(d, segment_distance(p, a, b));
                // One-pixel linear ramp at the stroke edge.
                const double value = std::clamp((width - d) / pixel + 0.5, 0.0, 1.0) * ink;
                images.pixels(r * side + q, c) = value;
            }
    }
    return images;
}

// ---------------------------------------------------------------------------
// Dataset cache

namespace {

void write_le32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                                static_cast<char>(v >> 24)};
    out.write(b.data(), 4);
}

void write_doubles(std::ostream& out, const double* data, std::size_t count) {
    static_assert(sizeof(double) == 8);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, data + i, 8);
        std::array<char, 8> b;
        for (int k = 0; k < 8; ++k) b[static_cast<std::size_t>(k)] = static_cast<char>(bits >> (8 * k));
        out.write(b.data(), 8);
    }
}

std::uint32_t le32_at(const std::vector<unsigned char>& buf, std::size_t off) {
    return std::uint32_t{buf[off]} | (std::uint32_t{buf[off + 1]} << 8) | (std::uint32_t{buf[off + 2]} << 16) |
           (std::uint32_t{buf[off + 3]} << 24);
}

void read_doubles(const std::vector<unsigned char>& buf, std::size_t& off, double* dst, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i, off += 8) {
        std::uint64_t bits = 0;
        for (int k = 0; k < 8; ++k) bits |= std::uint64_t{buf[off + static_cast<std::size_t>(k)]} << (8 * k);
        std::memcpy(dst + i, &bits, 8);
    }
}

}  // namespace

void write_dataset_cache(const fs::path& path, const Dataset& data) {
    data.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write_le32(out, kDatasetCacheMagic);
    write_le32(out, static_cast<std::uint32_t>(data.n()));
    write_le32(out, static_cast<std::uint32_t>(data.m()));
    write_le32(out, static_cast<std::uint32_t>(data.count()));
    write_doubles(out, data.x.data(), static_cast<std::size_t>(data.x.size()));
    write_doubles(out, data.y.data(), static_cast<std::size_t>(data.y.size()));
    write_doubles(out, data.eps.data(), static_cast<std::size_t>(data.eps.size()));
    write_doubles(out, data.x0.data(), static_cast<std::size_t>(data.x0.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

Dataset read_dataset_cache(const fs::path& path, Split split) {
    const auto buf = read_file(path);
    if (buf.size() < 16) throw FormatError(path.string() + ": truncated dataset header", buf.size());
    if (le32_at(buf, 0) != kDatasetCacheMagic) throw FormatError(path.string() + ": bad dataset cache magic", 0);
    const Index n = le32_at(buf, 4), m = le32_at(buf, 8), count = le32_at(buf, 12);
    const std::size_t doubles = static_cast<std::size_t>((2 * n + m + 1) * count);
    if (buf.size() != 16 + 8 * doubles)
        throw FormatError(path.string() + ": payload size does not match header", std::min(buf.size(), 16 + 8 * doubles));
    Dataset d{Matrix(n, count), Matrix(m, count), Vector(count), Matrix(n, count), split};
    std::size_t off = 16;
    read_doubles(buf, off, d.x.data(), static_cast<std::size_t>(d.x.size()));
    read_doubles(buf, off, d.y.data(), static_cast<std::size_t>(d.y.size()));
    read_doubles(buf, off, d.eps.data(), static_cast<std::size_t>(d.eps.size()));
    read_doubles(buf, off, d.x0.data(), static_cast<std::size_t>(d.x0.size()));
    return d;
}

}  // namespace cdec
