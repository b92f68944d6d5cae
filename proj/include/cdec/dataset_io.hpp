#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cdec/sensing.hpp"
#include "cdec/types.hpp"

namespace cdec {

// Grayscale images in [0, 1], one vectorized (row-major) image per column.
struct ImageSet {
    Matrix pixels;  // (rows*cols) x count
    int rows = 0;
    int cols = 0;

    Index count() const { return pixels.cols(); }
    Index dimension() const { return pixels.rows(); }
};

// Average pooling by an integer factor that divides both sides.
ImageSet downsample(const ImageSet& images, int factor);

// IDX image file (magic 0x00000803, unsigned bytes). Pixel values are scaled
// to [0, 1]; `downsample_factor` > 1 average-pools each image. `limit` caps
// how many images are read (0 = all).
ImageSet load_idx_images(const std::filesystem::path& path, int downsample_factor = 1, std::size_t limit = 0);

// IDX label file (magic 0x00000801).
std::vector<std::uint8_t> load_idx_labels(const std::filesystem::path& path);

// Writes images as IDX unsigned bytes; values are rounded from [0, 1] to 0..255.
void write_idx_images(const std::filesystem::path& path, const ImageSet& images);

// All files matching a shell-style pattern (a directory means "every *.png in it"),
// in lexicographic order, converted with luminance 0.299 R + 0.587 G + 0.114 B.
ImageSet load_png_grayscale(const std::string& pattern);

void write_png_grayscale(const std::filesystem::path& path, const Vector& image, int rows, int cols);

// Procedurally drawn handwritten-style digits: stroke glyphs under random
// affine jitter and stroke width, rendered anti-aliased at side x side.
// Deterministic in `seed`.
ImageSet synthetic_digit_images(Index count, int side, std::uint64_t seed);

// Flat little-endian cache: 16-byte header (magic, n, m, count as uint32)
// followed by x, y, eps, x0 as doubles, each matrix column-major.
void write_dataset_cache(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset_cache(const std::filesystem::path& path, Split split = Split::train);

inline constexpr std::uint32_t kDatasetCacheMagic = 0x43444331;  // "CDC1"

}  // namespace cdec
