#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "cdec/unfolded_net.hpp"

namespace cdec {

inline constexpr std::uint32_t kCheckpointMagic = 0x43444543;  // "CDEC"
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Little-endian layout:
//   u32 magic, u32 version, u32 L, u32 N, u32 n, u32 m,
//   f64 t1, f64 t2, f64 mu, u32 form,
//   N*n f64 of W in row-major order.
void write_checkpoint(std::ostream& out, const UnrolledDecoder& decoder);
void write_checkpoint(const std::filesystem::path& path, const UnrolledDecoder& decoder);

UnrolledDecoder read_checkpoint(std::istream& in);
UnrolledDecoder read_checkpoint(const std::filesystem::path& path);

std::size_t checkpoint_size(const UnrolledDecoder& decoder);

}  // namespace cdec
