#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cdec {

using Engine = std::mt19937_64;

// Deterministic child seed for a named consumer ("data", "init", "directions", ...).
// All randomness in an experiment descends from one root seed through this.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index);

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

}  // namespace cdec
