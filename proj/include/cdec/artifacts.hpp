#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "cdec/types.hpp"

namespace cdec {

// SHA-1 of "blob <size>\0<bytes>", i.e. the id git would give the content.
std::string git_blob_sha1(std::string_view bytes);
std::string file_blob_sha1(const std::filesystem::path& path);

// Hash of the raw little-endian doubles of M (column-major) plus its shape.
std::string matrix_id(const Matrix& M);

// Writes text to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

// Writes `<artifact>.meta.json` next to an existing artifact: its content hash,
// the resolved configuration text, a creation timestamp and optional extra
// fields (a JSON object given as text).
void write_sidecar(const std::filesystem::path& artifact, const std::string& resolved_config,
                   const std::string& extra_json = "{}");

}  // namespace cdec
