#include "cdec/artifacts.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "cdec/errors.hpp"

namespace cdec {

namespace {

std::string hex(const unsigned char* digest, std::size_t n) {
    std::ostringstream out;
    out << std::hex << std::setfill('0');
    for (std::size_t i = 0; i < n; ++i) out << std::setw(2) << static_cast<int>(digest[i]);
    return out.str();
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

}  // namespace

std::string git_blob_sha1(std::string_view bytes) {
    const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw std::runtime_error("git_blob_sha1: out of memory");
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                    EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, digest, &length) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw std::runtime_error("git_blob_sha1: digest failed");
    return hex(digest, length);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string file_blob_sha1(const std::filesystem::path& path) { return git_blob_sha1(read_text_file(path)); }

std::string matrix_id(const Matrix& M) {
    std::string bytes;
    const auto rows = static_cast<std::int64_t>(M.rows()), cols = static_cast<std::int64_t>(M.cols());
    bytes.append(reinterpret_cast<const char*>(&rows), sizeof rows);
    bytes.append(reinterpret_cast<const char*>(&cols), sizeof cols);
    bytes.append(reinterpret_cast<const char*>(M.data()), static_cast<std::size_t>(M.size()) * sizeof(double));
    return git_blob_sha1(bytes);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write to " + path.string() + " failed");
}

void write_sidecar(const std::filesystem::path& artifact, const std::string& resolved_config,
                   const std::string& extra_json) {
    nlohmann::ordered_json j;
    j["artifact"] = artifact.filename().string();
    j["content_sha1"] = file_blob_sha1(artifact);
    j["config"] = resolved_config;
    j["config_sha1"] = git_blob_sha1(resolved_config);
    j["created_utc"] = utc_timestamp();
    nlohmann::ordered_json extra;
    try {
        extra = nlohmann::ordered_json::parse(extra_json);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("write_sidecar: extra fields are not JSON: ") + e.what());
    }
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    write_text_file(artifact.string() + ".meta.json", j.dump(2) + "\n");
}

}  // namespace cdec
