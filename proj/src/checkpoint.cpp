#include "cdec/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "cdec/errors.hpp"

namespace cdec {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, std::uint64_t& offset) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) throw FormatError("checkpoint: truncated", offset);
    offset += sizeof(T);
    return value;
}

std::uint32_t narrow(Index v, const char* what) {
    if (v < 0 || v > static_cast<Index>(UINT32_MAX)) throw InvalidArgument(std::string("checkpoint: ") + what + " out of range");
    return static_cast<std::uint32_t>(v);
}

}  // namespace

std::size_t checkpoint_size(const UnrolledDecoder& d) {
    return 6 * 4 + 3 * 8 + 4 + static_cast<std::size_t>(d.W().size()) * 8;
}

void write_checkpoint(std::ostream& out, const UnrolledDecoder& d) {
    put<std::uint32_t>(out, kCheckpointMagic);
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint32_t>(out, narrow(d.layers(), "layers"));
    put<std::uint32_t>(out, narrow(d.N(), "N"));
    put<std::uint32_t>(out, narrow(d.n(), "n"));
    put<std::uint32_t>(out, narrow(d.m(), "m"));
    put<double>(out, d.t1());
    put<double>(out, d.t2());
    put<double>(out, d.mu());
    put<std::uint32_t>(out, d.form() == UpdateForm::conic ? 0u : 1u);
    for (Index i = 0; i < d.N(); ++i)
        for (Index j = 0; j < d.n(); ++j) put<double>(out, d.W()(i, j));
    if (!out) throw IoError("checkpoint: write failed");
}

void write_checkpoint(const std::filesystem::path& path, const UnrolledDecoder& d) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_checkpoint(out, d);
}

UnrolledDecoder read_checkpoint(std::istream& in) {
    std::uint64_t offset = 0;
    if (get<std::uint32_t>(in, offset) != kCheckpointMagic) throw FormatError("checkpoint: bad magic", 0);
    const auto version = get<std::uint32_t>(in, offset);
    if (version != kCheckpointVersion)
        throw FormatError("checkpoint: unsupported version " + std::to_string(version), 4);
    const auto layers = get<std::uint32_t>(in, offset);
    const auto N = get<std::uint32_t>(in, offset);
    const auto n = get<std::uint32_t>(in, offset);
    const auto m = get<std::uint32_t>(in, offset);
    const double t1 = get<double>(in, offset);
    const double t2 = get<double>(in, offset);
    const double mu = get<double>(in, offset);
    const std::uint64_t form_offset = offset;
    const auto form_code = get<std::uint32_t>(in, offset);
    if (form_code > 1) throw FormatError("checkpoint: unknown update form", form_offset);
    if (layers == 0 || N == 0 || n == 0 || m == 0) throw FormatError("checkpoint: zero dimension in header", 8);
    if (static_cast<std::uint64_t>(N) * n > (std::uint64_t{1} << 32))
        throw FormatError("checkpoint: implausible operator size", 12);
    Matrix W(N, n);
    for (Index i = 0; i < W.rows(); ++i)
        for (Index j = 0; j < W.cols(); ++j) W(i, j) = get<double>(in, offset);
    try {
        return UnrolledDecoder(static_cast<int>(layers), std::move(W), m, t1, t2, mu,
                               form_code == 0 ? UpdateForm::conic : UpdateForm::as_printed);
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("checkpoint: ") + e.what(), 24);
    }
}

UnrolledDecoder read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_checkpoint(in);
}

}  // namespace cdec
