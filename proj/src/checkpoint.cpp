// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/checkpoint.hpp"

#include "tilesplat/error.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace tilesplat {
namespace {

template <typename U> void put_le(std::ostream& out, U value) {
    std::array<char, sizeof(U)> bytes;
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
    out.write(bytes.data(), bytes.size());
}

template <typename U> U get_le(std::istream& in, const char* what) {
    std::array<unsigned char, sizeof(U)> bytes;
    if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
        throw Error(ErrorCode::FormatError, std::string("truncated checkpoint while reading ") + what);
    }
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
    return value;
}

void put_float(std::ostream& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }

float get_float(std::istream& in, const char* what) { return std::bit_cast<float>(get_le<std::uint32_t>(in, what)); }

} // namespace

void write_checkpoint(std::ostream& out, const GaussianCloud& cloud) {
    if (!cloud.consistent()) throw Error(ErrorCode::ShapeMismatch, "cloud arrays have inconsistent lengths");
    out.write(kCheckpointMagic, 4);
    put_le<std::uint32_t>(out, kCheckpointVersion);
    put_le<std::uint64_t>(out, cloud.size());
    for (const auto& p : cloud.positions)
        for (int k = 0; k < 3; ++k) put_float(out, p[k]);
    for (const auto& s : cloud.log_scales)
        for (int k = 0; k < 3; ++k) put_float(out, s[k]);
    for (const auto& q : cloud.rotations)
        for (int k = 0; k < 4; ++k) put_float(out, q[k]);
    for (float o : cloud.opacity_logits) put_float(out, o);
    for (const auto& c : cloud.colors)
        for (int k = 0; k < 3; ++k) put_float(out, c[k]);
    if (!out) throw Error(ErrorCode::IoError, "failed writing checkpoint");
}

GaussianCloud read_checkpoint(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4)) throw Error(ErrorCode::FormatError, "truncated checkpoint header");
    if (std::memcmp(magic, kCheckpointMagic, 4) != 0) throw Error(ErrorCode::FormatError, "bad magic");
    const auto version = get_le<std::uint32_t>(in, "version");
    if (version != kCheckpointVersion) {
        throw Error(ErrorCode::FormatError, "unsupported checkpoint version " + std::to_string(version));
    }
    const auto count = get_le<std::uint64_t>(in, "count");

    // Reject absurd counts before allocating: the remaining stream must hold 14 floats each.
    const auto here = in.tellg();
    if (here != std::streampos(-1)) {
        in.seekg(0, std::ios::end);
        const auto end = in.tellg();
        in.seekg(here);
        const auto available = static_cast<std::uint64_t>(end - here);
        if (count > available / (GaussianCloud::kScalarsPerGaussian * 4)) {
            throw Error(ErrorCode::FormatError, "truncated checkpoint arrays");
        }
    }

    GaussianCloud cloud;
    cloud.resize(count);
    for (auto& p : cloud.positions)
        for (int k = 0; k < 3; ++k) p[k] = get_float(in, "positions");
    for (auto& s : cloud.log_scales)
        for (int k = 0; k < 3; ++k) s[k] = get_float(in, "log_scales");
    for (auto& q : cloud.rotations)
        for (int k = 0; k < 4; ++k) q[k] = get_float(in, "rotations");
    for (auto& o : cloud.opacity_logits) o = get_float(in, "opacity_logits");
    for (auto& c : cloud.colors)
        for (int k = 0; k < 3; ++k) c[k] = get_float(in, "colors");
    return cloud;
}

void save_checkpoint(const GaussianCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    write_checkpoint(out, cloud);
}

GaussianCloud load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
    return read_checkpoint(in);
}

} // namespace tilesplat
