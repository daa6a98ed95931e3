#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "weave/errors.hpp"

// Little-endian binary primitives shared by the feature and checkpoint
// readers. Explicit byte assembly so files are identical across platforms.
namespace weave::binio {

inline void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v));
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

inline void put_f32(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

inline void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

inline bool get_u32(std::istream& in, std::uint32_t& v) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
    v = std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
        (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
    return true;
}

inline bool get_u64(std::istream& in, std::uint64_t& v) {
    std::uint32_t lo, hi;
    if (!get_u32(in, lo) || !get_u32(in, hi)) return false;
    v = std::uint64_t(lo) | (std::uint64_t(hi) << 32);
    return true;
}

inline bool get_f32(std::istream& in, float& v) {
    std::uint32_t bits;
    if (!get_u32(in, bits)) return false;
    std::memcpy(&v, &bits, 4);
    return true;
}

inline bool get_f64(std::istream& in, double& v) {
    std::uint64_t bits;
    if (!get_u64(in, bits)) return false;
    std::memcpy(&v, &bits, 8);
    return true;
}

} // namespace weave::binio
