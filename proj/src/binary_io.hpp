#pragma once

// Little-endian fixed-layout primitives shared by the EMB1 and IDX1 readers
// and writers. Byte order is explicit so the files are identical on any host.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "vcmr/errors.hpp"

namespace vcmr::detail {

inline void put_u16(std::ostream& os, std::uint16_t v) {
    const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 2);
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline void put_f32(std::ostream& os, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(os, bits);
}

inline void put_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(os, bits);
}

inline void read_exact(std::istream& is, char* dst, std::size_t n,
                       const std::string& what) {
    is.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n) {
        throw format_error("truncated file while reading " + what);
    }
}

inline std::uint16_t get_u16(std::istream& is, const std::string& what) {
    unsigned char b[2];
    read_exact(is, reinterpret_cast<char*>(b), 2, what);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

inline std::uint32_t get_u32(std::istream& is, const std::string& what) {
    unsigned char b[4];
    read_exact(is, reinterpret_cast<char*>(b), 4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

inline std::uint64_t get_u64(std::istream& is, const std::string& what) {
    unsigned char b[8];
    read_exact(is, reinterpret_cast<char*>(b), 8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

inline float get_f32(std::istream& is, const std::string& what) {
    const std::uint32_t bits = get_u32(is, what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

inline double get_f64(std::istream& is, const std::string& what) {
    const std::uint64_t bits = get_u64(is, what);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

} // namespace vcmr::detail
