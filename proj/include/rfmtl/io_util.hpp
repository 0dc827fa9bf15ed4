#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "rfmtl/errors.hpp"

// Little-endian binary helpers shared by the container and checkpoint
// formats. Multi-byte values are always serialized byte-by-byte so the
// files are identical regardless of host endianness.

namespace rfmtl::io {

inline void write_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
void write_le(std::ostream& os, T value) {
    static_assert(std::is_integral_v<T>);
    using U = std::make_unsigned_t<T>;
    U u = static_cast<U>(value);
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(u >> (8 * i));
    write_bytes(os, buf, sizeof(T));
}

inline void write_f32_le(std::ostream& os, float value) {
    std::uint32_t bits;
    std::memcpy(&bits, &value, sizeof(bits));
    write_le<std::uint32_t>(os, bits);
}

inline void write_f64_le(std::ostream& os, double value) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, sizeof(bits));
    write_le<std::uint64_t>(os, bits);
}

inline void write_string(std::ostream& os, const std::string& s) {
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
    write_bytes(os, s.data(), s.size());
}

inline void read_bytes(std::istream& is, void* p, std::size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n) throw FormatError("unexpected end of file");
}

template <typename T>
T read_le(std::istream& is) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    read_bytes(is, buf, sizeof(T));
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(buf[i]) << (8 * i);
    return static_cast<T>(u);
}

inline float read_f32_le(std::istream& is) {
    const std::uint32_t bits = read_le<std::uint32_t>(is);
    float value;
    std::memcpy(&value, &bits, sizeof(value));
    return value;
}

inline double read_f64_le(std::istream& is) {
    const std::uint64_t bits = read_le<std::uint64_t>(is);
    double value;
    std::memcpy(&value, &bits, sizeof(value));
    return value;
}

inline std::string read_string(std::istream& is) {
    const auto n = read_le<std::uint32_t>(is);
    std::string s(n, '\0');
    if (n) read_bytes(is, s.data(), n);
    return s;
}

inline void expect_magic(std::istream& is, const std::string& magic) {
    std::string got(magic.size(), '\0');
    read_bytes(is, got.data(), got.size());
    if (got != magic) throw FormatError("bad magic: expected \"" + magic + "\"");
}

}  // namespace rfmtl::io
