#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "newsalpha/errors.hpp"

namespace newsalpha::detail {

template <class T>
void put_le(std::ostream& out, T v) {
    std::array<char, sizeof(T)> buf;
    auto bits = static_cast<std::uint64_t>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    out.write(buf.data(), buf.size());
}

template <class T>
T get_le(std::istream& in, const char* what) {
    std::array<unsigned char, sizeof(T)> buf;
    in.read(reinterpret_cast<char*>(buf.data()), buf.size());
    if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw Truncated(std::string("while reading ") + what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return static_cast<T>(v);
}

inline void put_f32(std::ostream& out, float v) { put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v)); }
inline float get_f32(std::istream& in, const char* what) { return std::bit_cast<float>(get_le<std::uint32_t>(in, what)); }
inline void put_f64(std::ostream& out, double v) { put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v)); }
inline double get_f64(std::istream& in, const char* what) { return std::bit_cast<double>(get_le<std::uint64_t>(in, what)); }

}  // namespace newsalpha::detail
