// VLMG1 binary matrix format.
//
//   magic   4 bytes   0x56 0x4C 0x4D 0x47 ("VLMG")
//   version u32 LE    1
//   rows    u64 LE
//   cols    u64 LE
//   data    rows*cols f32 LE, row-major
//
// Values are stored as f32; the loader promotes to 64-bit.

#ifndef VLMLAB_MATRIX_IO_HPP
#define VLMLAB_MATRIX_IO_HPP

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "vlmlab/matrix.hpp"

namespace vlmlab {

namespace detail {

template <typename T>
void write_le(std::ostream& os, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<unsigned char, sizeof(T)> bytes{};
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes.begin(), bytes.end());
    os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T read_le(std::istream& is, const char* field) {
    std::array<unsigned char, sizeof(T)> bytes{};
    is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
    if (!is) throw std::runtime_error(std::string("vlmg1: truncated ") + field);
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

} // namespace detail

inline constexpr std::array<unsigned char, 4> kVlmg1Magic = {0x56, 0x4C, 0x4D, 0x47};

inline void write_vlmg1(const Matrix& m, std::ostream& os) {
    os.write(reinterpret_cast<const char*>(kVlmg1Magic.data()), 4);
    detail::write_le<std::uint32_t>(os, 1u);
    detail::write_le<std::uint64_t>(os, m.rows());
    detail::write_le<std::uint64_t>(os, m.cols());
    for (double x : m.data()) detail::write_le<float>(os, static_cast<float>(x));
    if (!os) throw std::runtime_error("vlmg1: write failed");
}

inline void write_vlmg1(const Matrix& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("vlmg1: cannot open " + path);
    write_vlmg1(m, os);
}

inline Matrix read_vlmg1(std::istream& is) {
    std::array<unsigned char, 4> magic{};
    is.read(reinterpret_cast<char*>(magic.data()), 4);
    if (!is || magic != kVlmg1Magic) throw std::runtime_error("vlmg1: bad magic");
    const auto version = detail::read_le<std::uint32_t>(is, "version");
    if (version != 1u)
        throw std::runtime_error("vlmg1: unsupported version " + std::to_string(version));
    const auto rows = detail::read_le<std::uint64_t>(is, "rows");
    const auto cols = detail::read_le<std::uint64_t>(is, "cols");
    // Desk-scale sanity bound; also keeps rows*cols from overflowing.
    constexpr std::uint64_t kMaxElements = 1ull << 32;
    if (rows > kMaxElements || cols > kMaxElements || (cols != 0 && rows > kMaxElements / cols))
        throw std::runtime_error("vlmg1: implausible dimensions " + std::to_string(rows) + "x" +
                                 std::to_string(cols));
    std::vector<double> data;
    data.reserve(rows * cols);
    for (std::uint64_t i = 0; i < rows * cols; ++i)
        data.push_back(static_cast<double>(detail::read_le<float>(is, "data")));
    Matrix m = Matrix::from_data(rows, cols, std::move(data));
    if (!m.all_finite()) throw std::runtime_error("vlmg1: non-finite data");
    return m;
}

inline Matrix read_vlmg1(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("vlmg1: cannot open " + path);
    return read_vlmg1(is);
}

} // namespace vlmlab

#endif // VLMLAB_MATRIX_IO_HPP
