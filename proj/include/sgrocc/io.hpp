#pragma once

// Little-endian binary helpers, whole-file IO and 16-bit PGM images.

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "sgrocc/errors.hpp"

namespace sgrocc::io {

class ByteWriter {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  void magic(std::string_view m) { raw(m.data(), m.size()); }

  template <typename T>
  void le(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::uint8_t bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    raw(bytes, sizeof(T));
  }
  void u8(std::uint8_t v) { le(v); }
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void f32(double v) { le(static_cast<float>(v)); }

  const std::vector<std::uint8_t>& bytes() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& buf) : buf_(buf) {}

  void expect_magic(std::string_view m) {
    need(m.size());
    if (std::memcmp(buf_.data() + pos_, m.data(), m.size()) != 0) {
      fail(ErrorCode::FormatError, "bad magic, expected " + std::string(m));
    }
    pos_ += m.size();
  }

  template <typename T>
  T le() {
    need(sizeof(T));
    std::uint8_t bytes[sizeof(T)];
    std::memcpy(bytes, buf_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
  }
  std::uint8_t u8() { return le<std::uint8_t>(); }
  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  double f32() { return static_cast<double>(le<float>()); }

  std::size_t remaining() const { return buf_.size() - pos_; }
  void expect_end() const {
    if (remaining() != 0) fail(ErrorCode::FormatError, "trailing bytes after payload");
  }

 private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) fail(ErrorCode::FormatError, "truncated file");
  }

  const std::vector<std::uint8_t>& buf_;
  std::size_t pos_ = 0;
};

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot open for writing: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail(ErrorCode::IoError, "write failed: " + path);
}

inline void write_text(const std::string& path, const std::string& text) {
  write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot open for reading: " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// 16-bit binary PGM (P5, maxval 65535, big-endian samples as the format
// requires).
struct Pgm16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> pixels;
};

inline std::vector<std::uint8_t> encode_pgm16(const Pgm16& img) {
  std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n65535\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (std::uint16_t p : img.pixels) {
    out.push_back(static_cast<std::uint8_t>(p >> 8));
    out.push_back(static_cast<std::uint8_t>(p & 0xff));
  }
  return out;
}

inline Pgm16 decode_pgm16(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
    return t;
  };
  if (token() != "P5") fail(ErrorCode::FormatError, "not a binary PGM");
  Pgm16 img;
  try {
    img.width = std::stoi(token());
    img.height = std::stoi(token());
    if (std::stoi(token()) != 65535) fail(ErrorCode::FormatError, "PGM maxval must be 65535");
  } catch (const std::logic_error&) {
    fail(ErrorCode::FormatError, "malformed PGM header");
  }
  ++pos;  // single whitespace after maxval
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  if (pos > bytes.size() || bytes.size() - pos != 2 * n) fail(ErrorCode::FormatError, "PGM payload size mismatch");
  img.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    img.pixels[i] = static_cast<std::uint16_t>((bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1]);
  }
  return img;
}

// Fixed-precision number formatting for CSV output.
inline std::string fmt(double v, int precision = 9) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

}  // namespace sgrocc::io
