#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace physio {

/// Little-endian byte sink for the versioned binary formats.
class ByteWriter {
 public:
  explicit ByteWriter(std::string_view magic) : bytes_(magic) {}

  void u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int b = 0; b < 4; ++b) bytes_.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) bytes_.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes_.append(s);
  }

  const std::string& bytes() const { return bytes_; }
  void save(const std::filesystem::path& file) const;

 private:
  std::string bytes_;
};

/// Reads what ByteWriter wrote; throws FormatError on truncation or a wrong
/// magic.
class ByteReader {
 public:
  ByteReader(std::string bytes, std::string_view magic, std::string origin);
  static ByteReader open(const std::filesystem::path& file, std::string_view magic);

  bool done() const { return at_ >= bytes_.size(); }
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str();

 private:
  void need(std::size_t n) const;

  std::string bytes_;
  std::string origin_;
  std::size_t at_ = 0;
};

}  // namespace physio
