#include "physio/binio.hpp"

#include <fstream>
#include <iterator>

#include "physio/errors.hpp"

namespace physio {

void ByteWriter::save(const std::filesystem::path& file) const {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write " + file.string());
  out.write(bytes_.data(), static_cast<std::streamsize>(bytes_.size()));
  if (!out) throw IoError("write failed for " + file.string());
}

ByteReader::ByteReader(std::string bytes, std::string_view magic, std::string origin)
    : bytes_(std::move(bytes)), origin_(std::move(origin)) {
  if (bytes_.compare(0, magic.size(), magic) != 0) {
    throw FormatError(origin_ + ": missing " + std::string(magic) + " header");
  }
  at_ = magic.size();
}

ByteReader ByteReader::open(const std::filesystem::path& file, std::string_view magic) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  return ByteReader(std::string(std::istreambuf_iterator<char>(in), {}), magic, file.string());
}

void ByteReader::need(std::size_t n) const {
  if (at_ + n > bytes_.size()) throw FormatError(origin_ + ": truncated");
}

std::uint8_t ByteReader::u8() {
  need(1);
  return static_cast<std::uint8_t>(bytes_[at_++]);
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[at_ + b])) << (8 * b);
  at_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[at_ + b])) << (8 * b);
  at_ += 8;
  return v;
}

std::string ByteReader::str() {
  const std::uint32_t n = u32();
  need(n);
  std::string s = bytes_.substr(at_, n);
  at_ += n;
  return s;
}

}  // namespace physio
