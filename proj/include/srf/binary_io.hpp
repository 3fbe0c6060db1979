#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace srf::io {

/// Little-endian writer over an in-memory buffer; flushed with write_file.
class Writer {
 public:
  void magic(const std::array<char, 4>& m);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  const std::vector<unsigned char>& bytes() const { return buf_; }

 private:
  std::vector<unsigned char> buf_;
};

/// Reader over a file image. Every accessor throws IoError naming the source
/// when the data runs out.
class Reader {
 public:
  Reader(std::vector<unsigned char> bytes, std::string source);
  static Reader from_file(const std::filesystem::path& path);

  // Throws IoError unless the next four bytes equal `m`.
  void expect_magic(const std::array<char, 4>& m);
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  bool at_end() const { return pos_ == buf_.size(); }
  const std::string& source() const { return source_; }

 private:
  const unsigned char* take(std::size_t n);
  std::vector<unsigned char> buf_;
  std::size_t pos_ = 0;
  std::string source_;
};

void write_file(const std::filesystem::path& path, const std::vector<unsigned char>& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(const void* data, std::size_t size);
std::string fnv1a_hex(const std::string& text);
std::string file_hash(const std::filesystem::path& path);

}  // namespace srf::io
