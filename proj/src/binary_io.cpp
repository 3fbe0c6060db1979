#include "srf/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include "srf/tensor.hpp"

namespace srf::io {

namespace {

template <typename T>
void put_le(std::vector<unsigned char>& buf, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) buf.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const unsigned char* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
  return v;
}

}  // namespace

void Writer::magic(const std::array<char, 4>& m) {
  for (char c : m) buf_.push_back(static_cast<unsigned char>(c));
}
void Writer::u32(std::uint32_t v) { put_le(buf_, v); }
void Writer::u64(std::uint64_t v) { put_le(buf_, v); }
void Writer::f32(float v) { put_le(buf_, std::bit_cast<std::uint32_t>(v)); }
void Writer::f64(double v) { put_le(buf_, std::bit_cast<std::uint64_t>(v)); }

Reader::Reader(std::vector<unsigned char> bytes, std::string source) : buf_(std::move(bytes)), source_(std::move(source)) {}

Reader Reader::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return Reader(std::move(bytes), path.string());
}

const unsigned char* Reader::take(std::size_t n) {
  if (buf_.size() - pos_ < n) throw IoError(source_ + ": truncated at byte " + std::to_string(pos_));
  const auto* p = buf_.data() + pos_;
  pos_ += n;
  return p;
}

void Reader::expect_magic(const std::array<char, 4>& m) {
  const auto* p = take(4);
  if (std::memcmp(p, m.data(), 4) != 0) {
    throw IoError(source_ + ": bad magic, expected '" + std::string(m.begin(), m.end()) + "'");
  }
}

std::uint32_t Reader::u32() { return get_le<std::uint32_t>(take(4)); }
std::uint64_t Reader::u64() { return get_le<std::uint64_t>(take(8)); }
float Reader::f32() { return std::bit_cast<float>(get_le<std::uint32_t>(take(4))); }
double Reader::f64() { return std::bit_cast<double>(get_le<std::uint64_t>(take(8))); }

void write_file(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fnv1a_hex(const void* data, std::size_t size) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string fnv1a_hex(const std::string& text) { return fnv1a_hex(text.data(), text.size()); }

std::string file_hash(const std::filesystem::path& path) { return fnv1a_hex(read_text(path)); }

}  // namespace srf::io
