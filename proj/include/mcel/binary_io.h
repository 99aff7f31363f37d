#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mcel/error.h"

namespace mcel {

// Little helpers for the versioned binary artifacts (checkpoint, index,
// datastore). Integers and doubles are written in host byte order; every file
// starts with an 8-byte magic and a u32 version.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void magic(std::string_view tag, std::uint32_t version) {
    out_.write(tag.data(), static_cast<std::streamsize>(tag.size()));
    u32(version);
  }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(std::string_view s) {
    u64(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void f64s(const std::vector<double>& v) {
    u64(v.size());
    raw(v.data(), v.size() * sizeof(double));
  }

 private:
  void raw(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  std::ostream& out_;
};

class BinaryReader {
 public:
  BinaryReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  std::uint32_t magic(std::string_view tag) {
    std::string got(tag.size(), '\0');
    in_.read(got.data(), static_cast<std::streamsize>(got.size()));
    if (!in_ || got != tag) throw FormatError(source_ + ": not a " + std::string(tag) + " file");
    return u32();
  }
  std::uint32_t u32() { return pod<std::uint32_t>(); }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  double f64() { return pod<double>(); }
  std::string str() {
    std::uint64_t n = u64();
    if (n > (1ULL << 32)) throw FormatError(source_ + ": implausible string length");
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }
  std::vector<double> f64s() {
    std::uint64_t n = u64();
    if (n > (1ULL << 34)) throw FormatError(source_ + ": implausible array length");
    std::vector<double> v(n);
    read(v.data(), n * sizeof(double));
    return v;
  }

 private:
  template <typename T>
  T pod() {
    T v{};
    read(&v, sizeof v);
    return v;
  }
  void read(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw FormatError(source_ + ": truncated file");
  }
  std::istream& in_;
  std::string source_;
};

}  // namespace mcel
