#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "har/errors.hpp"

namespace har::io {

static_assert(std::endian::native == std::endian::little,
              "binary containers are little-endian; big-endian hosts need byte swapping");

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  void put(T value) {
    out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  void put_array(std::span<const T> values) {
    out_.write(reinterpret_cast<const char*>(values.data()),
               static_cast<std::streamsize>(values.size_bytes()));
  }

  void put_bytes(std::string_view bytes) {
    out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }

  void put_string(std::string_view s) {
    put(static_cast<std::uint32_t>(s.size()));
    put_bytes(s);
  }

  bool ok() const { return static_cast<bool>(out_); }

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  BinaryReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  T get() {
    T value{};
    read(reinterpret_cast<char*>(&value), sizeof(T));
    return value;
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  std::vector<T> get_array(std::size_t count) {
    require(count, sizeof(T));
    std::vector<T> values(count);
    read(reinterpret_cast<char*>(values.data()), count * sizeof(T));
    return values;
  }

  std::string get_bytes(std::size_t count) {
    require(count, 1);
    std::string s(count, '\0');
    read(s.data(), count);
    return s;
  }

  std::string get_string(std::size_t max_len = 1 << 20) {
    const auto len = get<std::uint32_t>();
    if (len > max_len) fail(ErrorKind::Format, source_ + ": implausible string length");
    return get_bytes(len);
  }

 private:
  // Rejects sizes larger than what is left in the stream before allocating.
  void require(std::size_t count, std::size_t size) {
    const auto here = in_.tellg();
    if (here < 0) return;
    in_.seekg(0, std::ios::end);
    const auto end = in_.tellg();
    in_.seekg(here);
    const auto left = static_cast<std::size_t>(end - here);
    if (count > left / size) fail(ErrorKind::Format, source_ + ": truncated data");
  }

  void read(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      fail(ErrorKind::Format, source_ + ": truncated data");
  }

  std::istream& in_;
  std::string source_;
};

}  // namespace har::io
