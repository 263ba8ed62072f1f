// Little-endian byte buffers and whole-file helpers.

#pragma once

#include "geoforge/types.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <type_traits>

namespace geoforge {

static_assert(std::endian::native == std::endian::little,
              "binary containers assume a little-endian host");

class ByteWriter {
 public:
  template <typename T>
    requires std::is_arithmetic_v<T>
  void put(T v) {
    char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    buf_.append(raw, sizeof(T));
  }
  void put_bytes(std::string_view bytes) { buf_.append(bytes); }

  template <typename T>
    requires std::is_arithmetic_v<T>
  void patch(std::size_t offset, T v) {
    std::memcpy(buf_.data() + offset, &v, sizeof(T));
  }

  std::size_t size() const { return buf_.size(); }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string_view get_bytes(std::size_t n) {
    need(n);
    const std::string_view out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  void seek(std::size_t pos) {
    if (pos > data_.size()) throw IoError("seek past end of buffer");
    pos_ = pos;
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (n > data_.size() - pos_) throw IoError("unexpected end of data");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string read_binary_file(const std::filesystem::path& path);
void write_binary_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace geoforge
