#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "sedil/tensor.hpp"

namespace sedil::bin {

// Little-endian primitives shared by the checkpoint and dataset formats.
// Integers are packed byte by byte; f32 payloads are raw IEEE-754 bits.

struct Writer {
  std::string buf;

  void u8(uint8_t v) { buf.push_back(static_cast<char>(v)); }

  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }

  void f32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }

  void str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    buf.append(s);
  }

  void floats(const float* p, size_t n) {
    const size_t at = buf.size();
    buf.resize(at + n * 4);
    std::memcpy(buf.data() + at, p, n * 4);
  }

  void tensor(const std::string& name, const Tensor<float>& t) {
    str(name);
    u32(static_cast<uint32_t>(t.ndim()));
    for (int i = 0; i < t.ndim(); ++i) u32(static_cast<uint32_t>(t.dim(i)));
    floats(t.data(), static_cast<size_t>(t.size()));
  }
};

inline void write_file(const std::string& path, const std::string& buf) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open '" + path + "' for writing");
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw DataError("short write to '" + path + "'");
}

inline std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open '" + path + "' for reading");
  std::string buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return buf;
}

struct Reader {
  const std::string& buf;
  size_t pos = 0;

  explicit Reader(const std::string& b) : buf(b) {}

  void need(size_t n, const std::string& what) {
    if (pos + n > buf.size())
      throw DataError("file truncated at byte " + std::to_string(pos) + " while reading " + what);
  }

  uint8_t u8(const std::string& what) {
    need(1, what);
    return static_cast<uint8_t>(buf[pos++]);
  }

  uint32_t u32(const std::string& what) {
    need(4, what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<uint32_t>(static_cast<uint8_t>(buf[pos + static_cast<size_t>(i)]))
           << (8 * i);
    pos += 4;
    return v;
  }

  float f32(const std::string& what) {
    const uint32_t bits = u32(what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  std::string str(const std::string& what) {
    const uint32_t n = u32(what + " length");
    need(n, what);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }

  void floats(float* dst, size_t n, const std::string& what) {
    need(n * 4, what);
    std::memcpy(dst, buf.data() + pos, n * 4);
    pos += n * 4;
  }

  // Reads one named tensor record: name, ndim, dims, payload.
  std::pair<std::string, Tensor<float>> tensor(const std::string& what) {
    const std::string name = str(what + " tensor name");
    const uint32_t ndim = u32("tensor '" + name + "' ndim");
    if (ndim == 0 || ndim > 8)
      throw DataError("tensor '" + name + "' has implausible ndim " + std::to_string(ndim));
    std::vector<int> dims(ndim);
    long long total = 1;
    for (uint32_t i = 0; i < ndim; ++i) {
      const uint32_t d = u32("tensor '" + name + "' dim");
      if (d == 0 || d > (1u << 28))
        throw DataError("tensor '" + name + "' has implausible dimension " + std::to_string(d));
      dims[i] = static_cast<int>(d);
      total *= d;
    }
    Tensor<float> t(dims);
    floats(t.data(), static_cast<size_t>(total), "tensor '" + name + "' payload");
    return {name, std::move(t)};
  }

  bool eof() const { return pos == buf.size(); }
};

}  // namespace sedil::bin
