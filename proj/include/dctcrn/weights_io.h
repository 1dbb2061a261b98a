#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dctcrn/crc32.h"
#include "dctcrn/tensor.h"

namespace dctcrn {

// Weight container format, little-endian throughout:
//
//   "DCTW"                      magic
//   u32   version (currently 1)
//   u32   tensor count
//   per tensor:
//     u16   name length, then that many UTF-8 bytes
//     u8    rank
//     u32   each dimension
//     f32   row-major values
//   u32   CRC-32 of every byte above
//
// Values are stored as float32 regardless of the in-memory scalar type.

inline constexpr uint32_t kWeightsVersion = 1;

namespace detail {

template <typename U>
void put_le(std::vector<uint8_t>& buf, U v) {
  for (size_t i = 0; i < sizeof(U); ++i) buf.push_back(uint8_t(v >> (8 * i)));
}

template <typename U>
U get_le(const std::vector<uint8_t>& buf, size_t& pos, const char* what) {
  if (pos + sizeof(U) > buf.size())
    throw std::runtime_error(std::string("weights file truncated reading ") + what);
  U v = 0;
  for (size_t i = 0; i < sizeof(U); ++i) v |= U(buf[pos + i]) << (8 * i);
  pos += sizeof(U);
  return v;
}

}  // namespace detail

template <typename T>
void save_params(const ParameterSet<T>& params, const std::string& path) {
  std::vector<uint8_t> buf;
  buf.insert(buf.end(), {'D', 'C', 'T', 'W'});
  detail::put_le<uint32_t>(buf, kWeightsVersion);
  detail::put_le<uint32_t>(buf, uint32_t(params.entries.size()));
  for (const auto& e : params.entries) {
    detail::put_le<uint16_t>(buf, uint16_t(e.name.size()));
    buf.insert(buf.end(), e.name.begin(), e.name.end());
    buf.push_back(uint8_t(e.tensor.shape.size()));
    for (int d : e.tensor.shape) detail::put_le<uint32_t>(buf, uint32_t(d));
    for (const T& v : e.tensor.data) {
      const float f = float(v);
      uint32_t bits;
      std::memcpy(&bits, &f, 4);
      detail::put_le<uint32_t>(buf, bits);
    }
  }
  detail::put_le<uint32_t>(buf, crc32_ieee(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open weights file for writing: " + path);
  out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  if (!out) throw std::runtime_error("short write to weights file: " + path);
}

// Fills an already-shaped parameter set (built from the model config). The
// file must carry exactly the expected tensors, matching by name and shape.
template <typename T>
void load_params(const std::string& path, ParameterSet<T>& dst) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open weights file: " + path);
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());

  if (buf.size() < 16 || std::memcmp(buf.data(), "DCTW", 4) != 0)
    throw std::runtime_error("not a weights file (bad magic): " + path);
  const size_t payload = buf.size() - 4;
  size_t pos = payload;
  const uint32_t stored_crc = detail::get_le<uint32_t>(buf, pos, "checksum");
  if (crc32_ieee(buf.data(), payload) != stored_crc)
    throw std::runtime_error("weights file checksum mismatch: " + path);

  pos = 4;
  const uint32_t version = detail::get_le<uint32_t>(buf, pos, "version");
  if (version != kWeightsVersion)
    throw std::runtime_error("weights file version " + std::to_string(version) +
                             " unsupported (expected " + std::to_string(kWeightsVersion) + ")");
  const uint32_t count = detail::get_le<uint32_t>(buf, pos, "tensor count");
  if (count != dst.entries.size())
    throw std::runtime_error("weights file holds " + std::to_string(count) + " tensors, model needs " +
                             std::to_string(dst.entries.size()));

  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t name_len = detail::get_le<uint16_t>(buf, pos, "tensor name length");
    if (pos + name_len > payload) throw std::runtime_error("weights file truncated reading name");
    const std::string name(reinterpret_cast<const char*>(buf.data() + pos), name_len);
    pos += name_len;
    if (pos >= payload) throw std::runtime_error("weights file truncated reading rank");
    const uint8_t rank = buf[pos++];
    std::vector<int> shape(rank);
    for (int d = 0; d < rank; ++d)
      shape[d] = int(detail::get_le<uint32_t>(buf, pos, "tensor dimension"));

    if (!dst.has(name)) throw std::runtime_error("unknown tensor in weights file: " + name);
    Tensor<T>& t = dst.get(name);
    if (shape != t.shape) {
      std::string want, got;
      for (int d : t.shape) want += std::to_string(d) + " ";
      for (int d : shape) got += std::to_string(d) + " ";
      throw std::runtime_error("tensor " + name + " shape mismatch: file [ " + got +
                               "] vs model [ " + want + "]");
    }
    for (T& v : t.data) {
      const uint32_t bits = detail::get_le<uint32_t>(buf, pos, "tensor data");
      float f;
      std::memcpy(&f, &bits, 4);
      v = T(f);
    }
  }
  if (pos != payload) throw std::runtime_error("weights file has trailing bytes: " + path);
}

}  // namespace dctcrn
