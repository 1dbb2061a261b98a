#include "dctcrn/wav.h"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace dctcrn {

namespace {

uint32_t rd_u32(const uint8_t* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}
uint16_t rd_u16(const uint8_t* p) { return uint16_t(p[0]) | uint16_t(p[1]) << 8; }

void wr_u32(std::ostream& os, uint32_t v) {
  uint8_t b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}
void wr_u16(std::ostream& os, uint16_t v) {
  uint8_t b[2] = {uint8_t(v), uint8_t(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;

}  // namespace

WavData wav_read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open WAV file: " + path);
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error("not a RIFF/WAVE file: " + path);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  const uint8_t* data = nullptr;
  uint32_t data_len = 0;

  size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const uint8_t* hdr = buf.data() + pos;
    uint32_t chunk_len = rd_u32(hdr + 4);
    const uint8_t* body = hdr + 8;
    if (pos + 8 + chunk_len > buf.size()) break;
    if (std::memcmp(hdr, "fmt ", 4) == 0 && chunk_len >= 16) {
      format = rd_u16(body);
      channels = rd_u16(body + 2);
      rate = rd_u32(body + 4);
      bits = rd_u16(body + 14);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = body;
      data_len = chunk_len;
    }
    pos += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (!have_fmt || !data) throw std::runtime_error("missing fmt/data chunk: " + path);
  if (rate != uint32_t(kSampleRate))
    throw std::runtime_error("unsupported sample rate " + std::to_string(rate) + " (need 16000): " + path);
  if (channels != 1)
    throw std::runtime_error("unsupported channel count " + std::to_string(channels) + " (need mono): " + path);

  WavData out;
  out.sample_rate = int(rate);
  if (format == kFormatPcm && bits == 16) {
    size_t n = data_len / 2;
    out.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      int16_t s = int16_t(rd_u16(data + 2 * i));
      out.samples[i] = float(s) / 32768.0f;
    }
  } else if (format == kFormatFloat && bits == 32) {
    size_t n = data_len / 4;
    out.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      uint32_t u = rd_u32(data + 4 * i);
      float f;
      std::memcpy(&f, &u, 4);
      out.samples[i] = f;
    }
  } else {
    throw std::runtime_error("unsupported encoding (need PCM16 or float32): " + path);
  }
  return out;
}

void wav_write_file(const std::string& path, const float* samples, size_t n, int sample_rate) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot create WAV file: " + path);

  uint32_t data_len = uint32_t(n * 2);
  os.write("RIFF", 4);
  wr_u32(os, 36 + data_len);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  wr_u32(os, 16);
  wr_u16(os, kFormatPcm);
  wr_u16(os, 1);
  wr_u32(os, uint32_t(sample_rate));
  wr_u32(os, uint32_t(sample_rate) * 2);  // byte rate
  wr_u16(os, 2);                          // block align
  wr_u16(os, 16);
  os.write("data", 4);
  wr_u32(os, data_len);
  for (size_t i = 0; i < n; ++i) {
    float x = samples[i];
    if (!(x == x)) x = 0.0f;  // NaN guards the quantizer
    long q = std::lround(double(x) * 32768.0);
    if (q > 32767) q = 32767;
    if (q < -32768) q = -32768;
    wr_u16(os, uint16_t(int16_t(q)));
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace dctcrn
