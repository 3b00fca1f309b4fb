#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "efr/csv.hpp"
#include "efr/types.hpp"

namespace efr {

// Minimal RIFF/WAVE PCM support: 16- and 24-bit integer samples, one or two
// channels. Samples are normalized by 2^(bits-1) into [-1, 1).

namespace wav_detail {

inline std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
}

}  // namespace wav_detail

struct WavData {
  std::vector<std::vector<double>> channels;  // normalized to [-1, 1)
  double sample_rate_hz{0.0};
  int bits_per_sample{0};
};

inline WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open WAV file: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw io_error("not a RIFF/WAVE file: " + path.string());

  using namespace wav_detail;
  std::uint16_t format = 0, num_channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  const std::uint8_t* data = nullptr;
  std::uint32_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t size = read_u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw io_error("truncated WAV chunk in " + path.string());
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw io_error("malformed fmt chunk in " + path.string());
      format = read_u16(bytes.data() + body);
      num_channels = read_u16(bytes.data() + body + 2);
      sample_rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size % 2);  // chunks are word-aligned
  }

  if (format != 1) throw io_error("unsupported WAV codec (only integer PCM): " + path.string());
  if (bits != 16 && bits != 24) throw io_error("unsupported WAV bit depth (16/24 only): " + path.string());
  if (num_channels == 0 || num_channels > 2) throw io_error("unsupported WAV channel count: " + path.string());
  if (!data || data_size == 0) throw io_error("WAV file has no audio data: " + path.string());

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_size = bytes_per_sample * num_channels;
  const std::size_t frames = data_size / frame_size;
  if (frames == 0) throw io_error("WAV file has zero-length audio: " + path.string());

  WavData out;
  out.sample_rate_hz = static_cast<double>(sample_rate);
  out.bits_per_sample = bits;
  out.channels.assign(num_channels, std::vector<double>(frames));
  const double scale = 1.0 / static_cast<double>(1u << (bits - 1));
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::uint16_t c = 0; c < num_channels; ++c) {
      const std::uint8_t* p = data + i * frame_size + c * bytes_per_sample;
      std::int32_t v;
      if (bits == 16) {
        v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
      } else {
        v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
        if (v & 0x800000) v |= ~0xffffff;  // sign-extend 24-bit
      }
      out.channels[c][i] = static_cast<double>(v) * scale;
    }
  }
  return out;
}

// 16-bit PCM writer; values are clipped to [-1, 1).
inline void write_wav(const std::filesystem::path& path, const SignalRecord& signal) {
  using namespace wav_detail;
  const std::size_t n = signal.samples.size();
  const std::uint32_t data_size = static_cast<std::uint32_t>(n * 2);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  const char* riff = "RIFF";
  out.insert(out.end(), riff, riff + 4);
  put_u32(out, 36 + data_size);
  const char* wavefmt = "WAVEfmt ";
  out.insert(out.end(), wavefmt, wavefmt + 8);
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  const std::uint32_t rate = static_cast<std::uint32_t>(std::llround(signal.sample_rate_hz));
  put_u32(out, rate);
  put_u32(out, rate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  const char* dataid = "data";
  out.insert(out.end(), dataid, dataid + 4);
  put_u32(out, data_size);
  for (double v : signal.samples) {
    const double clipped = std::clamp(v, -1.0, 32767.0 / 32768.0);
    const auto s = static_cast<std::int16_t>(std::lround(clipped * 32768.0));
    put_u16(out, static_cast<std::uint16_t>(s));
  }

  AtomicFileWriter w(path);
  w.stream().write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  w.commit();
}

}  // namespace efr
