// Copyright 2026 se-enhance authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "se/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "se/error.hpp"

namespace se {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint32_t read_u32(const uint8_t* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
         uint32_t(p[3]) << 24;
}

uint16_t read_u16(const uint8_t* p) { return uint16_t(p[0] | p[1] << 8); }

struct WavStream {
  std::ifstream in;
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits = 0;
  uint32_t data_bytes = 0;
  std::streampos data_pos;
};

// Walks the RIFF chunks up to the data chunk; validates fmt on the way.
WavStream open_wav(const std::string& path) {
  WavStream w;
  w.in.open(path, std::ios::binary);
  if (!w.in) throw DataError("wav: cannot open file: " + path);

  uint8_t hdr[12];
  if (!w.in.read(reinterpret_cast<char*>(hdr), 12) ||
      std::memcmp(hdr, "RIFF", 4) != 0 || std::memcmp(hdr + 8, "WAVE", 4) != 0)
    throw DataError("wav: malformed header (not a RIFF/WAVE file): " + path);

  bool have_fmt = false;
  while (true) {
    uint8_t ch[8];
    if (!w.in.read(reinterpret_cast<char*>(ch), 8)) break;
    const uint32_t size = read_u32(ch + 4);
    if (std::memcmp(ch, "fmt ", 4) == 0) {
      if (size < 16) throw DataError("wav: malformed fmt chunk: " + path);
      std::vector<uint8_t> fmt(size);
      if (!w.in.read(reinterpret_cast<char*>(fmt.data()), size))
        throw DataError("wav: truncated fmt chunk: " + path);
      w.format = read_u16(fmt.data());
      w.channels = read_u16(fmt.data() + 2);
      w.sample_rate = read_u32(fmt.data() + 4);
      w.bits = read_u16(fmt.data() + 14);
      if (w.format == kFormatExtensible && size >= 40)
        w.format = read_u16(fmt.data() + 24);  // first two bytes of subformat
      have_fmt = true;
      if (size & 1) w.in.seekg(1, std::ios::cur);
    } else if (std::memcmp(ch, "data", 4) == 0) {
      if (!have_fmt) throw DataError("wav: data chunk before fmt: " + path);
      w.data_bytes = size;
      w.data_pos = w.in.tellg();
      break;
    } else {
      w.in.seekg(size + (size & 1), std::ios::cur);
      if (!w.in) throw DataError("wav: malformed chunk list: " + path);
    }
  }
  if (w.data_bytes == 0 && !have_fmt)
    throw DataError("wav: malformed header (no fmt/data chunks): " + path);
  if (w.channels == 0 || w.sample_rate == 0)
    throw DataError("wav: malformed fmt (zero channels or rate): " + path);

  const bool pcm16 = w.format == kFormatPcm && w.bits == 16;
  const bool f32 = w.format == kFormatFloat && w.bits == 32;
  if (!pcm16 && !f32)
    throw DataError("wav: unsupported encoding (format tag " +
                    std::to_string(w.format) + ", " + std::to_string(w.bits) +
                    " bits); only PCM16 and float32 are readable: " + path);
  return w;
}

}  // namespace

AudioBuffer load_wav(const std::string& path) {
  WavStream w = open_wav(path);
  const uint32_t bytes_per_sample = w.bits / 8;
  const uint32_t frame_bytes = bytes_per_sample * w.channels;
  const size_t frames = w.data_bytes / frame_bytes;

  std::vector<uint8_t> raw(w.data_bytes);
  if (!w.in.read(reinterpret_cast<char*>(raw.data()), w.data_bytes))
    throw DataError("wav: truncated data chunk: " + path);

  AudioBuffer out;
  out.sample_rate = int(w.sample_rate);
  out.samples.resize(frames);
  const float inv_channels = 1.0f / float(w.channels);
  for (size_t i = 0; i < frames; ++i) {
    float acc = 0.0f;
    const uint8_t* p = raw.data() + i * frame_bytes;
    for (uint32_t c = 0; c < w.channels; ++c, p += bytes_per_sample) {
      if (w.bits == 16) {
        int16_t s;
        std::memcpy(&s, p, 2);
        acc += float(s) / 32768.0f;
      } else {
        float s;
        std::memcpy(&s, p, 4);
        acc += s;
      }
    }
    out.samples[i] = acc * inv_channels;
  }
  return out;
}

WavInfo wav_info(const std::string& path) {
  WavStream w = open_wav(path);
  const uint32_t frame_bytes = (w.bits / 8) * w.channels;
  return WavInfo{w.data_bytes / frame_bytes, int(w.sample_rate)};
}

void save_wav(const std::string& path, const AudioBuffer& audio) {
  for (float s : audio.samples)
    if (!std::isfinite(s))
      throw NumericError("wav: refusing to write non-finite sample");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("wav: cannot open file for writing: " + path);

  const uint32_t n = uint32_t(audio.samples.size());
  const uint32_t data_bytes = n * 2;
  const uint32_t rate = uint32_t(audio.sample_rate);
  const uint32_t byte_rate = rate * 2;

  uint8_t hdr[44];
  std::memcpy(hdr, "RIFF", 4);
  uint32_t riff_size = 36 + data_bytes;
  std::memcpy(hdr + 4, &riff_size, 4);
  std::memcpy(hdr + 8, "WAVEfmt ", 8);
  const uint32_t fmt_size = 16;
  std::memcpy(hdr + 16, &fmt_size, 4);
  const uint16_t format = kFormatPcm, channels = 1, block_align = 2,
                 bits = 16;
  std::memcpy(hdr + 20, &format, 2);
  std::memcpy(hdr + 22, &channels, 2);
  std::memcpy(hdr + 24, &rate, 4);
  std::memcpy(hdr + 28, &byte_rate, 4);
  std::memcpy(hdr + 32, &block_align, 2);
  std::memcpy(hdr + 34, &bits, 2);
  std::memcpy(hdr + 36, "data", 4);
  std::memcpy(hdr + 40, &data_bytes, 4);
  out.write(reinterpret_cast<char*>(hdr), 44);

  std::vector<int16_t> pcm(n);
  for (uint32_t i = 0; i < n; ++i) {
    const float clamped = std::clamp(audio.samples[i], -1.0f, 1.0f);
    pcm[i] = int16_t(std::lrintf(clamped * 32767.0f));
  }
  out.write(reinterpret_cast<const char*>(pcm.data()), data_bytes);
  if (!out) throw DataError("wav: write failed: " + path);
}

AudioBuffer resample(const AudioBuffer& audio, int target_rate) {
  if (target_rate <= 0) throw UsageError("resample: target rate must be > 0");
  if (audio.sample_rate == target_rate) return audio;

  const size_t in_len = audio.samples.size();
  const double ratio = double(target_rate) / double(audio.sample_rate);
  const size_t out_len = size_t(std::llround(double(in_len) * ratio));

  AudioBuffer out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len, 0.0f);
  if (in_len == 0) return out;

  constexpr int kTaps = 64;
  constexpr int kHalf = kTaps / 2;
  // Anti-aliasing cutoff sits just under the narrower Nyquist band.
  const double cutoff = 0.5 * std::min(1.0, ratio) * 0.95;

  for (size_t n = 0; n < out_len; ++n) {
    const double t = double(n) / ratio;
    const long center = long(std::floor(t));
    double acc = 0.0, wsum = 0.0;
    for (long j = center - kHalf + 1; j <= center + kHalf; ++j) {
      const double dt = t - double(j);
      const double win =
          0.5 * (1.0 + std::cos(M_PI * dt / double(kHalf)));  // Hann over taps
      double s;
      const double x = 2.0 * cutoff * dt;
      if (std::abs(x) < 1e-9) {
        s = 2.0 * cutoff;
      } else {
        s = 2.0 * cutoff * std::sin(M_PI * x) / (M_PI * x);
      }
      const double w = s * win;
      wsum += w;
      if (j >= 0 && j < long(in_len)) acc += w * double(audio.samples[j]);
    }
    // Normalizing by the kernel sum keeps unity DC gain at every phase.
    out.samples[n] = float(acc / (wsum != 0.0 ? wsum : 1.0));
  }
  return out;
}

}  // namespace se
