// Copyright 2026 se-enhance authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <vector>

namespace se {

// Mono waveform. Samples are dimensionless amplitudes in [-1, 1]; the
// canonical model rate is 22050 Hz but buffers carry whatever rate their
// source had until resampled.
struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate = 22050;

  double seconds() const {
    return sample_rate > 0 ? double(samples.size()) / sample_rate : 0.0;
  }
};

// Reads a RIFF/WAVE file. Accepts PCM16 and IEEE float32; multichannel
// input is averaged down to mono. Throws DataError with a distinct message
// for missing files, malformed headers and unsupported encodings.
AudioBuffer load_wav(const std::string& path);

// Writes mono PCM16. Samples are clamped to [-1, 1] before quantization;
// a round trip through load_wav matches within 1/32768 per sample.
void save_wav(const std::string& path, const AudioBuffer& audio);

// Sample rate header probe without decoding the payload. Returns the mono
// sample count and rate.
struct WavInfo {
  size_t frames = 0;
  int sample_rate = 0;
};
WavInfo wav_info(const std::string& path);

// Windowed-sinc resampler (64-tap Hann-windowed kernel). Output length is
// round(len * target_rate / source_rate). Equal rates return the input
// unchanged.
AudioBuffer resample(const AudioBuffer& audio, int target_rate);

}  // namespace se
