// Copyright 2026 se-enhance authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <vector>

#include "se/audio.hpp"
#include "se/tensor.hpp"

namespace se {

struct StftConfig {
  int filter_length = 1024;
  int hop_length = 256;
  int win_length = 1024;  // Hann window, zero-padded to filter_length if shorter

  int bins() const { return filter_length / 2 + 1; }
  int pad_left() const { return (filter_length - hop_length) / 2; }
  // Reflection padding is sized so that frames = ceil(len / hop) for every
  // input length, and exactly (filter - hop)/2 per side for hop-aligned
  // lengths. The generator's 256x upsampling then inverts the hop exactly.
  int frames_for(size_t len) const {
    return int((len + size_t(hop_length) - 1) / size_t(hop_length));
  }
  void validate() const;
};

struct MelConfig {
  int n_mels = 80;
  double f_min = 0.0;
  double f_max = 8000.0;
  int sample_rate = 22050;
  StftConfig stft;
  double log_floor = 1e-5;

  void validate() const;
};

struct MelSpectrogram {
  Tensor values;  // n_mels x frames, natural-log magnitude
  MelConfig config;
};

// Triangular filters spaced uniformly on the HTK mel scale
// (mel = 2595 * log10(1 + f/700)) between f_min and f_max. Shape is
// n_mels x bins; every row has strictly positive sum and bins above f_max
// are zero in every row.
Tensor mel_filterbank(const MelConfig& config);

// Intermediate products of one magnitude STFT, kept for the backward pass
// of losses that differentiate through the mel pipeline.
struct StftCache {
  Tensor re, im, mag;
  size_t in_len = 0;
};

// STFT realized as a strided 1-D convolution whose fixed kernels are the
// Hann-windowed cosine/sine DFT basis rows.
class ConvStft {
 public:
  explicit ConvStft(const StftConfig& config);

  // audio -> (bins x frames) magnitudes. Input must be at least 1 sample.
  Tensor magnitude(const std::vector<float>& audio,
                   StftCache* cache = nullptr) const;

  // d(loss)/d(magnitude) -> d(loss)/d(audio), adjoint of magnitude().
  std::vector<float> magnitude_backward(const Tensor& dmag,
                                        const StftCache& cache) const;

  const StftConfig& config() const { return cfg_; }

 private:
  StftConfig cfg_;
  Tensor kernel_;  // (2*bins) x filter_length: cos rows then -sin rows
};

struct LogMelCache {
  StftCache stft;
  Tensor mel_mag;  // pre-clamp filterbank output
};

// The full model-input pipeline: conv-STFT -> mel filterbank -> ln with a
// magnitude floor. Holds the precomputed kernels for repeated use.
class LogMel {
 public:
  explicit LogMel(const MelConfig& config);

  MelSpectrogram compute(const AudioBuffer& audio) const;

  // Differentiable form over raw samples at the configured rate.
  Tensor forward(const std::vector<float>& audio,
                 LogMelCache* cache = nullptr) const;
  std::vector<float> backward(const Tensor& dlogmel,
                              const LogMelCache& cache) const;

  const MelConfig& config() const { return cfg_; }

 private:
  MelConfig cfg_;
  ConvStft stft_;
  Tensor filterbank_;
};

MelSpectrogram log_mel(const AudioBuffer& audio, const MelConfig& config);

// Bouncing reflection index into [0, n). Degenerates to 0 for n == 1, so
// inputs shorter than the pad width still reflect sensibly.
int reflect_index(long i, int n);

}  // namespace se
