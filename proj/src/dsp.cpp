// Copyright 2026 se-enhance authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "se/dsp.hpp"

#include <cmath>
#include <string>

#include "se/error.hpp"

namespace se {

namespace {

constexpr double kTwoPi = 6.283185307179586477;

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) {
  return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0);
}

// Periodic Hann of win_length, centered within filter_length.
std::vector<float> build_window(const StftConfig& cfg) {
  std::vector<float> w(cfg.filter_length, 0.0f);
  const int offset = (cfg.filter_length - cfg.win_length) / 2;
  for (int n = 0; n < cfg.win_length; ++n)
    w[offset + n] =
        float(0.5 - 0.5 * std::cos(kTwoPi * n / double(cfg.win_length)));
  return w;
}

}  // namespace

int reflect_index(long i, int n) {
  if (n <= 1) return 0;
  const long period = 2L * (n - 1);
  long j = i % period;
  if (j < 0) j += period;
  return int(j < n ? j : period - j);
}

void StftConfig::validate() const {
  if (filter_length <= 0 || hop_length <= 0 || win_length <= 0)
    throw UsageError("stft: lengths must be positive");
  if (win_length > filter_length)
    throw UsageError("stft: win_length must not exceed filter_length");
  if (hop_length > filter_length)
    throw UsageError("stft: hop_length must not exceed filter_length");
}

void MelConfig::validate() const {
  stft.validate();
  if (n_mels < 1) throw UsageError("mel: n_mels must be >= 1");
  if (!(f_min < f_max))
    throw UsageError("mel: f_min must be strictly below f_max");
  if (f_max > sample_rate / 2.0 + 1e-9)
    throw UsageError("mel: f_max above Nyquist");
  if (sample_rate <= 0) throw UsageError("mel: sample_rate must be positive");
  if (log_floor <= 0.0) throw UsageError("mel: log_floor must be positive");
}

Tensor mel_filterbank(const MelConfig& config) {
  config.validate();
  const int bins = config.stft.bins();
  Tensor fb(config.n_mels, bins);

  const double mel_lo = hz_to_mel(config.f_min);
  const double mel_hi = hz_to_mel(config.f_max);
  std::vector<double> edges(config.n_mels + 2);
  for (int i = 0; i < config.n_mels + 2; ++i)
    edges[i] =
        mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / double(config.n_mels + 1));

  const double bin_hz =
      double(config.sample_rate) / double(config.stft.filter_length);
  for (int m = 0; m < config.n_mels; ++m) {
    const double lo = edges[m], peak = edges[m + 1], hi = edges[m + 2];
    double row_sum = 0.0;
    for (int k = 0; k < bins; ++k) {
      const double f = k * bin_hz;
      if (f <= lo || f >= hi) continue;
      const double up = (f - lo) / (peak - lo);
      const double down = (hi - f) / (hi - peak);
      const double w = std::max(0.0, std::min(up, down));
      fb.at(m, k) = float(w);
      row_sum += w;
    }
    if (row_sum <= 0.0)
      throw UsageError("mel: filter row " + std::to_string(m) +
                       " has no spectral support; increase filter_length or "
                       "reduce n_mels");
  }
  return fb;
}

ConvStft::ConvStft(const StftConfig& config) : cfg_(config) {
  cfg_.validate();
  const int bins = cfg_.bins();
  const int n = cfg_.filter_length;
  const std::vector<float> window = build_window(cfg_);
  kernel_ = Tensor(2 * bins, n);
  for (int k = 0; k < bins; ++k) {
    for (int t = 0; t < n; ++t) {
      const double phase = kTwoPi * k * t / double(n);
      kernel_.at(k, t) = float(std::cos(phase)) * window[t];
      kernel_.at(bins + k, t) = float(-std::sin(phase)) * window[t];
    }
  }
}

Tensor ConvStft::magnitude(const std::vector<float>& audio,
                           StftCache* cache) const {
  if (audio.empty()) throw DataError("stft: input shorter than 1 sample");

  const int frames = cfg_.frames_for(audio.size());
  const int n = cfg_.filter_length;
  const int bins = cfg_.bins();
  const int pad_left = cfg_.pad_left();

  // Frame gather doubles as the reflection pad: indices bounce off the ends.
  Tensor frames_mat(n, frames);
  const int in_len = int(audio.size());
  for (int t = 0; t < n; ++t) {
    float* row = frames_mat.row(t);
    for (int f = 0; f < frames; ++f) {
      const long src = long(f) * cfg_.hop_length + t - pad_left;
      row[f] = audio[reflect_index(src, in_len)];
    }
  }

  Tensor spec(2 * bins, frames);
  sgemm(false, false, 2 * bins, frames, n, 1.0f, kernel_.data.data(), n,
        frames_mat.data.data(), frames, 0.0f, spec.data.data(), frames);

  Tensor mag(bins, frames);
  for (int k = 0; k < bins; ++k) {
    const float* re = spec.row(k);
    const float* im = spec.row(bins + k);
    float* out = mag.row(k);
    for (int f = 0; f < frames; ++f)
      out[f] = std::sqrt(re[f] * re[f] + im[f] * im[f]);
  }

  if (cache) {
    cache->in_len = audio.size();
    cache->mag = mag;
    cache->re = Tensor(bins, frames);
    cache->im = Tensor(bins, frames);
    std::copy_n(spec.data.data(), size_t(bins) * frames,
                cache->re.data.data());
    std::copy_n(spec.data.data() + size_t(bins) * frames,
                size_t(bins) * frames, cache->im.data.data());
  }
  return mag;
}

std::vector<float> ConvStft::magnitude_backward(const Tensor& dmag,
                                                const StftCache& cache) const {
  const int bins = cfg_.bins();
  const int frames = dmag.cols;
  const int n = cfg_.filter_length;
  const int pad_left = cfg_.pad_left();

  // d|z| = (re/|z|) d(re) + (im/|z|) d(im); zero magnitude gets subgradient 0.
  Tensor dspec(2 * bins, frames);
  for (int k = 0; k < bins; ++k) {
    const float* re = cache.re.row(k);
    const float* im = cache.im.row(k);
    const float* mag = cache.mag.row(k);
    const float* dm = dmag.row(k);
    float* dre = dspec.row(k);
    float* dim = dspec.row(bins + k);
    for (int f = 0; f < frames; ++f) {
      const float inv = mag[f] > 0.0f ? dm[f] / mag[f] : 0.0f;
      dre[f] = re[f] * inv;
      dim[f] = im[f] * inv;
    }
  }

  Tensor dframes(n, frames);
  sgemm(true, false, n, frames, 2 * bins, 1.0f, kernel_.data.data(), n,
        dspec.data.data(), frames, 0.0f, dframes.data.data(), frames);

  std::vector<float> dx(cache.in_len, 0.0f);
  const int in_len = int(cache.in_len);
  for (int t = 0; t < n; ++t) {
    const float* row = dframes.row(t);
    for (int f = 0; f < frames; ++f) {
      const long src = long(f) * cfg_.hop_length + t - pad_left;
      dx[reflect_index(src, in_len)] += row[f];
    }
  }
  return dx;
}

LogMel::LogMel(const MelConfig& config)
    : cfg_(config), stft_(config.stft), filterbank_(mel_filterbank(config)) {}

Tensor LogMel::forward(const std::vector<float>& audio,
                       LogMelCache* cache) const {
  const Tensor mag = stft_.magnitude(audio, cache ? &cache->stft : nullptr);
  const int frames = mag.cols;

  Tensor mel(cfg_.n_mels, frames);
  sgemm(false, false, cfg_.n_mels, frames, mag.rows, 1.0f,
        filterbank_.data.data(), filterbank_.cols, mag.data.data(), frames,
        0.0f, mel.data.data(), frames);
  if (cache) cache->mel_mag = mel;

  const float floor = float(cfg_.log_floor);
  Tensor out(cfg_.n_mels, frames);
  for (size_t i = 0; i < mel.size(); ++i)
    out.data[i] = std::log(std::max(mel.data[i], floor));
  return out;
}

std::vector<float> LogMel::backward(const Tensor& dlogmel,
                                    const LogMelCache& cache) const {
  const float floor = float(cfg_.log_floor);
  Tensor dmel(dlogmel.rows, dlogmel.cols);
  for (size_t i = 0; i < dmel.size(); ++i) {
    const float m = cache.mel_mag.data[i];
    dmel.data[i] = m > floor ? dlogmel.data[i] / m : 0.0f;
  }

  Tensor dmag(cache.stft.mag.rows, cache.stft.mag.cols);
  sgemm(true, false, dmag.rows, dmag.cols, cfg_.n_mels, 1.0f,
        filterbank_.data.data(), filterbank_.cols, dmel.data.data(),
        dmel.cols, 0.0f, dmag.data.data(), dmag.cols);

  return stft_.magnitude_backward(dmag, cache.stft);
}

MelSpectrogram LogMel::compute(const AudioBuffer& audio) const {
  if (audio.sample_rate != cfg_.sample_rate)
    throw DataError("log_mel: audio is " + std::to_string(audio.sample_rate) +
                    " Hz but config expects " +
                    std::to_string(cfg_.sample_rate) + " Hz");
  MelSpectrogram m;
  m.config = cfg_;
  m.values = forward(audio.samples);
  return m;
}

MelSpectrogram log_mel(const AudioBuffer& audio, const MelConfig& config) {
  return LogMel(config).compute(audio);
}

}  // namespace se
