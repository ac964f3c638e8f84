// Copyright 2026 se-enhance authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "se/layers.hpp"

#include <cmath>
#include <cstring>

#include "se/dsp.hpp"
#include "se/error.hpp"

namespace se {

namespace {

void check_channels(const Tensor& x, int expected, const char* who) {
  if (x.rows != expected)
    throw DataError(std::string(who) + ": expected " +
                    std::to_string(expected) + " channels, got " +
                    std::to_string(x.rows));
}

// B[(c*k + j), t] = x[ch0 + c, t*stride + j*dilation], x already padded.
void im2col(const Tensor& x, int ch0, int ch_count, int kernel, int stride,
            int dilation, int t_out, Tensor& cols) {
  for (int c = 0; c < ch_count; ++c) {
    const float* src = x.row(ch0 + c);
    for (int j = 0; j < kernel; ++j) {
      float* dst = cols.row(c * kernel + j);
      const float* s = src + size_t(j) * dilation;
      if (stride == 1) {
        std::memcpy(dst, s, sizeof(float) * t_out);
      } else {
        for (int t = 0; t < t_out; ++t) dst[t] = s[size_t(t) * stride];
      }
    }
  }
}

// Adjoint of im2col: scatter-add cols back into (padded) input gradient.
void col2im(const Tensor& cols, int ch0, int ch_count, int kernel, int stride,
            int dilation, int t_out, Tensor& dx) {
  for (int c = 0; c < ch_count; ++c) {
    float* dst = dx.row(ch0 + c);
    for (int j = 0; j < kernel; ++j) {
      const float* src = cols.row(c * kernel + j);
      float* d = dst + size_t(j) * dilation;
      if (stride == 1) {
        saxpy(size_t(t_out), 1.0f, src, d);
      } else {
        for (int t = 0; t < t_out; ++t) d[size_t(t) * stride] += src[t];
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Pad1d

Tensor Pad1d::forward(const Tensor& x) {
  in_len_ = x.cols;
  Tensor y(x.rows, x.cols + left_ + right_);
  for (int c = 0; c < x.rows; ++c) {
    const float* src = x.row(c);
    float* dst = y.row(c);
    std::memcpy(dst + left_, src, sizeof(float) * x.cols);
    if (mode_ == PadMode::kReflect) {
      for (int i = 0; i < left_; ++i)
        dst[i] = src[reflect_index(long(i) - left_, x.cols)];
      for (int i = 0; i < right_; ++i)
        dst[left_ + x.cols + i] = src[reflect_index(long(x.cols) + i, x.cols)];
    }
    // zero mode: the borders stay zero-initialized
  }
  return y;
}

Tensor Pad1d::backward(const Tensor& dy) {
  Tensor dx(dy.rows, in_len_);
  for (int c = 0; c < dy.rows; ++c) {
    const float* src = dy.row(c);
    float* dst = dx.row(c);
    std::memcpy(dst, src + left_, sizeof(float) * in_len_);
    if (mode_ == PadMode::kReflect) {
      for (int i = 0; i < left_; ++i)
        dst[reflect_index(long(i) - left_, in_len_)] += src[i];
      for (int i = 0; i < right_; ++i)
        dst[reflect_index(long(in_len_) + i, in_len_)] +=
            src[left_ + in_len_ + i];
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Conv1d

Conv1d::Conv1d(std::string name, int in_ch, int out_ch, int kernel, int stride,
               int dilation, int groups, int pad)
    : in_ch_(in_ch),
      out_ch_(out_ch),
      kernel_(kernel),
      stride_(stride),
      dilation_(dilation),
      groups_(groups),
      pad_(pad) {
  if (in_ch % groups != 0 || out_ch % groups != 0)
    throw UsageError("conv1d " + name + ": groups must divide both channel counts");
  const int cols = (in_ch / groups) * kernel;
  v_ = Param{name + ".weight_v", {out_ch, in_ch / groups, kernel},
             std::vector<float>(size_t(out_ch) * cols, 0.0f),
             std::vector<float>(size_t(out_ch) * cols, 0.0f)};
  g_ = Param{name + ".weight_g", {out_ch}, std::vector<float>(out_ch, 0.0f),
             std::vector<float>(out_ch, 0.0f)};
  bias_ = Param{name + ".bias", {out_ch}, std::vector<float>(out_ch, 0.0f),
                std::vector<float>(out_ch, 0.0f)};
}

void Conv1d::collect_params(std::vector<Param*>& out) {
  out.push_back(&v_);
  out.push_back(&g_);
  out.push_back(&bias_);
}

void Conv1d::init_params(Rng& rng) {
  for (float& w : v_.value) w = rng.normal_f(0.0f, 0.02f);
  const int cols = (in_ch_ / groups_) * kernel_;
  for (int o = 0; o < out_ch_; ++o) {
    double s = 0.0;
    for (int i = 0; i < cols; ++i) {
      const float w = v_.value[size_t(o) * cols + i];
      s += double(w) * w;
    }
    g_.value[o] = float(std::sqrt(s));
  }
  std::fill(bias_.value.begin(), bias_.value.end(), 0.0f);
}

Tensor Conv1d::effective_weight() {
  const int cols = (in_ch_ / groups_) * kernel_;
  Tensor w(out_ch_, cols);
  norms_.assign(out_ch_, 0.0f);
  for (int o = 0; o < out_ch_; ++o) {
    const float* v = v_.value.data() + size_t(o) * cols;
    double s = 0.0;
    for (int i = 0; i < cols; ++i) s += double(v[i]) * v[i];
    const float norm = float(std::sqrt(s));
    norms_[o] = norm;
    const float scale = norm > 0.0f ? g_.value[o] / norm : 0.0f;
    float* dst = w.row(o);
    for (int i = 0; i < cols; ++i) dst[i] = scale * v[i];
  }
  return w;
}

int Conv1d::out_length(int in_length) const {
  const int span = dilation_ * (kernel_ - 1) + 1;
  return (in_length + 2 * pad_ - span) / stride_ + 1;
}

Tensor Conv1d::forward(const Tensor& x) {
  check_channels(x, in_ch_, "conv1d");
  const int t_out = out_length(x.cols);
  if (t_out < 1) throw DataError("conv1d: input too short for kernel");

  Tensor x_pad(in_ch_, x.cols + 2 * pad_);
  for (int c = 0; c < in_ch_; ++c)
    std::memcpy(x_pad.row(c) + pad_, x.row(c), sizeof(float) * x.cols);

  Tensor w = effective_weight();
  const int in_g = in_ch_ / groups_;
  const int out_g = out_ch_ / groups_;
  const int kcols = in_g * kernel_;

  Tensor y(out_ch_, t_out);
  Tensor cols(kcols, t_out);
  for (int g = 0; g < groups_; ++g) {
    im2col(x_pad, g * in_g, in_g, kernel_, stride_, dilation_, t_out, cols);
    sgemm(false, false, out_g, t_out, kcols, 1.0f, w.row(g * out_g), kcols,
          cols.data.data(), t_out, 0.0f, y.row(g * out_g), t_out);
  }
  for (int o = 0; o < out_ch_; ++o) {
    const float b = bias_.value[o];
    float* row = y.row(o);
    for (int t = 0; t < t_out; ++t) row[t] += b;
  }

  if (training_) {
    x_pad_ = std::move(x_pad);
    w_ = std::move(w);
  }
  return y;
}

Tensor Conv1d::backward(const Tensor& dy) {
  const int t_out = dy.cols;
  const int in_g = in_ch_ / groups_;
  const int out_g = out_ch_ / groups_;
  const int kcols = in_g * kernel_;

  for (int o = 0; o < out_ch_; ++o) {
    const float* row = dy.row(o);
    double s = 0.0;
    for (int t = 0; t < t_out; ++t) s += row[t];
    bias_.grad[o] += float(s);
  }

  Tensor dw(out_ch_, kcols);
  Tensor dx_pad(in_ch_, x_pad_.cols);
  Tensor cols(kcols, t_out);
  Tensor dcols(kcols, t_out);
  for (int g = 0; g < groups_; ++g) {
    im2col(x_pad_, g * in_g, in_g, kernel_, stride_, dilation_, t_out, cols);
    sgemm(false, true, out_g, kcols, t_out, 1.0f, dy.row(g * out_g), t_out,
          cols.data.data(), t_out, 0.0f, dw.row(g * out_g), kcols);
    sgemm(true, false, kcols, t_out, out_g, 1.0f, w_.row(g * out_g), kcols,
          dy.row(g * out_g), t_out, 0.0f, dcols.data.data(), t_out);
    col2im(dcols, g * in_g, in_g, kernel_, stride_, dilation_, t_out, dx_pad);
  }

  // Chain the effective-weight gradient through w = g * v / ||v||.
  for (int o = 0; o < out_ch_; ++o) {
    const float* v = v_.value.data() + size_t(o) * kcols;
    const float* dwo = dw.row(o);
    const float norm = norms_[o];
    if (norm <= 0.0f) continue;
    double dot = 0.0;
    for (int i = 0; i < kcols; ++i) dot += double(dwo[i]) * v[i];
    const float gn = g_.value[o] / norm;
    const float corr = float(g_.value[o] * dot / (double(norm) * norm * norm));
    g_.grad[o] += float(dot / norm);
    float* dv = v_.grad.data() + size_t(o) * kcols;
    for (int i = 0; i < kcols; ++i) dv[i] += gn * dwo[i] - corr * v[i];
  }

  Tensor dx(in_ch_, x_pad_.cols - 2 * pad_);
  for (int c = 0; c < in_ch_; ++c)
    std::memcpy(dx.row(c), dx_pad.row(c) + pad_, sizeof(float) * dx.cols);
  return dx;
}

// ---------------------------------------------------------------------------
// ConvTranspose1d

ConvTranspose1d::ConvTranspose1d(std::string name, int in_ch, int out_ch,
                                 int kernel, int stride, int crop)
    : in_ch_(in_ch),
      out_ch_(out_ch),
      kernel_(kernel),
      stride_(stride),
      crop_(crop) {
  const int rows = out_ch * kernel;
  v_ = Param{name + ".weight_v", {out_ch, kernel, in_ch},
             std::vector<float>(size_t(rows) * in_ch, 0.0f),
             std::vector<float>(size_t(rows) * in_ch, 0.0f)};
  g_ = Param{name + ".weight_g", {in_ch}, std::vector<float>(in_ch, 0.0f),
             std::vector<float>(in_ch, 0.0f)};
  bias_ = Param{name + ".bias", {out_ch}, std::vector<float>(out_ch, 0.0f),
                std::vector<float>(out_ch, 0.0f)};
}

void ConvTranspose1d::collect_params(std::vector<Param*>& out) {
  out.push_back(&v_);
  out.push_back(&g_);
  out.push_back(&bias_);
}

void ConvTranspose1d::init_params(Rng& rng) {
  for (float& w : v_.value) w = rng.normal_f(0.0f, 0.02f);
  const int rows = out_ch_ * kernel_;
  for (int i = 0; i < in_ch_; ++i) {
    double s = 0.0;
    for (int r = 0; r < rows; ++r) {
      const float w = v_.value[size_t(r) * in_ch_ + i];
      s += double(w) * w;
    }
    g_.value[i] = float(std::sqrt(s));
  }
  std::fill(bias_.value.begin(), bias_.value.end(), 0.0f);
}

Tensor ConvTranspose1d::effective_weight() {
  const int rows = out_ch_ * kernel_;
  Tensor w(rows, in_ch_);
  norms_.assign(in_ch_, 0.0f);
  for (int i = 0; i < in_ch_; ++i) {
    double s = 0.0;
    for (int r = 0; r < rows; ++r) {
      const float x = v_.value[size_t(r) * in_ch_ + i];
      s += double(x) * x;
    }
    norms_[i] = float(std::sqrt(s));
  }
  for (int r = 0; r < rows; ++r) {
    const float* v = v_.value.data() + size_t(r) * in_ch_;
    float* dst = w.row(r);
    for (int i = 0; i < in_ch_; ++i) {
      const float n = norms_[i];
      dst[i] = n > 0.0f ? g_.value[i] / n * v[i] : 0.0f;
    }
  }
  return w;
}

int ConvTranspose1d::out_length(int in_length) const {
  return (in_length - 1) * stride_ + kernel_ - 2 * crop_;
}

Tensor ConvTranspose1d::forward(const Tensor& x) {
  check_channels(x, in_ch_, "conv_transpose1d");
  const int t_in = x.cols;
  const int t_out = out_length(t_in);
  if (t_out < 1) throw DataError("conv_transpose1d: input too short");

  Tensor w = effective_weight();
  Tensor cols(out_ch_ * kernel_, t_in);
  sgemm(false, false, out_ch_ * kernel_, t_in, in_ch_, 1.0f, w.data.data(),
        in_ch_, x.data.data(), t_in, 0.0f, cols.data.data(), t_in);

  Tensor y(out_ch_, t_out);
  for (int o = 0; o < out_ch_; ++o) {
    float* dst = y.row(o);
    const float b = bias_.value[o];
    for (int t = 0; t < t_out; ++t) dst[t] = b;
    for (int j = 0; j < kernel_; ++j) {
      const float* src = cols.row(o * kernel_ + j);
      const long base = long(j) - crop_;
      for (int t = 0; t < t_in; ++t) {
        const long idx = long(t) * stride_ + base;
        if (idx >= 0 && idx < t_out) dst[idx] += src[t];
      }
    }
  }

  if (training_) {
    x_ = x;
    w_ = std::move(w);
  }
  return y;
}

Tensor ConvTranspose1d::backward(const Tensor& dy) {
  const int t_in = x_.cols;
  const int t_out = dy.cols;
  const int rows = out_ch_ * kernel_;

  for (int o = 0; o < out_ch_; ++o) {
    const float* row = dy.row(o);
    double s = 0.0;
    for (int t = 0; t < t_out; ++t) s += row[t];
    bias_.grad[o] += float(s);
  }

  Tensor dcols(rows, t_in);
  for (int o = 0; o < out_ch_; ++o) {
    const float* src = dy.row(o);
    for (int j = 0; j < kernel_; ++j) {
      float* dst = dcols.row(o * kernel_ + j);
      const long base = long(j) - crop_;
      for (int t = 0; t < t_in; ++t) {
        const long idx = long(t) * stride_ + base;
        dst[t] = (idx >= 0 && idx < t_out) ? src[idx] : 0.0f;
      }
    }
  }

  Tensor dw(rows, in_ch_);
  sgemm(false, true, rows, in_ch_, t_in, 1.0f, dcols.data.data(), t_in,
        x_.data.data(), t_in, 0.0f, dw.data.data(), in_ch_);
  Tensor dx(in_ch_, t_in);
  sgemm(true, false, in_ch_, t_in, rows, 1.0f, w_.data.data(), in_ch_,
        dcols.data.data(), t_in, 0.0f, dx.data.data(), t_in);

  // Weight-norm chain per input channel (column slices of the gemm layout).
  for (int i = 0; i < in_ch_; ++i) {
    const float norm = norms_[i];
    if (norm <= 0.0f) continue;
    double dot = 0.0;
    for (int r = 0; r < rows; ++r)
      dot += double(dw.data[size_t(r) * in_ch_ + i]) *
             v_.value[size_t(r) * in_ch_ + i];
    const float gn = g_.value[i] / norm;
    const float corr = float(g_.value[i] * dot / (double(norm) * norm * norm));
    g_.grad[i] += float(dot / norm);
    for (int r = 0; r < rows; ++r) {
      const size_t at = size_t(r) * in_ch_ + i;
      v_.grad[at] += gn * dw.data[at] - corr * v_.value[at];
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Activations

Tensor LeakyReLU::forward(const Tensor& x) {
  Tensor y(x.rows, x.cols);
  for (size_t i = 0; i < x.size(); ++i) {
    const float v = x.data[i];
    y.data[i] = v > 0.0f ? v : slope_ * v;
  }
  if (training_) x_ = x;
  return y;
}

Tensor LeakyReLU::backward(const Tensor& dy) {
  Tensor dx(dy.rows, dy.cols);
  for (size_t i = 0; i < dy.size(); ++i)
    dx.data[i] = dy.data[i] * (x_.data[i] > 0.0f ? 1.0f : slope_);
  return dx;
}

Tensor Tanh::forward(const Tensor& x) {
  Tensor y(x.rows, x.cols);
  for (size_t i = 0; i < x.size(); ++i) y.data[i] = std::tanh(x.data[i]);
  if (training_) y_ = y;
  return y;
}

Tensor Tanh::backward(const Tensor& dy) {
  Tensor dx(dy.rows, dy.cols);
  for (size_t i = 0; i < dy.size(); ++i) {
    const float y = y_.data[i];
    dx.data[i] = dy.data[i] * (1.0f - y * y);
  }
  return dx;
}

// ---------------------------------------------------------------------------
// AvgPool1d

Tensor AvgPool1d::forward(const Tensor& x) {
  in_len_ = x.cols;
  in_ch_ = x.rows;
  const int t_out = (x.cols + 2 * pad_ - kernel_) / stride_ + 1;
  if (t_out < 1) throw DataError("avg_pool1d: input too short");
  const float inv = 1.0f / float(kernel_);
  Tensor y(x.rows, t_out);
  for (int c = 0; c < x.rows; ++c) {
    const float* src = x.row(c);
    float* dst = y.row(c);
    for (int t = 0; t < t_out; ++t) {
      float acc = 0.0f;
      const long start = long(t) * stride_ - pad_;
      for (int j = 0; j < kernel_; ++j) {
        const long idx = start + j;
        if (idx >= 0 && idx < x.cols) acc += src[idx];
      }
      dst[t] = acc * inv;
    }
  }
  return y;
}

Tensor AvgPool1d::backward(const Tensor& dy) {
  Tensor dx(in_ch_, in_len_);
  const float inv = 1.0f / float(kernel_);
  for (int c = 0; c < in_ch_; ++c) {
    const float* src = dy.row(c);
    float* dst = dx.row(c);
    for (int t = 0; t < dy.cols; ++t) {
      const float v = src[t] * inv;
      const long start = long(t) * stride_ - pad_;
      for (int j = 0; j < kernel_; ++j) {
        const long idx = start + j;
        if (idx >= 0 && idx < in_len_) dst[idx] += v;
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Containers

Tensor Sequential::forward(const Tensor& x) {
  Tensor h = x;
  for (auto& layer : layers_) h = layer->forward(h);
  return h;
}

Tensor Sequential::backward(const Tensor& dy) {
  Tensor d = dy;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
    d = (*it)->backward(d);
  return d;
}

void Sequential::collect_params(std::vector<Param*>& out) {
  for (auto& layer : layers_) layer->collect_params(out);
}

void Sequential::init_params(Rng& rng) {
  for (auto& layer : layers_) layer->init_params(rng);
}

void Sequential::set_training(bool training) {
  Layer::set_training(training);
  for (auto& layer : layers_) layer->set_training(training);
}

ResBlock1d::ResBlock1d(const std::string& name, int channels, int dilation,
                       float slope, PadMode pad_mode)
    : shortcut_(name + ".shortcut", channels, channels, 1) {
  branch_.add(std::make_unique<LeakyReLU>(slope));
  branch_.add(std::make_unique<Pad1d>(dilation, dilation, pad_mode));
  branch_.add(std::make_unique<Conv1d>(name + ".conv1", channels, channels, 3,
                                       1, dilation, 1, 0));
  branch_.add(std::make_unique<LeakyReLU>(slope));
  branch_.add(
      std::make_unique<Conv1d>(name + ".conv2", channels, channels, 1));
}

Tensor ResBlock1d::forward(const Tensor& x) {
  Tensor y = branch_.forward(x);
  const Tensor s = shortcut_.forward(x);
  for (size_t i = 0; i < y.size(); ++i) y.data[i] += s.data[i];
  return y;
}

Tensor ResBlock1d::backward(const Tensor& dy) {
  Tensor dx = branch_.backward(dy);
  const Tensor ds = shortcut_.backward(dy);
  for (size_t i = 0; i < dx.size(); ++i) dx.data[i] += ds.data[i];
  return dx;
}

void ResBlock1d::collect_params(std::vector<Param*>& out) {
  branch_.collect_params(out);
  shortcut_.collect_params(out);
}

void ResBlock1d::init_params(Rng& rng) {
  branch_.init_params(rng);
  shortcut_.init_params(rng);
}

void ResBlock1d::set_training(bool training) {
  Layer::set_training(training);
  branch_.set_training(training);
  shortcut_.set_training(training);
}

// ---------------------------------------------------------------------------
// Optimization helpers

void zero_grads(const std::vector<Param*>& params) {
  for (Param* p : params) p->zero_grad();
}

size_t count_parameters(const std::vector<Param*>& params) {
  size_t n = 0;
  for (const Param* p : params) n += p->size();
  return n;
}

void AdamOptimizer::attach(const std::vector<Param*>& params) {
  m_.clear();
  v_.clear();
  for (const Param* p : params) {
    m_.emplace_back(p->size(), 0.0f);
    v_.emplace_back(p->size(), 0.0f);
  }
}

void AdamOptimizer::step(const std::vector<Param*>& params, float lr) {
  if (m_.size() != params.size())
    throw NumericError("adam: optimizer not attached to this parameter set");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, double(t_));
  const double bc2 = 1.0 - std::pow(beta2_, double(t_));
  const float b1 = float(beta1_), b2 = float(beta2_);
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Param& p = *params[pi];
    float* m = m_[pi].data();
    float* v = v_[pi].data();
    for (size_t i = 0; i < p.size(); ++i) {
      const float grad = p.grad[i];
      m[i] = b1 * m[i] + (1.0f - b1) * grad;
      v[i] = b2 * v[i] + (1.0f - b2) * grad * grad;
      const double mhat = double(m[i]) / bc1;
      const double vhat = double(v[i]) / bc2;
      p.value[i] -= float(double(lr) * mhat / (std::sqrt(vhat) + eps_));
    }
  }
}

double clip_grad_norm(const std::vector<Param*>& params, double max_norm) {
  double sq = 0.0;
  for (const Param* p : params)
    for (const float gval : p->grad) sq += double(gval) * gval;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const float scale = float(max_norm / norm);
    for (Param* p : params)
      for (float& gval : p->grad) gval *= scale;
  }
  return norm;
}

}  // namespace se
