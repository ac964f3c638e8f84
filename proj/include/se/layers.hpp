// Copyright 2026 se-enhance authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "se/rng.hpp"
#include "se/tensor.hpp"

namespace se {

struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<float> value;
  std::vector<float> grad;

  size_t size() const { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0f); }
};

enum class PadMode { kReflect, kZero };

// Single-example layer with explicit reverse-mode passes. forward() caches
// whatever backward() needs while training; in inference mode caches are
// skipped so long signals don't hold activation memory.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x) = 0;
  virtual Tensor backward(const Tensor& dy) = 0;
  virtual void collect_params(std::vector<Param*>& out) {}
  virtual void init_params(Rng& rng) {}
  virtual void set_training(bool training) { training_ = training; }

 protected:
  bool training_ = true;
};

class Pad1d final : public Layer {
 public:
  Pad1d(int left, int right, PadMode mode)
      : left_(left), right_(right), mode_(mode) {}
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& dy) override;

 private:
  int left_, right_;
  PadMode mode_;
  int in_len_ = 0;
};

// Weight-normalized 1-D convolution (dilation, stride, groups, symmetric
// zero padding). The stored direction tensor is (out_ch x in_ch/groups * k)
// with one magnitude scalar per output channel.
class Conv1d final : public Layer {
 public:
  Conv1d(std::string name, int in_ch, int out_ch, int kernel, int stride = 1,
         int dilation = 1, int groups = 1, int pad = 0);
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& dy) override;
  void collect_params(std::vector<Param*>& out) override;
  void init_params(Rng& rng) override;

  int out_length(int in_length) const;

 private:
  Tensor effective_weight();  // w = g * v / ||v|| per output channel

  int in_ch_, out_ch_, kernel_, stride_, dilation_, groups_, pad_;
  Param v_, g_, bias_;
  // forward caches
  Tensor x_pad_, w_;
  std::vector<float> norms_;
};

// Weight-normalized transposed 1-D convolution. The direction tensor is
// stored pre-arranged for the column gemm, (out_ch * k x in_ch), with one
// magnitude scalar per input channel. `crop` trims both output ends the way
// framework transposed convolutions interpret padding; kernel 2r, stride r,
// crop r/2 yields an exact r-fold length increase.
class ConvTranspose1d final : public Layer {
 public:
  ConvTranspose1d(std::string name, int in_ch, int out_ch, int kernel,
                  int stride, int crop);
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& dy) override;
  void collect_params(std::vector<Param*>& out) override;
  void init_params(Rng& rng) override;

  int out_length(int in_length) const;

 private:
  Tensor effective_weight();

  int in_ch_, out_ch_, kernel_, stride_, crop_;
  Param v_, g_, bias_;
  Tensor x_, w_;
  std::vector<float> norms_;
};

class LeakyReLU final : public Layer {
 public:
  explicit LeakyReLU(float slope) : slope_(slope) {}
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& dy) override;

 private:
  float slope_;
  Tensor x_;
};

class Tanh final : public Layer {
 public:
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& dy) override;

 private:
  Tensor y_;
};

// Average pooling with zero padding included in the divisor.
class AvgPool1d final : public Layer {
 public:
  AvgPool1d(int kernel, int stride, int pad)
      : kernel_(kernel), stride_(stride), pad_(pad) {}
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& dy) override;

 private:
  int kernel_, stride_, pad_;
  int in_len_ = 0, in_ch_ = 0;
};

class Sequential final : public Layer {
 public:
  Sequential() = default;
  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& dy) override;
  void collect_params(std::vector<Param*>& out) override;
  void init_params(Rng& rng) override;
  void set_training(bool training) override;
  size_t size() const { return layers_.size(); }
  Layer& at(size_t i) { return *layers_[i]; }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

// leaky -> pad(d) -> conv k3 dilated -> leaky -> conv k1, plus a conv k1
// shortcut.
class ResBlock1d final : public Layer {
 public:
  ResBlock1d(const std::string& name, int channels, int dilation, float slope,
             PadMode pad_mode);
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& dy) override;
  void collect_params(std::vector<Param*>& out) override;
  void init_params(Rng& rng) override;
  void set_training(bool training) override;

 private:
  Sequential branch_;
  Conv1d shortcut_;
};

void zero_grads(const std::vector<Param*>& params);
size_t count_parameters(const std::vector<Param*>& params);

// Adam with bias correction. Moment buffers are float32 and updates run in
// a fixed parameter order, so optimization is bit-reproducible.
class AdamOptimizer {
 public:
  AdamOptimizer(double beta1, double beta2, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void attach(const std::vector<Param*>& params);
  void step(const std::vector<Param*>& params, float lr);

  int64_t steps() const { return t_; }
  void set_steps(int64_t t) { t_ = t; }
  std::vector<std::vector<float>>& moment1() { return m_; }
  std::vector<std::vector<float>>& moment2() { return v_; }

 private:
  double beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<std::vector<float>> m_, v_;
};

// Scales gradients so their global L2 norm is at most max_norm (no-op when
// max_norm <= 0). Returns the pre-clip norm.
double clip_grad_norm(const std::vector<Param*>& params, double max_norm);

}  // namespace se
