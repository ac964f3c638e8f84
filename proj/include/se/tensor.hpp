// Copyright 2026 se-enhance authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace se {

// Dense row-major float matrix. Activations are (channels x time); plain
// matrices (mel filterbank, spectrogram) use it as (rows x cols).
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<float> data;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), data(size_t(r) * c, 0.0f) {}

  float& at(int r, int c) { return data[size_t(r) * cols + c]; }
  float at(int r, int c) const { return data[size_t(r) * cols + c]; }
  float* row(int r) { return data.data() + size_t(r) * cols; }
  const float* row(int r) const { return data.data() + size_t(r) * cols; }
  size_t size() const { return data.size(); }
  bool same_shape(const Tensor& o) const {
    return rows == o.rows && cols == o.cols;
  }
  void zero() { std::fill(data.begin(), data.end(), 0.0f); }
};

// C(m x n) = alpha * op(A) @ op(B) + beta * C, all row-major.
void sgemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
           const float* a, int lda, const float* b, int ldb, float beta,
           float* c, int ldc);

// y += alpha * x
void saxpy(size_t n, float alpha, const float* x, float* y);

// Number of compute threads used by the matrix backend (1 = deterministic
// regardless of machine load; >1 is still reproducible for a fixed count).
void set_compute_threads(int n);
int compute_threads();

}  // namespace se
