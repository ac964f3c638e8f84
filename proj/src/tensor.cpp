// Copyright 2026 se-enhance authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "se/tensor.hpp"

#include <cblas.h>

namespace se {

void sgemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
           const float* a, int lda, const float* b, int ldb, float beta,
           float* c, int ldc) {
  cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b,
              ldb, beta, c, ldc);
}

void saxpy(size_t n, float alpha, const float* x, float* y) {
  cblas_saxpy(int(n), alpha, x, 1, y, 1);
}

void set_compute_threads(int n) {
  if (n >= 1) openblas_set_num_threads(n);
}

int compute_threads() { return openblas_get_num_threads(); }

}  // namespace se
