#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "allocgen/katz.hpp"

namespace allocgen {

using cplx = std::complex<double>;

/// Values of a generating function on the kmax-th roots of unity.
class ComplexBuffer {
 public:
  ComplexBuffer() = default;
  explicit ComplexBuffer(std::size_t kmax, cplx fill = cplx(0.0, 0.0));
  explicit ComplexBuffer(std::vector<cplx> values);

  std::size_t size() const noexcept { return values_.size(); }
  cplx& operator[](std::size_t j) { return values_[j]; }
  const cplx& operator[](std::size_t j) const { return values_[j]; }
  cplx* data() noexcept { return values_.data(); }
  const cplx* data() const noexcept { return values_.data(); }
  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }
  const std::vector<cplx>& values() const noexcept { return values_; }

  ComplexBuffer& operator*=(const ComplexBuffer& other);
  ComplexBuffer& operator*=(cplx s);

 private:
  std::vector<cplx> values_;
};

/// Entry j is exp(+i 2 pi j / kmax).
ComplexBuffer roots_of_unity(std::size_t kmax);

/// Entry k is sum_j coeffs[j] exp(+i 2 pi j k / kmax); no scaling.
ComplexBuffer dft(const std::vector<double>& coeffs);
/// dft of a zero-padded copy of `coeffs` with length kmax.
ComplexBuffer dft(const std::vector<double>& coeffs, std::size_t kmax);
/// Entry k is (1/kmax) Re sum_j buf[j] exp(-i 2 pi j k / kmax).
std::vector<double> idft(const ComplexBuffer& buf);
/// Complex inverse without taking the real part.
std::vector<cplx> idft_complex(const ComplexBuffer& buf);

ComplexBuffer pointwise_product(const ComplexBuffer& a, const ComplexBuffer& b);

std::vector<double> partial_sum_coeffs(const std::vector<double>& coeffs);

/// P_M(P_B(z)) on the roots, with P_B given by its values there.
ComplexBuffer compound_pgf_on_roots(const KatzParams& frequency, const ComplexBuffer& severity_dft);

/// In-place complex transform; sign +1 is the forward convention above.
void fft_inplace(std::vector<cplx>& x, int sign);

}  // namespace allocgen
