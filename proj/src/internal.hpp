#pragma once

#include <cstddef>
#include <vector>

#include "allocgen/gf.hpp"

namespace allocgen::detail {

inline constexpr std::size_t kProductChunk = 64;

inline cplx mul(cplx a, cplx b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

/// Product of the buffers in index order, reduced in fixed chunks so the
/// result does not depend on the thread count.
ComplexBuffer ordered_product(const std::vector<ComplexBuffer>& factors, std::size_t kmax);

double min_abs(const ComplexBuffer& b);

/// Bins 0..n/2 of the forward transform of the real sequence x[0..len), zero padded to n.
void rdft_half(const double* x, std::size_t len, std::size_t n, cplx* out);

/// Real inverse transform of a Hermitian spectrum given by its bins 0..n/2.
void irdft_half(const cplx* half, std::size_t n, double* out);

}  // namespace allocgen::detail
