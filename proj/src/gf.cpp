#include "allocgen/gf.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "allocgen/error.hpp"
#include "allocgen/pmf.hpp"
#include "internal.hpp"

namespace allocgen {

namespace {

void require_pow2(std::size_t n) {
  if (!is_pow2(n)) fail(ErrorCode::InvalidSize, "length " + std::to_string(n) + " is not a power of two");
}

struct Plan {
  std::size_t n;
  std::vector<cplx> twiddle;  // exp(+i 2 pi k / n), k < n/2
  std::vector<cplx> stage;    // stage with half length h stored contiguously at offset h
  std::vector<std::uint32_t> bitrev;
};

std::shared_ptr<const Plan> make_plan(std::size_t n) {
  auto p = std::make_shared<Plan>();
  p->n = n;
  p->twiddle.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const long double ang =
        2.0L * std::numbers::pi_v<long double> * static_cast<long double>(k) / static_cast<long double>(n);
    p->twiddle[k] = cplx(static_cast<double>(std::cos(ang)), static_cast<double>(std::sin(ang)));
  }
  // exact values at the quarter points
  if (n >= 4) p->twiddle[n / 4] = cplx(0.0, 1.0);
  p->stage.resize(n);
  for (std::size_t h = 1; h < n; h <<= 1)
    for (std::size_t j = 0; j < h; ++j) p->stage[h + j] = p->twiddle[j * (n / (2 * h))];
  p->bitrev.resize(n);
  unsigned bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (unsigned b = 0; b < bits; ++b)
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    p->bitrev[i] = static_cast<std::uint32_t>(r);
  }
  return p;
}

std::shared_ptr<const Plan> plan_for(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const Plan>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto p = make_plan(n);
  cache.emplace(n, p);
  return p;
}

// Returns exp(sign * i 2 pi k / n) for k < n, using the half table.
inline cplx root(const Plan& p, std::size_t k, int sign) {
  const std::size_t half = p.n / 2;
  cplx w = k < half ? p.twiddle[k] : -p.twiddle[k - half];
  return sign > 0 ? w : std::conj(w);
}

}  // namespace

void fft_inplace(std::vector<cplx>& x, int sign) {
  const std::size_t n = x.size();
  require_pow2(n);
  if (n == 1) return;
  const auto plan = plan_for(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = plan->bitrev[i];
    if (i < r) std::swap(x[i], x[r]);
  }
  cplx* d = x.data();
  const double s = sign > 0 ? 1.0 : -1.0;
  auto tw = [&](std::size_t idx) {
    const cplx w = plan->stage[idx];
    return cplx(w.real(), s * w.imag());
  };
  std::size_t h = 1;
  unsigned bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  if (bits % 2 == 1) {
    for (std::size_t i = 0; i < n; i += 2) {
      const cplx a = d[i], b = d[i + 1];
      d[i] = a + b;
      d[i + 1] = a - b;
    }
    h = 2;
  }
  // Two consecutive radix-2 stages (half lengths h and 2h) per sweep.
  for (; h < n; h <<= 2) {
    for (std::size_t start = 0; start < n; start += 4 * h) {
      cplx* p0 = d + start;
      cplx* p1 = p0 + h;
      cplx* p2 = p1 + h;
      cplx* p3 = p2 + h;
      for (std::size_t j = 0; j < h; ++j) {
        const cplx w1 = tw(h + j), w2 = tw(2 * h + j);
        const cplx w3(-s * w2.imag(), s * w2.real());
        const cplx t1 = detail::mul(w1, p1[j]), t3 = detail::mul(w1, p3[j]);
        const cplx x0 = p0[j] + t1, x1 = p0[j] - t1, x2 = p2[j] + t3, x3 = p2[j] - t3;
        const cplx u2 = detail::mul(w2, x2), u3 = detail::mul(w3, x3);
        p0[j] = x0 + u2;
        p2[j] = x0 - u2;
        p1[j] = x1 + u3;
        p3[j] = x1 - u3;
      }
    }
  }
}

ComplexBuffer::ComplexBuffer(std::size_t kmax, cplx fill) : values_(kmax, fill) { require_pow2(kmax); }

ComplexBuffer::ComplexBuffer(std::vector<cplx> values) : values_(std::move(values)) {
  require_pow2(values_.size());
}

ComplexBuffer& ComplexBuffer::operator*=(const ComplexBuffer& other) {
  if (other.size() != size())
    fail(ErrorCode::SizeMismatch,
         "buffer lengths " + std::to_string(size()) + " and " + std::to_string(other.size()));
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] = detail::mul(values_[j], other.values_[j]);
  return *this;
}

ComplexBuffer& ComplexBuffer::operator*=(cplx s) {
  for (auto& v : values_) v *= s;
  return *this;
}

ComplexBuffer roots_of_unity(std::size_t kmax) {
  require_pow2(kmax);
  const auto plan = plan_for(kmax);
  std::vector<cplx> v(kmax);
  if (kmax == 1) {
    v[0] = 1.0;
  } else {
    for (std::size_t j = 0; j < kmax; ++j) v[j] = root(*plan, j, +1);
  }
  return ComplexBuffer(std::move(v));
}

namespace detail {

void rdft_half(const double* x, std::size_t len, std::size_t n, cplx* out) {
  require_pow2(n);
  if (len > n) fail(ErrorCode::InvalidSize, "coefficient vector longer than transform length");
  if (n == 1) {
    out[0] = len ? x[0] : 0.0;
    return;
  }
  // Two real halves packed into one complex transform of length n/2.
  const std::size_t m = n / 2;
  std::vector<cplx> z(m);
  std::size_t j = 0;
  for (; 2 * j + 1 < len; ++j) z[j] = cplx(x[2 * j], x[2 * j + 1]);
  if (2 * j < len) z[j] = cplx(x[2 * j], 0.0);
  fft_inplace(z, +1);
  const auto plan = plan_for(n);
  const cplx* w = plan->twiddle.data();
  out[0] = cplx(z[0].real() + z[0].imag(), 0.0);
  out[m] = cplx(z[0].real() - z[0].imag(), 0.0);
  for (std::size_t k = 1; k < m; ++k) {
    const cplx zk = z[k];
    const cplx zc = std::conj(z[m - k]);
    const cplx e = 0.5 * (zk + zc);
    const cplx dz = zk - zc;
    const cplx o(0.5 * dz.imag(), -0.5 * dz.real());
    out[k] = e + detail::mul(w[k], o);
  }
}

void irdft_half(const cplx* half, std::size_t n, double* out) {
  require_pow2(n);
  if (n == 1) {
    out[0] = half[0].real();
    return;
  }
  const std::size_t m = n / 2;
  const auto plan = plan_for(n);
  const cplx* w = plan->twiddle.data();
  std::vector<cplx> z(m);
  z[0] = cplx(half[0].real() + half[m].real(), half[0].real() - half[m].real());
  for (std::size_t k = 1; k < m; ++k) {
    const cplx a = half[k];
    const cplx b = std::conj(half[m - k]);
    const cplx t = detail::mul(a - b, std::conj(w[k]));
    z[k] = (a + b) + cplx(-t.imag(), t.real());
  }
  fft_inplace(z, -1);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < m; ++j) {
    out[2 * j] = z[j].real() * scale;
    out[2 * j + 1] = z[j].imag() * scale;
  }
}

}  // namespace detail

ComplexBuffer dft(const std::vector<double>& coeffs, std::size_t kmax) {
  require_pow2(kmax);
  if (coeffs.size() > kmax)
    fail(ErrorCode::InvalidSize, "coefficient vector longer than transform length");
  const std::size_t n = kmax;
  std::vector<cplx> out(n);
  detail::rdft_half(coeffs.data(), coeffs.size(), n, out.data());
  for (std::size_t k = 1; k < n / 2; ++k) out[n - k] = std::conj(out[k]);
  return ComplexBuffer(std::move(out));
}

ComplexBuffer dft(const std::vector<double>& coeffs) { return dft(coeffs, coeffs.size()); }

std::vector<double> idft(const ComplexBuffer& buf) {
  const std::size_t n = buf.size();
  require_pow2(n);
  // Hermitian part of the spectrum yields the real part of the inverse.
  std::vector<cplx> half(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) half[k] = 0.5 * (buf[k % n] + std::conj(buf[(n - k) % n]));
  std::vector<double> out(n);
  detail::irdft_half(half.data(), n, out.data());
  return out;
}

std::vector<cplx> idft_complex(const ComplexBuffer& buf) {
  std::vector<cplx> x(buf.values());
  fft_inplace(x, -1);
  const double scale = 1.0 / static_cast<double>(x.size());
  for (auto& v : x) v *= scale;
  return x;
}

ComplexBuffer pointwise_product(const ComplexBuffer& a, const ComplexBuffer& b) {
  ComplexBuffer out = a;
  out *= b;
  return out;
}

std::vector<double> partial_sum_coeffs(const std::vector<double>& coeffs) {
  std::vector<double> out(coeffs.size());
  double s = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    s += coeffs[k];
    out[k] = s;
  }
  return out;
}

ComplexBuffer compound_pgf_on_roots(const KatzParams& frequency, const ComplexBuffer& severity_dft) {
  frequency.validate();
  ComplexBuffer out(severity_dft.size());
  for (std::size_t j = 0; j < severity_dft.size(); ++j) {
    const cplx pb = severity_dft[j];
    if (frequency.a != 0.0 && std::abs(frequency.a * pb) >= 1.0)
      fail(ErrorCode::DivergentPGF, "|a P_B(z)| >= 1 at root index " + std::to_string(j));
    out[j] = frequency.pgf(pb);
  }
  return out;
}

}  // namespace allocgen
