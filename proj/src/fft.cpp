#include "cavilab/fft.hpp"

#include <cmath>
#include <stdexcept>

#include "cavilab/constants.hpp"

namespace cavilab::fft {

namespace {

using cd = std::complex<double>;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Iterative radix-2 Cooley-Tukey, n a power of two.
void radix2(std::vector<cd>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 1.0 : -1.0) * constants::two_pi / static_cast<double>(len);
    const cd wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cd w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cd u = a[i + k];
        const cd v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Bluestein chirp transform for arbitrary n, built on radix-2 convolution.
void bluestein(std::vector<cd>& a, bool inverse) {
  const std::size_t n = a.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cd> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the phase argument small for large n.
    const std::size_t k2 = (k * k) % (2 * n);
    const double ang = sign * constants::pi * static_cast<double>(k2) / static_cast<double>(n);
    chirp[k] = cd(std::cos(ang), std::sin(ang));
  }
  const std::size_t m = next_pow2(2 * n - 1);
  std::vector<cd> fa(m, cd(0.0, 0.0));
  std::vector<cd> fb(m, cd(0.0, 0.0));
  for (std::size_t k = 0; k < n; ++k) fa[k] = a[k] * chirp[k];
  fb[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) fb[k] = fb[m - k] = std::conj(chirp[k]);
  radix2(fa, false);
  radix2(fb, false);
  for (std::size_t k = 0; k < m; ++k) fa[k] *= fb[k];
  radix2(fa, true);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = fa[k] * inv_m * chirp[k];
}

}  // namespace

void transform(std::vector<cd>& data, bool inverse) {
  const std::size_t n = data.size();
  if (n == 0) throw std::invalid_argument("fft::transform: empty input");
  if (n == 1) return;
  if (is_pow2(n)) {
    radix2(data, inverse);
  } else {
    bluestein(data, inverse);
  }
  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& z : data) z *= inv_n;
  }
}

std::vector<cd> real_dft(std::span<const double> x) {
  std::vector<cd> a(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) a[i] = cd(x[i], 0.0);
  transform(a, false);
  a.resize(x.size() / 2 + 1);
  return a;
}

}  // namespace cavilab::fft
