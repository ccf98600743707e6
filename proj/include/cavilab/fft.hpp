#pragma once

#include <complex>
#include <span>
#include <vector>

namespace cavilab::fft {

/// In-place complex DFT of arbitrary length (radix-2 when the length is a
/// power of two, Bluestein's chirp transform otherwise). `inverse` includes
/// the 1/N normalization.
void transform(std::vector<std::complex<double>>& data, bool inverse = false);

/// Forward DFT of a real sequence; returns bins 0..floor(N/2).
std::vector<std::complex<double>> real_dft(std::span<const double> x);

}  // namespace cavilab::fft
