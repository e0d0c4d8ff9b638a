#pragma once

#include "worm/types.hpp"

#include <vector>

namespace worm {

/// Equal-length real channels; sample_rate is informational only.
struct MultichannelSignal {
  std::vector<Vector> channels;
  double sample_rate = 1.0;
};

/// Magnitude of the length-N discrete Fourier transform.
Vector magnitude_spectrum(const Vector& channel);

/// First difference of the DFT magnitude spectrum:
/// d(k) = |X(k+1)| - |X(k)| for k = 0..N-2.
Vector differential_spectrum(const Vector& channel);

/// Pearson correlation between the DFT magnitude spectra of two equal-length
/// channels; returns 0 by convention when either spectrum is constant.
double adjacent_channel_fourier_correlation(const Vector& ch1, const Vector& ch2);

/// Per-channel differential spectra in channel order, followed by the
/// Fourier correlation of each adjacent channel pair (0,1), (1,2), ...
Vector feature_vector(const MultichannelSignal& signal);

}  // namespace worm
