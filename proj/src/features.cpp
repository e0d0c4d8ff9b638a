#include "worm/features.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace worm {

namespace {

void check_channel(const Vector& channel) {
  if (channel.size() < 2) {
    throw ContractError("features: channel needs at least 2 samples");
  }
  require_finite(channel, "features: channel");
}

}  // namespace

Vector magnitude_spectrum(const Vector& channel) {
  check_channel(channel);
  std::vector<double> time(channel.data(), channel.data() + channel.size());
  std::vector<std::complex<double>> freq;
  Eigen::FFT<double> fft;
  fft.fwd(freq, time);

  Vector magnitudes(static_cast<Index>(freq.size()));
  for (std::size_t i = 0; i < freq.size(); ++i) {
    magnitudes(static_cast<Index>(i)) = std::abs(freq[i]);
  }
  return magnitudes;
}

Vector differential_spectrum(const Vector& channel) {
  const Vector mag = magnitude_spectrum(channel);
  Vector diff(mag.size() - 1);
  for (Index k = 0; k + 1 < mag.size(); ++k) {
    diff(k) = mag(k + 1) - mag(k);
  }
  return diff;
}

double adjacent_channel_fourier_correlation(const Vector& ch1, const Vector& ch2) {
  if (ch1.size() != ch2.size()) {
    throw ContractError("features: channels must have equal length");
  }
  const Vector a = magnitude_spectrum(ch1);
  const Vector b = magnitude_spectrum(ch2);
  const Index n = a.size();

  const double mean_a = a.mean();
  const double mean_b = b.mean();
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double da = a(i) - mean_a;
    const double db = b(i) - mean_b;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }

  // A spectrum is constant when its variation is negligible against its
  // largest magnitude.
  const double scale_a = a.cwiseAbs().maxCoeff();
  const double scale_b = b.cwiseAbs().maxCoeff();
  const double floor_a = 1e-12 * scale_a;
  const double floor_b = 1e-12 * scale_b;
  if (saa <= floor_a * floor_a * static_cast<double>(n) ||
      sbb <= floor_b * floor_b * static_cast<double>(n)) {
    return 0.0;
  }

  const double r = sab / (std::sqrt(saa) * std::sqrt(sbb));
  return std::clamp(r, -1.0, 1.0);
}

Vector feature_vector(const MultichannelSignal& signal) {
  if (signal.channels.empty()) {
    throw ContractError("features: signal needs at least one channel");
  }
  const Index n = signal.channels.front().size();
  for (const Vector& channel : signal.channels) {
    if (channel.size() != n) {
      throw ContractError("features: all channels must have the same length");
    }
    check_channel(channel);
  }

  const auto num_channels = static_cast<Index>(signal.channels.size());
  const Index out_size = num_channels * (n - 1) + (num_channels - 1);
  Vector out(out_size);
  Index at = 0;
  for (const Vector& channel : signal.channels) {
    out.segment(at, n - 1) = differential_spectrum(channel);
    at += n - 1;
  }
  for (Index c = 0; c + 1 < num_channels; ++c) {
    out(at++) = adjacent_channel_fourier_correlation(
        signal.channels[static_cast<std::size_t>(c)],
        signal.channels[static_cast<std::size_t>(c + 1)]);
  }
  return out;
}

}  // namespace worm
