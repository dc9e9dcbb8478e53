#include "pcac/spectrum.hpp"

#include <complex>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace pcac {

std::vector<SpectrumBin> amplitude_spectrum(std::span<const double> signal,
                                            double sample_time) {
  if (signal.size() < 2)
    throw std::invalid_argument("amplitude_spectrum: need at least 2 samples");
  if (!(sample_time > 0.0))
    throw std::invalid_argument("amplitude_spectrum: sample time must be > 0");

  const std::size_t n = signal.size();
  std::vector<double> input(signal.begin(), signal.end());
  std::vector<std::complex<double>> coeffs;
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  fft.fwd(coeffs, input);

  const std::size_t bins = n / 2 + 1;
  const double df = 1.0 / (static_cast<double>(n) * sample_time);
  std::vector<SpectrumBin> out(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const bool unpaired = k == 0 || (n % 2 == 0 && k == n / 2);
    const double scale = (unpaired ? 1.0 : 2.0) / static_cast<double>(n);
    out[k] = {static_cast<double>(k) * df, scale * std::abs(coeffs[k])};
  }
  return out;
}

std::size_t dominant_bin(const std::vector<SpectrumBin>& spectrum) {
  std::size_t best = spectrum.size() > 1 ? 1 : 0;
  for (std::size_t k = 1; k < spectrum.size(); ++k)
    if (spectrum[k].amplitude > spectrum[best].amplitude) best = k;
  return best;
}

}  // namespace pcac
