#pragma once

#include <Eigen/Dense>

namespace levelsense::detail {

// Unwraps a phase sequence in place so consecutive samples differ by less
// than pi (each step is folded into (-pi, pi]).
void unwrap_inplace(Eigen::Ref<Eigen::VectorXd> phase);

// Real-to-complex FFT (FFTW-backed), bins 0..n/2.
Eigen::VectorXcd rfft(const Eigen::VectorXd& series);

}  // namespace levelsense::detail
