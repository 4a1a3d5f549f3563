#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace nnfac {

// Deterministic random source used throughout the library. The engine is
// mt19937_64 (bit-exact by the standard) and every distribution is mapped from
// raw engine output here instead of going through <random> distributions,
// whose streams differ between standard libraries. Same seed, same stream,
// every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Reported in run artifacts so results can be reproduced elsewhere.
  static constexpr const char* kAlgorithm = "mt19937_64/polar-gaussian";

  // Uniform on [0,1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via the Marsaglia polar method (avoids trig functions).
  double gaussian();

  Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                                  double stddev = 1.0);

  // Haar-distributed orthogonal n x n matrix (QR of a Gaussian matrix with the
  // sign of the R diagonal fixed).
  Eigen::MatrixXd orthogonal(Eigen::Index n);

  // Independent generator for sub-task `index` of the stream named by `seed`.
  // Trials seeded this way can run in any order (or in parallel) and still
  // reproduce.
  static Rng substream(std::uint64_t seed, std::uint64_t index);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nnfac
