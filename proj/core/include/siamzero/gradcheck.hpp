#pragma once

#include <functional>
#include <string>
#include <vector>

#include "siamzero/tensor.hpp"

namespace siamzero {

/// One (tensor, element, expected gradient) probe for grad_check.
struct GradProbe {
  Tensor* tensor;
  std::size_t index;
  float analytic;
};

/// Central-difference check: evaluates the scalar loss at +/- eps per probe
/// and compares (f+ - f-) / 2eps with the analytic gradient. Returns the
/// maximum relative error, where
///   rel = |numeric - analytic| / max(|numeric|, |analytic|, guard).
/// Float32 forward rounding leaves noise of order 1e-3 on the numeric
/// estimate at eps=1e-3, so gradients below the guard are effectively
/// checked on an absolute scale.
double grad_check(const std::function<double()>& loss,
                  const std::vector<GradProbe>& probes, float eps,
                  double guard = 0.1);

struct GradCheckReport {
  std::string op;
  double max_rel_err = 0.0;
  int seeds = 0;
};

/// Per-operator gradient suites (conv2d, dense, batchnorm train mode,
/// sigmoid+BCE composite, full pair loss), each over `seeds` seeded shapes.
std::vector<GradCheckReport> run_gradcheck_suites(std::uint64_t seed, int seeds,
                                                  float eps = 1e-3f);

inline constexpr double kGradCheckTolerance = 1e-2;

}  // namespace siamzero
