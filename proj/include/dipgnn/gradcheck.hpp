#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dipgnn/tensor.hpp"

namespace dipgnn {

constexpr double kGradCheckTolerance = 1e-4;
constexpr double kGradCheckEpsilon = 1e-5;

struct GradCheckItem {
  std::string name;
  double max_rel_err = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckItem> items;

  double worst() const;
  bool passed(double tolerance = kGradCheckTolerance) const;
};

/// Central finite differences over every coordinate of every parameter,
/// against the recorded backward pass of `forward()` (which must rebuild the
/// loss from the parameters on each call).
double fd_check(const std::vector<Tensor>& params, const std::function<Tensor()>& forward);

/// One finite-difference check per recorded op.
GradCheckReport run_op_gradchecks(std::uint64_t seed = 12345);

/// The full pre-training objective on a 30-node synthetic graph, with all
/// random draws and discrete generator outputs frozen.
GradCheckReport run_full_loss_gradcheck(std::uint64_t seed = 7);

}  // namespace dipgnn
