#pragma once

#include <string>
#include <string_view>

namespace dlgn {

// Maps an unbounded parameter to a corner estimate in [0,1].
//   sigmoid:          1 / (1 + exp(-x))
//   sin01:            0.5 + 0.5*sin(x)            (default)
//   capped_linear_st: clamp(x, 0, 1), with the gradient fixed at 1 everywhere
//                     (straight-through; intentionally not the true derivative)
enum class Estimator { Sigmoid, Sin01, CappedLinearST };

double estimator_value(Estimator est, double x);
double estimator_grad(Estimator est, double x);

std::string_view estimator_name(Estimator est);
Estimator estimator_from_name(std::string_view name);  // throws ConfigError

}  // namespace dlgn
