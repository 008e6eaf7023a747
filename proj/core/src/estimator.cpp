#include "dlgn/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "dlgn/errors.hpp"

namespace dlgn {

double estimator_value(Estimator est, double x) {
    switch (est) {
        case Estimator::Sigmoid:        return 1.0 / (1.0 + std::exp(-x));
        case Estimator::Sin01:          return 0.5 + 0.5 * std::sin(x);
        case Estimator::CappedLinearST: return std::clamp(x, 0.0, 1.0);
    }
    return 0.0;  // unreachable
}

double estimator_grad(Estimator est, double x) {
    switch (est) {
        case Estimator::Sigmoid: {
            const double s = 1.0 / (1.0 + std::exp(-x));
            return s * (1.0 - s);
        }
        case Estimator::Sin01:          return 0.5 * std::cos(x);
        case Estimator::CappedLinearST: return 1.0;  // straight-through
    }
    return 0.0;  // unreachable
}

std::string_view estimator_name(Estimator est) {
    switch (est) {
        case Estimator::Sigmoid:        return "sigmoid";
        case Estimator::Sin01:          return "sin01";
        case Estimator::CappedLinearST: return "capped_linear_st";
    }
    return "";  // unreachable
}

Estimator estimator_from_name(std::string_view name) {
    if (name == "sigmoid") return Estimator::Sigmoid;
    if (name == "sin01") return Estimator::Sin01;
    if (name == "capped_linear_st") return Estimator::CappedLinearST;
    throw ConfigError("unknown estimator '" + std::string(name) +
                      "' (expected sigmoid, sin01, or capped_linear_st)");
}

}  // namespace dlgn
