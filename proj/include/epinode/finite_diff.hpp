#pragma once

#include <functional>

#include "epinode/rng.hpp"
#include "epinode/tensor.hpp"

namespace epinode {

// Central-difference gradient oracle. Compares the analytic gradient of a
// scalar function against (f(x+eps e_i) - f(x-eps e_i)) / 2eps and returns
// the maximum of |analytic - numeric| / max(1, |analytic|) over the checked
// coordinates. Throws NumericalError when the function returns a non-finite
// value at any probe point.
double finite_diff_check(const std::function<double(const Tensor&)>& f,
                         const std::function<Tensor(const Tensor&)>& analytic_grad,
                         const Tensor& point, double epsilon = 1e-5);

// Same check restricted to `n_coords` randomly chosen coordinates; used for
// large weight vectors where probing every coordinate is wasteful.
double finite_diff_check_sampled(const std::function<double(const Tensor&)>& f,
                                 const std::function<Tensor(const Tensor&)>& analytic_grad,
                                 const Tensor& point, double epsilon, int n_coords, Rng& rng);

}  // namespace epinode
