#include "epinode/finite_diff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "epinode/tape.hpp"

namespace epinode {

namespace {
double check_coords(const std::function<double(const Tensor&)>& f,
                    const Tensor& analytic, const Tensor& point, double epsilon,
                    const std::vector<size_t>& coords) {
  if (epsilon <= 0.0) throw std::invalid_argument("finite_diff_check: epsilon must be > 0");
  if (analytic.size() != point.size())
    throw std::invalid_argument("finite_diff_check: gradient length mismatch");
  Tensor probe = point;
  double worst = 0.0;
  for (size_t i : coords) {
    double x0 = point.data[i];
    probe.data[i] = x0 + epsilon;
    double fp = f(probe);
    probe.data[i] = x0 - epsilon;
    double fm = f(probe);
    probe.data[i] = x0;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericalError("finite_diff_check: non-finite function value at coordinate " +
                           std::to_string(i));
    double numeric = (fp - fm) / (2.0 * epsilon);
    double a = analytic.data[i];
    double rel = std::abs(a - numeric) / std::max(1.0, std::abs(a));
    worst = std::max(worst, rel);
  }
  return worst;
}
}  // namespace

double finite_diff_check(const std::function<double(const Tensor&)>& f,
                         const std::function<Tensor(const Tensor&)>& analytic_grad,
                         const Tensor& point, double epsilon) {
  Tensor analytic = analytic_grad(point);
  std::vector<size_t> coords(point.size());
  std::iota(coords.begin(), coords.end(), size_t{0});
  return check_coords(f, analytic, point, epsilon, coords);
}

double finite_diff_check_sampled(const std::function<double(const Tensor&)>& f,
                                 const std::function<Tensor(const Tensor&)>& analytic_grad,
                                 const Tensor& point, double epsilon, int n_coords,
                                 Rng& rng) {
  Tensor analytic = analytic_grad(point);
  std::vector<size_t> coords;
  coords.reserve(static_cast<size_t>(n_coords));
  for (int k = 0; k < n_coords; ++k)
    coords.push_back(static_cast<size_t>(rng.below(point.size())));
  return check_coords(f, analytic, point, epsilon, coords);
}

}  // namespace epinode
