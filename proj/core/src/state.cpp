#include "sif/state.hpp"

#include <cmath>

#include "sif/errors.hpp"
#include "sif/linalg.hpp"

namespace sif {

GaussianState SqrtGaussianState::to_gaussian() const {
  return GaussianState{mean, factor * factor.transpose(), timestamp};
}

SqrtGaussianState SqrtGaussianState::from_gaussian(const GaussianState& state) {
  return SqrtGaussianState{state.mean, factor_psd(state.covariance), state.timestamp};
}

double wrap_angle(double theta) {
  double r = std::fmod(theta + M_PI, 2.0 * M_PI);
  if (r <= 0.0) r += 2.0 * M_PI;  // r in (0, 2*pi]
  return r - M_PI;
}

Eigen::VectorXd wrap_innovation(Eigen::VectorXd innovation,
                                const std::vector<int>& angular_dims) {
  for (int d : angular_dims) {
    if (d < 0 || d >= innovation.size()) {
      throw DimensionMismatch("wrap_innovation: angular index out of range");
    }
    innovation(d) = wrap_angle(innovation(d));
  }
  return innovation;
}

std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)> measurement_about(
    const StateSpaceModel& model, const Eigen::VectorXd& reference) {
  if (model.angular_measurement_dims.empty()) return model.measurement;
  const std::vector<int> dims = model.angular_measurement_dims;
  const auto h = model.measurement;
  Eigen::VectorXd ref = reference;
  return [h, dims, ref](const Eigen::VectorXd& x, int k) {
    Eigen::VectorXd z = h(x, k);
    for (int d : dims) z(d) = ref(d) + wrap_angle(z(d) - ref(d));
    return z;
  };
}

}  // namespace sif
