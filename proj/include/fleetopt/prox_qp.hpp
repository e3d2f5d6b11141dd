#pragma once

#include <Eigen/Dense>
#include <vector>

namespace fleetopt {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Piecewise-linear model built from (point, value, gradient) triples:
/// model(y) = min_i [ value_i + grad_i . (y - point_i) ].
struct CuttingPlanes {
  std::vector<VectorXd> points;
  std::vector<double> values;
  std::vector<VectorXd> grads;

  void add(const VectorXd& point, double value, const VectorXd& grad) {
    points.push_back(point);
    values.push_back(value);
    grads.push_back(grad);
  }
  int size() const { return static_cast<int>(values.size()); }
  double cut(int i, const VectorXd& y) const {
    return values[i] + grads[i].dot(y - points[i]);
  }
  double eval(const VectorXd& y) const {
    double v = cut(0, y);
    for (int i = 1; i < size(); ++i) v = std::min(v, cut(i, y));
    return v;
  }
};

/// argmax over [lower, upper] of  model(y) - weight/2 ||y - center||^2,
/// solved exactly by a primal active-set method on the epigraph form.
VectorXd solve_proximal_cut_model(const CuttingPlanes& cuts, const VectorXd& center,
                                  double weight, const VectorXd& lower,
                                  const VectorXd& upper, double tol = 1e-11);

}  // namespace fleetopt
