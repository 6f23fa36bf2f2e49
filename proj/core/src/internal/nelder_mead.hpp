#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "boop/rng.hpp"

namespace boop::internal {

// Box-constrained derivative-free maximization. Parameters are mapped onto
// the box through a logistic transform so the simplex moves in an
// unconstrained space; collapsed dimensions (lo == hi) stay fixed.
struct BoxMaximizeResult {
  Eigen::VectorXd x;
  double value = -std::numeric_limits<double>::infinity();
  bool moved = false;  // at least one simplex step improved on its start
};

class BoxTransform {
public:
  BoxTransform(Eigen::VectorXd lo, Eigen::VectorXd hi)
      : lo_(std::move(lo)), hi_(std::move(hi)) {}

  Eigen::VectorXd to_box(const Eigen::VectorXd& u) const {
    Eigen::VectorXd x(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const double w = hi_[i] - lo_[i];
      x[i] = w <= 0.0 ? lo_[i] : lo_[i] + w / (1.0 + std::exp(-u[i]));
    }
    return x;
  }

  // Inverse for p strictly inside (0,1) per dimension of the unit box.
  Eigen::VectorXd from_unit(const Eigen::VectorXd& p) const {
    Eigen::VectorXd u(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double q = std::clamp(p[i], 1e-9, 1.0 - 1e-9);
      u[i] = std::log(q / (1.0 - q));
    }
    return u;
  }

private:
  Eigen::VectorXd lo_, hi_;
};

inline BoxMaximizeResult nelder_mead_box(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
    const Eigen::VectorXd& unit_start, int max_iterations) {
  const Eigen::Index d = lo.size();
  BoxTransform box(lo, hi);

  auto eval = [&](const Eigen::VectorXd& u) -> double {
    const double v = objective(box.to_box(u));
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  };

  Eigen::VectorXd u0 = box.from_unit(unit_start);
  std::vector<Eigen::VectorXd> simplex;
  std::vector<double> values;
  simplex.push_back(u0);
  values.push_back(eval(u0));
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::VectorXd u = u0;
    u[i] += 0.5;
    simplex.push_back(u);
    values.push_back(eval(u));
  }
  const double start_best = *std::max_element(values.begin(), values.end());

  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
  for (int it = 0; it < max_iterations; ++it) {
    std::vector<std::size_t> order(simplex.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<Eigen::VectorXd> s2;
    std::vector<double> v2;
    for (std::size_t i : order) {
      s2.push_back(simplex[i]);
      v2.push_back(values[i]);
    }
    simplex.swap(s2);
    values.swap(v2);

    if (std::isfinite(values.front()) &&
        values.front() - values.back() <
            1e-10 * (1.0 + std::abs(values.front()))) {
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i + 1 < simplex.size(); ++i) centroid += simplex[i];
    centroid /= static_cast<double>(simplex.size() - 1);

    const Eigen::VectorXd& worst = simplex.back();
    Eigen::VectorXd refl = centroid + alpha * (centroid - worst);
    const double f_refl = eval(refl);

    if (f_refl > values.front()) {
      Eigen::VectorXd exp_pt = centroid + gamma * (refl - centroid);
      const double f_exp = eval(exp_pt);
      if (f_exp > f_refl) {
        simplex.back() = exp_pt;
        values.back() = f_exp;
      } else {
        simplex.back() = refl;
        values.back() = f_refl;
      }
    } else if (f_refl > values[values.size() - 2]) {
      simplex.back() = refl;
      values.back() = f_refl;
    } else {
      Eigen::VectorXd contr = centroid + rho * (worst - centroid);
      const double f_contr = eval(contr);
      if (f_contr > values.back()) {
        simplex.back() = contr;
        values.back() = f_contr;
      } else {
        for (std::size_t i = 1; i < simplex.size(); ++i) {
          simplex[i] = simplex.front() + sigma * (simplex[i] - simplex.front());
          values[i] = eval(simplex[i]);
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  BoxMaximizeResult out;
  out.x = box.to_box(simplex[best]);
  out.value = values[best];
  out.moved = values[best] > start_best;
  return out;
}

// Latin hypercube sample of `count` points in the unit cube.
inline std::vector<Eigen::VectorXd> latin_hypercube(int count, int dims,
                                                    RngStream& rng) {
  std::vector<Eigen::VectorXd> points(count, Eigen::VectorXd::Zero(dims));
  for (int j = 0; j < dims; ++j) {
    std::vector<int> strata(count);
    for (int i = 0; i < count; ++i) strata[i] = i;
    for (int i = count - 1; i > 0; --i) {
      const int k = static_cast<int>(rng.uniform_index(i + 1));
      std::swap(strata[i], strata[k]);
    }
    for (int i = 0; i < count; ++i) {
      points[i][j] = (strata[i] + rng.uniform()) / count;
    }
  }
  return points;
}

}  // namespace boop::internal
