#include "core/adam.hpp"

#include <cmath>

namespace gva {

void Adam::track(const std::string& name, Eigen::Index size) {
  if (size < 0) throw InvalidArgumentError("adam: negative buffer size");
  Group g;
  g.m = Eigen::VectorXd::Zero(size);
  g.v = Eigen::VectorXd::Zero(size);
  groups_[name] = std::move(g);
}

Eigen::Index Adam::size(const std::string& name) const {
  auto it = groups_.find(name);
  if (it == groups_.end()) throw StateError("adam: unknown group '" + name + "'");
  return it->second.m.size();
}

Adam::Group& Adam::require(const std::string& name) {
  auto it = groups_.find(name);
  if (it == groups_.end()) throw StateError("adam: unknown group '" + name + "'");
  return it->second;
}

void Adam::step(const std::string& name, Eigen::Ref<Eigen::VectorXd> params,
                const Eigen::Ref<const Eigen::VectorXd>& grads, double lr) {
  Group& g = require(name);
  if (params.size() != g.m.size() || grads.size() != g.m.size()) {
    throw InvalidArgumentError("adam: parameter/gradient size does not match group '" + name +
                               "'");
  }
  g.step += 1;
  const double b1 = hyper_.beta1, b2 = hyper_.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(g.step));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(g.step));
  for (Eigen::Index i = 0; i < g.m.size(); ++i) {
    double grad = grads[i];
    g.m[i] = b1 * g.m[i] + (1.0 - b1) * grad;
    g.v[i] = b2 * g.v[i] + (1.0 - b2) * grad * grad;
    double m_hat = g.m[i] / corr1;
    double v_hat = g.v[i] / corr2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + hyper_.eps);
  }
}

void Adam::reset(const std::string& name) {
  Group& g = require(name);
  g.m.setZero();
  g.v.setZero();
  g.step = 0;
}

void Adam::reset_all() {
  for (auto& [name, g] : groups_) {
    g.m.setZero();
    g.v.setZero();
    g.step = 0;
  }
}

void Adam::remap(const std::string& name, const std::vector<long>& source_point, int width) {
  Group& g = require(name);
  if (width <= 0) throw InvalidArgumentError("adam: remap width must be positive");
  if (g.m.size() % width != 0) {
    throw InvalidArgumentError("adam: group '" + name + "' size is not a multiple of width");
  }
  const long old_points = g.m.size() / width;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(source_point.size()) * width);
  Eigen::VectorXd v = m;
  for (size_t j = 0; j < source_point.size(); ++j) {
    long src = source_point[j];
    if (src < 0) continue;
    if (src >= old_points) throw InvalidArgumentError("adam: remap source out of range");
    m.segment(static_cast<Eigen::Index>(j) * width, width) = g.m.segment(src * width, width);
    v.segment(static_cast<Eigen::Index>(j) * width, width) = g.v.segment(src * width, width);
  }
  g.m = std::move(m);
  g.v = std::move(v);
}

}  // namespace gva
