#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace gva {

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Named-buffer Adam (beta1 0.9, beta2 0.999, eps 1e-8, bias-corrected).
// Every parameter group registers a flat buffer; moments and the per-group
// step counter live here so training can zero a group (e.g. after the point
// set is rebuilt) without touching the others.
class Adam {
 public:
  explicit Adam(AdamHyper hyper = {}) : hyper_(hyper) {}

  // Creates (or recreates) a zeroed buffer of the given flat size.
  void track(const std::string& name, Eigen::Index size);
  bool tracked(const std::string& name) const { return groups_.count(name) != 0; }
  Eigen::Index size(const std::string& name) const;

  // In-place bias-corrected update of params.
  void step(const std::string& name, Eigen::Ref<Eigen::VectorXd> params,
            const Eigen::Ref<const Eigen::VectorXd>& grads, double lr);

  // Zero moments and step count.
  void reset(const std::string& name);
  void reset_all();

  // Rebuilds a buffer after the point set changed. source_point[j] is the
  // old point whose moments new point j inherits, or -1 for fresh zeros;
  // width is the number of scalars per point in this group.
  void remap(const std::string& name, const std::vector<long>& source_point, int width);

  const AdamHyper& hyper() const { return hyper_; }

 private:
  struct Group {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    long step = 0;
  };

  Group& require(const std::string& name);

  AdamHyper hyper_;
  std::map<std::string, Group> groups_;
};

}  // namespace gva
