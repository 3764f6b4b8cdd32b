#include "dpc/panel.hpp"

#include <cmath>

#include "dpc/config.hpp"
#include "dpc/errors.hpp"

namespace dpc {

void SeriesPanel::validate() const {
  if (values.cols() < 1) throw InputError("panel has no series (m = 0)");
  if (values.rows() < 1) throw InputError("panel has no rows (T = 0)");
  if (!labels.empty() &&
      static_cast<Eigen::Index>(labels.size()) != values.cols()) {
    throw ShapeError("panel has " + std::to_string(values.cols()) +
                     " series but " + std::to_string(labels.size()) +
                     " labels");
  }
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    for (Eigen::Index t = 0; t < values.rows(); ++t) {
      if (!std::isfinite(values(t, j))) {
        throw InputError("non-finite value at row " + std::to_string(t + 1) +
                         ", series " + std::to_string(j + 1));
      }
    }
  }
}

SeriesPanel SeriesPanel::make(Eigen::MatrixXd values,
                              std::vector<std::string> labels) {
  SeriesPanel panel;
  panel.values = std::move(values);
  if (labels.empty()) {
    labels.reserve(panel.values.cols());
    for (Eigen::Index j = 0; j < panel.values.cols(); ++j) {
      labels.push_back("s" + std::to_string(j + 1));
    }
  }
  panel.labels = std::move(labels);
  panel.validate();
  return panel;
}

void SolverConfig::validate() const {
  if (k < 0) throw ConfigError("lag count k must be >= 0");
  if (p < 1) throw ConfigError("component count p must be >= 1");
  if (!(epsilon > 0)) throw ConfigError("stopping tolerance must be > 0");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
}

}  // namespace dpc
