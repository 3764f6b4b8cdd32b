#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace dpc {

/// A T x m panel of observed series: rows are time points, columns are series.
/// Values must be finite; there is no missing-data support.
struct SeriesPanel {
  Eigen::MatrixXd values;           // T rows (time) x m columns (series)
  std::vector<std::string> labels;  // m series names

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  // Throws InputError/ShapeError when the panel is unusable.
  void validate() const;

  // Builds a panel, filling in labels "s1".."sm" when none are given,
  // and validates it.
  static SeriesPanel make(Eigen::MatrixXd values,
                          std::vector<std::string> labels = {});
};

}  // namespace dpc
