#pragma once

#include <Eigen/Dense>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "dpc/panel.hpp"
#include "dpc/rng.hpp"

namespace test {

inline Eigen::MatrixXd random_matrix(dpc::Rng& rng, Eigen::Index r,
                                     Eigen::Index c) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.next_normal();
  return m;
}

inline Eigen::VectorXd random_vector(dpc::Rng& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.next_normal();
  return v;
}

// noisy low-rank factor panel: a realistic non-isotropic test input
inline dpc::SeriesPanel factor_panel(std::uint64_t seed, Eigen::Index T,
                                     Eigen::Index m, double noise = 0.3) {
  dpc::Rng rng(seed);
  const Eigen::VectorXd g = random_vector(rng, T);
  Eigen::MatrixXd z(T, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double load = 0.5 + 1.5 * rng.next_uniform();
    const double shift = 2.0 * (rng.next_uniform() - 0.5);
    for (Eigen::Index t = 0; t < T; ++t) {
      z(t, j) = load * g(t) + shift + noise * rng.next_normal();
    }
  }
  return dpc::SeriesPanel::make(std::move(z));
}

inline dpc::SeriesPanel noise_panel(std::uint64_t seed, Eigen::Index T,
                                    Eigen::Index m) {
  dpc::Rng rng(seed);
  return dpc::SeriesPanel::make(random_matrix(rng, T, m));
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("dpc_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

inline const char* cli_binary() { return std::getenv("DPC_CLI_BIN"); }

}  // namespace test
