#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cspd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Invalid user-supplied input: dimensions, step sizes, config fields.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A run produced a non-finite value or an oracle broke its size contract.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, std::int64_t iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  std::int64_t iteration() const noexcept { return iteration_; }

 private:
  std::int64_t iteration_;
};

}  // namespace cspd
