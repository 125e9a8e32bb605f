#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gmpnoma {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidDimension : Error {
  using Error::Error;
};

// beta = N_u / N_s must exceed one
struct NotOverloaded : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct ParameterRange : Error {
  using Error::Error;
};

struct UnsupportedConfiguration : Error {
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(int iteration, const std::string& what) : Error(what), iteration_(iteration) {}
  // iteration whose sweep produced the first non-finite or oversized message
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

// Operation counts split by role. The variance recursion does not depend on y
// and can be run once per channel, so it is tracked apart from the mean path.
struct FlopCounter {
  std::uint64_t setup_mul = 0;
  std::uint64_t setup_add = 0;
  std::uint64_t mean_mul = 0;
  std::uint64_t mean_add = 0;
  std::uint64_t var_mul = 0;
  std::uint64_t var_add = 0;
  std::uint64_t var_div = 0;
  std::uint64_t output_mul = 0;
  std::uint64_t output_add = 0;

  std::uint64_t work_mul() const { return setup_mul + mean_mul + output_mul; }
  std::uint64_t work_add() const { return setup_add + mean_add + output_add; }
};

constexpr double kDivergenceThreshold = 1e9;

}  // namespace gmpnoma
