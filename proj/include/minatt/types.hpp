#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace minatt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error hierarchy. Every failure a caller can act on has its own type so the
// CLI can report a one-line cause and tests can check the precise condition.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMassError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

class OutOfHorizonError : public Error {
 public:
  using Error::Error;
};

class RiccatiBlowUpError : public Error {
 public:
  using Error::Error;
};

class UnreachableTargetError : public Error {
 public:
  using Error::Error;
};

class SupportOverflowError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace minatt
