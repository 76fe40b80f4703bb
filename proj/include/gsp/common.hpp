#ifndef GSP_COMMON_HPP
#define GSP_COMMON_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gsp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/** Thrown when a numeric argument lies outside its mathematical domain. */
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/** Thrown when matrix/vector dimensions of an operation do not agree. */
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/** Thrown when validated input data (sets, networks, programs) is inconsistent. */
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/** Thrown on parse failures of external text formats; carries a line number. */
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// Uniform double in [0,1) from the top 53 bits of the generator output.
// std::uniform_real_distribution is implementation-defined; this is not.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace gsp

#endif  // GSP_COMMON_HPP
