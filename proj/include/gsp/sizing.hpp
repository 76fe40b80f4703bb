#ifndef GSP_SIZING_HPP
#define GSP_SIZING_HPP

#include <cstdint>
#include <string>

#include "gsp/common.hpp"

namespace gsp::sizing {

/**
 * The (n, alpha, epsilon) triple that drives the scenario-count bound:
 * n decision variables, violation probability at most alpha, and the
 * guarantee holding with confidence epsilon over the random sampling.
 */
struct ChanceSpec {
  int n = 1;              // decision dimension
  double alpha = 0.05;    // allowed violation probability, in (0,1)
  double epsilon = 0.95;  // confidence level, in (0,1)

  void validate() const;
};

/** Thrown when a scenario requirement exceeds the configured cap. */
class CountOverflowError : public std::runtime_error {
 public:
  explicit CountOverflowError(const std::string& what) : std::runtime_error(what) {}
};

/**
 * Scenario-count value that is exact for anything a double can hold
 * losslessly (<= 2^53) and switches to a log10 representation beyond,
 * keeping at least three significant digits. Grid counts like 7^91
 * overflow every machine integer, so both regimes are needed.
 */
class BigCount {
 public:
  BigCount() = default;

  static BigCount from_integer(std::uint64_t value);
  // base^exponent, exact while it fits, log-scale afterwards
  static BigCount from_power(std::uint64_t base, int exponent);

  bool exact() const { return exact_; }
  // Only meaningful when exact() is true.
  std::uint64_t value() const;
  double log10_value() const { return log10_; }
  // mantissa in [1,10) and the matching power of ten
  double mantissa() const;
  long exponent10() const;

  BigCount operator*(const BigCount& other) const;

  // "625", "2.274e29": plain digits when exact, scientific otherwise
  std::string to_string() const;
  // the rounding used by the benchmark table: "0.6k", "2.2e29", "8e76"
  std::string paper_style() const;

 private:
  bool exact_ = true;
  std::uint64_t value_ = 0;
  double log10_ = 0.0;  // kept in sync in both regimes
};

/**
 * P(X <= min(n,d+1)-1) for X ~ Binomial(d, alpha): the tail sum
 * sum_{k=0}^{min(n,d+1)-1} C(d,k) alpha^k (1-alpha)^(d-k).
 * Evaluated term-by-term in log space with a max-shift, so d up to ~1e6
 * neither overflows nor underflows.
 */
double binomial_tail(long d, int n, double alpha);

/**
 * Smallest d with binomial_tail(d, n, alpha) <= 1-epsilon, found by
 * exponential bracketing plus binary search. The bound is stated with
 * equality in the source condition; since d is an integer the first d
 * on the conservative (<=) side is returned. Throws CountOverflowError
 * if d would exceed cap.
 */
long min_scenarios(const ChanceSpec& spec, long cap = 1'000'000'000L);

/** b^num_uncertain as a BigCount (the PD-grid scenario count). */
BigCount pd_grid_count(std::uint64_t b, int num_uncertain);

/**
 * Largest n whose scenario requirement min_scenarios(n, alpha, epsilon)
 * fits within N; 0 if even n = 1 needs more than N. Diagnostic used to
 * read published scenario counts back into an implied decision dimension.
 */
int implied_dimension(long N, double alpha, double epsilon);

}  // namespace gsp::sizing

#endif  // GSP_SIZING_HPP
