#include "gsp/sizing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

namespace gsp::sizing {

namespace {

constexpr double kExactLimit = 9007199254740992.0;  // 2^53

}  // namespace

void ChanceSpec::validate() const {
  if (n < 1) throw DomainError("ChanceSpec: n must be >= 1, got " + std::to_string(n));
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("ChanceSpec: alpha must lie in (0,1), got " + std::to_string(alpha));
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw DomainError("ChanceSpec: epsilon must lie in (0,1), got " + std::to_string(epsilon));
}

BigCount BigCount::from_integer(std::uint64_t value) {
  BigCount c;
  c.exact_ = true;
  c.value_ = value;
  c.log10_ = value == 0 ? -std::numeric_limits<double>::infinity()
                        : std::log10(static_cast<double>(value));
  return c;
}

BigCount BigCount::from_power(std::uint64_t base, int exponent) {
  if (base == 0) throw DomainError("BigCount: base must be positive");
  if (exponent < 0) throw DomainError("BigCount: exponent must be non-negative");
  const double lg = static_cast<double>(exponent) * std::log10(static_cast<double>(base));
  // Stay exact while the running product fits into 2^53.
  std::uint64_t v = 1;
  bool exact = true;
  for (int i = 0; i < exponent; ++i) {
    if (static_cast<double>(v) * static_cast<double>(base) > kExactLimit) {
      exact = false;
      break;
    }
    v *= base;
  }
  BigCount c;
  if (exact) {
    c = from_integer(v);
  } else {
    c.exact_ = false;
    c.value_ = 0;
    c.log10_ = lg;
  }
  return c;
}

std::uint64_t BigCount::value() const {
  if (!exact_) throw DomainError("BigCount: value() on a non-exact count");
  return value_;
}

double BigCount::mantissa() const {
  if (exact_) {
    long double m = static_cast<long double>(value_);
    while (m >= 10.0L) m /= 10.0L;
    return static_cast<double>(m);
  }
  double frac = log10_ - std::floor(log10_);
  return std::pow(10.0, frac);
}

long BigCount::exponent10() const {
  if (exact_) {
    long e = 0;
    std::uint64_t v = value_;
    while (v >= 10) {
      v /= 10;
      ++e;
    }
    return e;
  }
  return static_cast<long>(std::floor(log10_));
}

BigCount BigCount::operator*(const BigCount& other) const {
  if (exact_ && other.exact_) {
    long double prod = static_cast<long double>(value_) * static_cast<long double>(other.value_);
    if (prod <= static_cast<long double>(kExactLimit)) return from_integer(value_ * other.value_);
  }
  BigCount c;
  c.exact_ = false;
  c.value_ = 0;
  c.log10_ = log10_ + other.log10_;
  return c;
}

std::string BigCount::to_string() const {
  if (exact_) return std::to_string(value_);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3fe%ld", mantissa(), exponent10());
  return buf;
}

std::string BigCount::paper_style() const {
  const double lg = log10_;
  char buf[32];
  // Table entries are quoted in thousands below a million and in powers of
  // ten above; mantissas are cut to one decimal, and a tenths digit of 0 or 1
  // is dropped altogether ("4e63", "3e35" but "2.2e29").
  auto format_mantissa = [&](double m, const char* suffix, long exp) {
    double t = std::floor(m * 10.0 + 1e-9) / 10.0;
    long whole = static_cast<long>(t);
    int tenths = static_cast<int>(std::lround(t * 10.0)) % 10;
    if (tenths <= 1) {
      if (exp >= 0)
        std::snprintf(buf, sizeof(buf), "%ld%s%ld", whole, suffix, exp);
      else
        std::snprintf(buf, sizeof(buf), "%ld%s", whole, suffix);
    } else {
      if (exp >= 0)
        std::snprintf(buf, sizeof(buf), "%ld.%d%s%ld", whole, tenths, suffix, exp);
      else
        std::snprintf(buf, sizeof(buf), "%ld.%d%s", whole, tenths, suffix);
    }
    return std::string(buf);
  };
  if (exact_ && value_ < 100) return std::to_string(value_);
  if (lg < 6.0) {
    double thousands = exact_ ? static_cast<double>(value_) / 1000.0 : std::pow(10.0, lg - 3.0);
    return format_mantissa(thousands, "k", -1);
  }
  return format_mantissa(mantissa(), "e", exponent10());
}

double binomial_tail(long d, int n, double alpha) {
  if (d < 1) throw DomainError("binomial_tail: d must be >= 1");
  if (n < 1) throw DomainError("binomial_tail: n must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("binomial_tail: alpha must lie in (0,1), got " + std::to_string(alpha));

  const long kmax = std::min<long>(n, d + 1) - 1;  // inclusive upper index
  const double la = std::log(alpha);
  const double l1a = std::log1p(-alpha);
  const double lgd = std::lgamma(static_cast<double>(d) + 1.0);

  std::vector<double> logterms;
  logterms.reserve(static_cast<std::size_t>(kmax) + 1);
  double shift = -std::numeric_limits<double>::infinity();
  for (long k = 0; k <= kmax; ++k) {
    double lt = lgd - std::lgamma(static_cast<double>(k) + 1.0) -
                std::lgamma(static_cast<double>(d - k) + 1.0) + static_cast<double>(k) * la +
                static_cast<double>(d - k) * l1a;
    logterms.push_back(lt);
    shift = std::max(shift, lt);
  }
  double sum = 0.0;
  for (double lt : logterms) sum += std::exp(lt - shift);
  double tail = std::exp(shift) * sum;
  return std::min(1.0, std::max(0.0, tail));
}

long min_scenarios(const ChanceSpec& spec, long cap) {
  spec.validate();
  const double target = 1.0 - spec.epsilon;

  // tail(d) is nonincreasing in d and equals 1 for d < n, so bracket by
  // doubling and close with binary search.
  long lo = 0;  // tail(lo) > target (virtual d=0 counts as 1)
  long hi = 1;
  while (binomial_tail(hi, spec.n, spec.alpha) > target) {
    lo = hi;
    if (hi > cap / 2) {
      if (binomial_tail(cap, spec.n, spec.alpha) > target)
        throw CountOverflowError("min_scenarios: requirement exceeds cap " + std::to_string(cap));
      hi = cap;
      break;
    }
    hi *= 2;
  }
  while (hi - lo > 1) {
    long mid = lo + (hi - lo) / 2;
    if (binomial_tail(mid, spec.n, spec.alpha) <= target)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

BigCount pd_grid_count(std::uint64_t b, int num_uncertain) {
  if (b < 1) throw DomainError("pd_grid_count: b must be >= 1");
  if (num_uncertain < 0) throw DomainError("pd_grid_count: negative variable count");
  return BigCount::from_power(b, num_uncertain);
}

int implied_dimension(long N, double alpha, double epsilon) {
  if (N < 1) throw DomainError("implied_dimension: N must be >= 1");
  ChanceSpec probe{1, alpha, epsilon};
  probe.validate();
  auto need = [&](int n) {
    ChanceSpec s{n, alpha, epsilon};
    // min_scenarios(n) >= n, so the cap N+1 can never truncate the answer.
    try {
      return min_scenarios(s, std::max(N * 2, 64L));
    } catch (const CountOverflowError&) {
      return std::numeric_limits<long>::max();
    }
  };
  if (need(1) > N) return 0;
  int lo = 1, hi = 2;  // need(lo) <= N
  while (need(hi) <= N) {
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    int mid = lo + (hi - lo) / 2;
    if (need(mid) <= N)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace gsp::sizing
