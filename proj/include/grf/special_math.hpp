#ifndef GRF_SPECIAL_MATH_HPP
#define GRF_SPECIAL_MATH_HPP

// Gamma at half-integer arguments and modified Bessel functions of the
// second kind K_nu for nu in {1/2, 1, 3/2}.
//
// K_1 uses the double-precision minimax rational approximations from
// Boost.Math (J. Maddock, 2017), two regimes split at x = 1.  The half-odd
// orders are elementary functions.

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace grf {

/// A positive multiple of 1/2, stored as twice its value.
class HalfInteger {
public:
  constexpr explicit HalfInteger(int twice_value) : twice_(twice_value) {
    if (twice_value < 1)
      throw std::domain_error("HalfInteger: twice_value must be >= 1, got " +
                              std::to_string(twice_value));
  }

  static constexpr HalfInteger from_int(int n) { return HalfInteger(2 * n); }

  constexpr int twice() const noexcept { return twice_; }
  constexpr double value() const noexcept { return 0.5 * twice_; }
  constexpr bool is_integer() const noexcept { return twice_ % 2 == 0; }

  constexpr HalfInteger operator+(HalfInteger o) const {
    return HalfInteger(twice_ + o.twice_);
  }

  friend constexpr bool operator==(HalfInteger, HalfInteger) = default;

private:
  int twice_;
};

inline constexpr HalfInteger half{1};
inline constexpr HalfInteger one{2};
inline constexpr HalfInteger three_halves{3};

/// Gamma(a) for a = k/2, k >= 1.  Integers give (a-1)!, half-odd values are
/// built from Gamma(1/2) = sqrt(pi) by the recurrence.
inline double gamma_half_int(HalfInteger a) {
  double g;
  int t;
  if (a.is_integer()) {
    g = 1.0; // Gamma(1)
    t = 2;
  } else {
    g = std::sqrt(std::numbers::pi); // Gamma(1/2)
    t = 1;
  }
  for (; t < a.twice(); t += 2)
    g *= 0.5 * t;
  return g;
}

namespace detail {

template <std::size_t N>
constexpr double polyval(const std::array<double, N>& c, double z) {
  double r = c[N - 1];
  for (std::size_t i = N - 1; i-- > 0;)
    r = r * z + c[i];
  return r;
}

template <std::size_t N, std::size_t M>
constexpr double ratval(const std::array<double, N>& p,
                        const std::array<double, M>& q, double z) {
  return polyval(p, z) / polyval(q, z);
}

inline double bessel_k1_impl(double x) {
  if (x <= 1.0) {
    constexpr double y = 8.69547128677368164e-02;
    constexpr std::array<double, 4> p{
        -3.62137953440350228e-03, 7.11842087490330300e-03,
        1.00302560256614306e-05, 1.77231085381040811e-06};
    constexpr std::array<double, 4> q{
        1.00000000000000000e+00, -4.80414794429043831e-02,
        9.85972641934416525e-04, -8.91196859397070326e-06};
    double a = x * x / 4;
    a = ((ratval(p, q, a) + y) * a * a + a / 2 + 1) * x / 2;

    constexpr std::array<double, 4> p2{
        -3.07965757829206184e-01, -7.80929703673074907e-02,
        -2.70619343754051620e-03, -2.49549522229072008e-05};
    constexpr std::array<double, 4> q2{
        1.00000000000000000e+00, -2.36316836412163098e-02,
        2.64524577525962719e-04, -1.49749618004162787e-06};
    return ratval(p2, q2, x * x) * x + 1 / x + std::log(x) * a;
  }

  constexpr double y = 1.45034217834472656;
  constexpr std::array<double, 9> p{
      -1.97028041029226295e-01, -2.32408961548087617e+00,
      -7.98269784507699938e+00, -2.39968410774221632e+00,
      3.28314043780858713e+01,  5.67713761158496058e+01,
      3.30907788466509823e+01,  6.62582288933739787e+00,
      3.08851840645286691e-01};
  constexpr std::array<double, 9> q{
      1.00000000000000000e+00, 1.41811409298826118e+01,
      7.35979466317556420e+01, 1.77821793937080859e+02,
      2.11014501598705982e+02, 1.19425262951064454e+02,
      2.88448064302447607e+01, 2.27912927104139732e+00,
      2.50358186953478678e-02};
  // split the exponential so large x does not underflow early
  const double ex = std::exp(-x / 2);
  return ((ratval(p, q, 1 / x) + y) * ex / std::sqrt(x)) * ex;
}

} // namespace detail

/// Modified Bessel function of the second kind, K_nu(x), for x > 0.
inline double bessel_k(HalfInteger nu, double x) {
  if (!(x > 0.0))
    throw std::domain_error("bessel_k: argument must be positive");
  switch (nu.twice()) {
  case 1:
    return std::sqrt(std::numbers::pi / (2 * x)) * std::exp(-x);
  case 2:
    return detail::bessel_k1_impl(x);
  case 3:
    return std::sqrt(std::numbers::pi / (2 * x)) * std::exp(-x) * (1 + 1 / x);
  default:
    throw std::domain_error("bessel_k: order " + std::to_string(nu.value()) +
                            " not supported (only 1/2, 1, 3/2)");
  }
}

} // namespace grf

#endif // GRF_SPECIAL_MATH_HPP
