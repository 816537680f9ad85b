//
// Copyright 2026 The NVDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Scalar special functions used by the divergence and KL formulas.
//
// LogGamma and Digamma target ~1e-15 absolute / 1e-12 relative accuracy on
// [1e-6, 1e6]. Near the roots of ln Gamma (x = 1, 2) a zeta series is used so
// that relative accuracy is kept where the value itself goes to zero.

#ifndef NVDP_SPECIAL_FUNCTIONS_H_
#define NVDP_SPECIAL_FUNCTIONS_H_

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>

#include "nvdp/errors.h"

namespace nvdp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kEulerGamma = 0.5772156649015329;

namespace internal {

// zeta(k) - 1 for k = 2..41.
inline constexpr std::array<double, 40> kZetaMinusOne = {
    0.6449340668482264,     0.2020569031595943,     0.08232323371113819,
    0.03692775514336993,    0.01734306198444914,    0.008349277381922827,
    0.00407735619794434,    0.0020083928260822143,  0.0009945751278180853,
    0.0004941886041194645,  0.0002460865533080483,  0.00012271334757848915,
    6.124813505870483e-05,  3.058823630702049e-05,  1.528225940865187e-05,
    7.637197637899763e-06,  3.81729326499984e-06,   1.908212716553939e-06,
    9.539620338727962e-07,  4.769329867878064e-07,  2.38450502727733e-07,
    1.1921992596531106e-07, 5.960818905125948e-08,  2.980350351465228e-08,
    1.4901554828365043e-08, 7.45071178983543e-09,   3.725334024788457e-09,
    1.862659723513049e-09,  9.313274324196682e-10,  4.656629065033784e-10,
    2.3283118336765053e-10, 1.164155017270052e-10,  5.820772087902701e-11,
    2.9103850444971e-11,    1.4551921891041985e-11, 7.275959835057482e-12,
    3.637979547378651e-12,  1.818989650307066e-12,  9.094947840263888e-13,
    4.547473783042154e-13,
};

// ln Gamma(1 + z) for |z| <= 0.5.
inline double LogGammaOnePlus(double z) {
  double tail = 0.0;
  double power = z * z;
  for (int k = 2; k <= 41; ++k) {
    const double term = kZetaMinusOne[k - 2] * power / k;
    tail += (k % 2 == 0) ? term : -term;
    if (std::abs(term) < 1e-18 * std::abs(tail)) break;
    power *= z;
  }
  return -kEulerGamma * z + (z - std::log1p(z)) + tail;
}

// Stirling series, accurate for x >= 10.
inline double LogGammaStirling(double x) {
  constexpr std::array<double, 8> kCoeffs = {
      1.0 / 12.0,   -1.0 / 360.0,        1.0 / 1260.0, -1.0 / 1680.0,
      1.0 / 1188.0, -691.0 / 360360.0,   1.0 / 156.0,  -3617.0 / 122400.0,
  };
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  double power = inv;
  for (double c : kCoeffs) {
    series += c * power;
    power *= inv2;
  }
  return (x - 0.5) * std::log(x) - x +
         0.5 * std::log(2.0 * std::numbers::pi) + series;
}

inline void CheckPositive(double x, const char* fn) {
  if (!(x > 0.0)) {
    throw DomainError(std::string(fn) + ": argument must be > 0, got " +
                      std::to_string(x));
  }
}

}  // namespace internal

// ln Gamma(x) for x > 0. Throws DomainError for x <= 0 (including the
// zero pseudo-count case, which callers must treat as an infinite term).
inline double LogGamma(double x) {
  internal::CheckPositive(x, "LogGamma");
  if (std::isinf(x)) return kInf;
  if (x == 1.0 || x == 2.0) return 0.0;
  if (x < 0.5) return internal::LogGammaOnePlus(x) - std::log(x);
  if (x <= 1.5) return internal::LogGammaOnePlus(x - 1.0);
  if (x < 2.5) return internal::LogGammaOnePlus(x - 2.0) + std::log1p(x - 2.0);
  if (x >= 10.0) return internal::LogGammaStirling(x);
  double shifted = x;
  double product = 1.0;
  while (shifted < 10.0) {
    product *= shifted;
    shifted += 1.0;
  }
  return internal::LogGammaStirling(shifted) - std::log(product);
}

// psi(x) = d/dx ln Gamma(x) for x > 0.
inline double Digamma(double x) {
  internal::CheckPositive(x, "Digamma");
  if (std::isinf(x)) return kInf;
  double shift = 0.0;
  while (x < 10.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv2 = 1.0 / (x * x);
  // Asymptotic series in 1/x^2 (Horner form).
  const double series =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 -
                                              inv2 * (691.0 / 32760.0 -
                                                      inv2 / 12.0))))));
  return shift + std::log(x) - 0.5 / x - series;
}

// psi'(x) for x > 0.
inline double Trigamma(double x) {
  internal::CheckPositive(x, "Trigamma");
  if (std::isinf(x)) return 0.0;
  double shift = 0.0;
  while (x < 10.0) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv * (1.0 +
             inv * (0.5 +
                    inv * (1.0 / 6.0 -
                           inv2 * (1.0 / 30.0 -
                                   inv2 * (1.0 / 42.0 -
                                           inv2 * (1.0 / 30.0 -
                                                   inv2 * (5.0 / 66.0 -
                                                           inv2 * (691.0 / 2730.0 -
                                                                   inv2 * 7.0 / 6.0))))))));
  return shift + series;
}

// ln sum_i exp(v_i), stable for large |v_i|. -inf entries are absorbed; an
// empty list is an argument error.
inline double LogSumExp(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("LogSumExp: empty list");
  const double max = *std::max_element(values.begin(), values.end());
  if (std::isinf(max)) return max;
  if (std::isnan(max)) return max;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

}  // namespace nvdp

#endif  // NVDP_SPECIAL_FUNCTIONS_H_
