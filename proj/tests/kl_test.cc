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

#include "nvdp/kl.h"

#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/distributions/beta.hpp>

#include "gtest/gtest.h"

namespace nvdp {
namespace {

TEST(DirichletKlTest, SelfIsZero) {
  Vector a(3);
  a << 0.4, 1.3, 2.0;
  EXPECT_NEAR(DirichletKl(a, a), 0.0, 1e-14);
}

TEST(DirichletKlTest, BetaMatchesQuadrature) {
  Vector a(2), b(2);
  a << 2.5, 1.5;
  b << 1.2, 3.0;
  const boost::math::beta_distribution<double> p(a[0], a[1]);
  const boost::math::beta_distribution<double> q(b[0], b[1]);
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double kl = integrator.integrate(
      [&](double x) {
        const double px = boost::math::pdf(p, x);
        return px > 0 ? px * (std::log(px) - std::log(boost::math::pdf(q, x))) : 0.0;
      },
      0.0, 1.0);
  EXPECT_NEAR(DirichletKl(a, b), kl, 1e-9);
}

TEST(DirichletKlTest, SupportMismatchIsInfinite) {
  Vector a(3), b(3);
  a << 1.0, 0.0, 2.0;
  b << 1.0, 0.5, 2.0;
  EXPECT_EQ(DirichletKl(a, b), kInf);
  Vector c(3);
  c << 1.5, 0.0, 0.5;
  EXPECT_TRUE(std::isfinite(DirichletKl(a, c)));
}

TEST(GaussianKlDiagTest, ClosedForm) {
  RowVector mu(2), sigma(2), mu_p(2), sigma_p(2);
  mu << 0.0, 1.0;
  sigma << 1.0, 2.0;
  mu_p << 1.0, 1.0;
  sigma_p << 1.0, 1.0;
  // 0.5 + (log 1 - log 2 + (4 + 0) / 2 - 0.5)
  EXPECT_NEAR(GaussianKlDiag(mu, sigma, mu_p, sigma_p), 0.5 + (-std::log(2.0) + 2.0 - 0.5), 1e-14);
}

}  // namespace
}  // namespace nvdp
