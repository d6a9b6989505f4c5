// Copyright 2026 The mfc-pathtrack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mfc/f_estimator.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "gtest/gtest.h"

namespace mfc {
namespace {

SampleWindow fill(double tau, double h, double t0,
                  const std::function<double(double)>& y,
                  const std::function<double(double)>& u) {
  SampleWindow w(tau, 1 << 16);
  const int n = static_cast<int>(std::lround(tau / h));
  for (int k = 0; k <= n; ++k) {
    const double t = t0 + k * h;
    w.push(t, y(t - t0), u(t - t0));
  }
  return w;
}

// 20-point Gauss-Legendre on [0, tau], used as an independent quadrature.
double gauss_legendre(const std::function<double(double)>& f, double tau) {
  static const double x[10] = {0.0765265211334973, 0.2277858511416451, 0.3737060887154195,
                               0.5108670019508271, 0.6360536807265150, 0.7463319064601508,
                               0.8391169718222188, 0.9122344282513259, 0.9639719272779138,
                               0.9931285991850949};
  static const double w[10] = {0.1527533871307258, 0.1491729864726037, 0.1420961093183820,
                               0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
                               0.0832767415767048, 0.0626720483341091, 0.0406014298003869,
                               0.0176140071391521};
  double sum = 0.0;
  for (int i = 0; i < 10; ++i) {
    sum += w[i] * (f(tau / 2 * (1 + x[i])) + f(tau / 2 * (1 - x[i])));
  }
  return sum * tau / 2;
}

TEST(SampleWindowTest, PushAppends) {
  SampleWindow w(0.1);
  w.push(0.0, 1.0, 2.0);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w.samples().front().y, 1.0);
  EXPECT_EQ(w.samples().front().u, 2.0);
}

TEST(SampleWindowTest, RejectsNonIncreasingTimestamps) {
  SampleWindow w(0.1);
  w.push(0.0, 0, 0);
  EXPECT_THROW(w.push(0.0, 0, 0), TimestampError);
  EXPECT_THROW(w.push(-1.0, 0, 0), TimestampError);
  EXPECT_THROW(w.push(NAN, 0, 0), TimestampError);
}

TEST(SampleWindowTest, EvictsStaleSamples) {
  SampleWindow w(0.1);
  for (int k = 0; k <= 25; ++k) w.push(k * 0.01, k, 0);
  EXPECT_GE(w.samples().front().t, 0.15 - 1e-12);
  EXPECT_NEAR(w.samples().back().t, 0.25, 1e-12);
  EXPECT_LE(w.span(), 0.1 + 0.01 + 1e-12);
  EXPECT_TRUE(w.ready());
}

TEST(SampleWindowTest, ReadinessNeedsSpanAndSampleCount) {
  SampleWindow coarse(0.1);
  for (int k = 0; k <= 4; ++k) coarse.push(k * 0.05, 0, 0);
  EXPECT_FALSE(coarse.ready());  // span is enough, sample count is not

  SampleWindow fine(0.1);
  for (int k = 0; k < 10; ++k) fine.push(k * 0.01, 0, 0);
  EXPECT_FALSE(fine.ready());
  fine.push(0.10, 0, 0);
  EXPECT_TRUE(fine.ready());
  EXPECT_FALSE(estimate_f_order1(coarse, 1.0, 0.1).has_value());
}

TEST(QuadratureTest, ExactOnConstantsAndLinears) {
  std::vector<double> t, one, lin;
  for (int k = 0; k <= 37; ++k) {
    const double s = std::pow(k / 37.0, 1.3);  // non-uniform grid on [0, 1]
    t.push_back(0.7 * s);
    one.push_back(1.0);
    lin.push_back(s);
  }
  EXPECT_NEAR(trapezoid(t, one), 0.7, 1e-12);
  std::vector<double> u, sig;
  for (int k = 0; k <= 100; ++k) {
    u.push_back(k / 100.0);
    sig.push_back(k / 100.0);
  }
  EXPECT_NEAR(trapezoid(u, sig), 0.5, 1e-12);
}

TEST(QuadratureTest, SecondOrderRichardsonRatio) {
  const auto err = [](int n) {
    std::vector<double> t, f;
    for (int k = 0; k <= n; ++k) {
      t.push_back(static_cast<double>(k) / n);
      f.push_back(t.back() * t.back());
    }
    return std::abs(trapezoid(t, f) - 1.0 / 3.0);
  };
  const double ratio = err(20) / err(40);
  EXPECT_GE(ratio, 3.5);
  EXPECT_LE(ratio, 4.5);
}

TEST(EstimateOrder1Test, ZeroSignals) {
  const auto w = fill(0.5, 1e-3, 0.0, [](double) { return 0.0; }, [](double) { return 0.0; });
  EXPECT_EQ(estimate_f_order1(w, 1.0, 0.5).value(), 0.0);
}

TEST(EstimateOrder1Test, RampWithConstantInputGivesThree) {
  for (double tau : {0.05, 0.5, 2.0}) {
    for (double c : {0.0, -7.0, 1e3}) {
      const auto w = fill(tau, tau / 500, 10.0, [c](double t) { return 5 * t + c; },
                          [](double) { return 2.0; });
      EXPECT_NEAR(estimate_f_order1(w, 1.0, tau).value(), 3.0, 1e-9 * (1 + std::abs(c)))
          << tau << " " << c;
    }
  }
}

TEST(EstimateOrder1Test, MonteCarloNoise) {
  std::mt19937_64 rng(2026);
  std::normal_distribution<double> noise(0.0, 0.01);
  int inside = 0;
  const int trials = 1000;
  for (int i = 0; i < trials; ++i) {
    const auto w = fill(0.5, 1e-3, 0.0, [&](double t) { return 5 * t + noise(rng); },
                        [](double) { return 2.0; });
    if (std::abs(estimate_f_order1(w, 1.0, 0.5).value() - 3.0) <= 0.1) ++inside;
  }
  EXPECT_GE(inside, 990);
}

TEST(EstimateOrder1Test, MatchesGaussLegendreOracle) {
  const double tau = 0.4;
  const double alpha = 0.8;
  const auto y = [](double s) { return std::sin(3 * s) + 0.5 * s * s; };
  const auto u = [](double s) { return std::cos(2 * s) - 1.0; };
  const double oracle =
      -6.0 / std::pow(tau, 3) *
      gauss_legendre([&](double s) { return (tau - 2 * s) * y(s) + alpha * s * (tau - s) * u(s); },
                     tau);
  const auto w = fill(tau, tau / 4000, 3.0, y, u);
  EXPECT_NEAR(estimate_f_order1(w, alpha, tau).value(), oracle, 1e-6);
}

TEST(EstimateOrder2Test, KernelNormalization) {
  const auto w = fill(1.0, 1e-3, 0.0, [](double s) { return s * s / 2; },
                      [](double) { return 0.0; });
  EXPECT_NEAR(estimate_f_order2(w, 1.0, 1.0).value(), 1.0, 1e-6);
}

TEST(EstimateOrder2Test, ConstantInputReturnsF) {
  const double big_f = -1.7;
  const double alpha = 30.0;
  const double c = 0.02;
  const auto w = fill(0.1, 1e-4, 5.0,
                      [&](double s) { return (big_f + alpha * c) * s * s / 2; },
                      [&](double) { return c; });
  EXPECT_NEAR(estimate_f_order2(w, alpha, 0.1).value(), big_f, 1e-5);
}

TEST(EstimateOrder2Test, AffineTermsAreAnnihilated) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-10, 10);
  const auto y = [](double s) { return std::sin(7 * s) + s * s * s; };
  const auto u = [](double s) { return std::cos(s); };
  const auto base = fill(0.3, 1e-3, 0.0, y, u);
  const double e0 = estimate_f_order2(base, 2.0, 0.3).value();
  for (int i = 0; i < 20; ++i) {
    const double y0 = uni(rng);
    const double y1 = uni(rng);
    const auto w = fill(0.3, 1e-3, 0.0, [&](double s) { return y(s) + y0 + y1 * s; }, u);
    EXPECT_NEAR(estimate_f_order2(w, 2.0, 0.3).value(), e0, 1e-9);
  }
}

TEST(EstimateOrder2Test, MatchesGaussLegendreOracle) {
  const double tau = 0.2;
  const double alpha = 30.0;
  const auto y = [](double s) { return std::exp(s) * std::sin(9 * s); };
  const auto u = [](double s) { return 0.01 * s; };
  const double oracle =
      60.0 / std::pow(tau, 5) * gauss_legendre([&](double s) {
        return (tau * tau - 6 * tau * s + 6 * s * s) * y(s) -
               alpha / 2 * s * s * (tau - s) * (tau - s) * u(s);
      }, tau);
  const auto w = fill(tau, tau / 4000, 0.0, y, u);
  EXPECT_NEAR(estimate_f_order2(w, alpha, tau).value(), oracle, 1e-5 * std::abs(oracle) + 1e-6);
}

TEST(EstimatorPropertiesTest, Order1ConstantInvariance) {
  const auto y = [](double s) { return std::sin(4 * s); };
  const auto u = [](double s) { return s; };
  const double e0 = estimate_f_order1(fill(0.5, 1e-3, 0.0, y, u), 1.5, 0.5).value();
  const double e1 =
      estimate_f_order1(fill(0.5, 1e-3, 0.0, [&](double s) { return y(s) + 123.0; }, u), 1.5, 0.5)
          .value();
  EXPECT_NEAR(e0, e1, 1e-9);
}

TEST(EstimatorPropertiesTest, Linearity) {
  const auto y1 = [](double s) { return std::sin(4 * s); };
  const auto y2 = [](double s) { return s * s; };
  const auto u1 = [](double s) { return 1.0 + s; };
  const auto u2 = [](double s) { return std::cos(s); };
  for (int nu : {1, 2}) {
    const auto est = [nu](const SampleWindow& w) {
      return estimate_f(w, {nu, 2.0, 0.5, QuadratureRule::kTrapezoid}).value();
    };
    const double a = est(fill(0.5, 1e-3, 0.0, y1, u1));
    const double b = est(fill(0.5, 1e-3, 0.0, y2, u2));
    const double ab = est(fill(0.5, 1e-3, 0.0, [&](double s) { return y1(s) + y2(s); },
                               [&](double s) { return u1(s) + u2(s); }));
    EXPECT_NEAR(ab, a + b, 1e-9 * (1 + std::abs(ab)));
  }
}

TEST(EstimatorPropertiesTest, WindowShiftCovariance) {
  const auto y = [](double s) { return std::sin(4 * s); };
  const auto u = [](double s) { return s; };
  for (int nu : {1, 2}) {
    const EstimatorConfig cfg{nu, 1.0, 0.25, QuadratureRule::kTrapezoid};
    const double a = estimate_f(fill(0.25, 1e-3, 0.0, y, u), cfg).value();
    const double b = estimate_f(fill(0.25, 1e-3, 1000.0, y, u), cfg).value();
    EXPECT_NEAR(a, b, 1e-7 * (1 + std::abs(a)));
  }
}

// Signals of y'' = F + alpha u with time-varying u: the estimate converges
// to F at second order in the sample period.
TEST(EstimatorPropertiesTest, ConvergesAtQuadratureOrder) {
  const double big_f = 2.5;
  const double alpha = 3.0;
  const double tau = 0.5;
  // u = cos(s) -> y = (F + alpha) s^2 / 2 ... integrate twice: y = F s^2/2 + alpha (1 - cos s)
  const auto y = [&](double s) { return big_f * s * s / 2 + alpha * (1 - std::cos(s)) + 0.3 * s; };
  const auto u = [](double s) { return std::cos(s); };
  const auto err = [&](double h, QuadratureRule rule) {
    return std::abs(estimate_f_order2(fill(tau, h, 0.0, y, u), alpha, tau, rule).value() - big_f);
  };
  const double trap = err(tau / 50, QuadratureRule::kTrapezoid) /
                      err(tau / 100, QuadratureRule::kTrapezoid);
  EXPECT_GT(trap, 3.5);
  EXPECT_LT(trap, 4.5);
  const double linear = err(tau / 50, QuadratureRule::kPiecewiseLinear) /
                        err(tau / 100, QuadratureRule::kPiecewiseLinear);
  EXPECT_GT(linear, 3.5);
  EXPECT_LT(err(tau / 100, QuadratureRule::kPiecewiseLinear),
            err(tau / 100, QuadratureRule::kTrapezoid));
}

TEST(EstimateOrder1Test, ExactOnAffineSignalsAtOneKilohertz) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-5, 5);
  for (int i = 0; i < 100; ++i) {
    const double big_f = uni(rng);
    const double alpha = uni(rng);
    const double u0 = uni(rng);
    const double c = uni(rng);
    const auto w = fill(0.5, 1e-3, 0.0, [&](double t) { return (big_f + alpha * u0) * t + c; },
                        [&](double) { return u0; });
    EXPECT_NEAR(estimate_f_order1(w, alpha, 0.5).value(), big_f, 1e-6 * std::abs(big_f));
  }
}

TEST(EstimatorConfigTest, Validation) {
  EXPECT_THROW((EstimatorConfig{3, 1, 0.5, QuadratureRule::kTrapezoid}.validate()),
               std::invalid_argument);
  EXPECT_THROW((EstimatorConfig{1, 0, 0.5, QuadratureRule::kTrapezoid}.validate()),
               std::invalid_argument);
  EXPECT_THROW((EstimatorConfig{1, 1, 0.0, QuadratureRule::kTrapezoid}.validate()),
               std::invalid_argument);
}

}  // namespace
}  // namespace mfc
