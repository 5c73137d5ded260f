// Copyright 2026 The sdelab Authors
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

#include "sdelab/model.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

namespace sdelab {
namespace {

SdeProblem jump_quintic() { return make_problem("ind(1,inf) - x^5", "x", {}, 4.0, 1.0); }

TEST(MakeProblem, MergesDeclaredAndExtractedBreakpoints) {
  const SdeProblem p = make_problem("ind(1,inf) - x^5", "x", {3.0, 1.0, -2.0}, 4.0, 1.0);
  EXPECT_EQ(p.breakpoints, (std::vector<double>{-2.0, 1.0, 3.0}));
  EXPECT_EQ(SdeProblem::horizon, 1.0);
}

TEST(MakeProblem, RejectsBadConstants) {
  auto kind_of = [](auto&& f) {
    try {
      f();
    } catch (const ModelError& e) {
      return e.kind();
    }
    ADD_FAILURE() << "no ModelError";
    return ModelErrorKind::InvalidGrid;
  };
  EXPECT_EQ(kind_of([] { make_problem("x", "1", {}, 0.0, 0.0); }), ModelErrorKind::InvalidProblem);
  EXPECT_EQ(kind_of([] { make_problem("x", "1", {}, 1.0, INFINITY); }), ModelErrorKind::InvalidProblem);
  EXPECT_EQ(kind_of([] { make_problem("x", "1", {NAN}, 1.0, 0.0); }), ModelErrorKind::InvalidProblem);
  EXPECT_THROW(make_problem("x +", "1", {}, 1.0, 0.0), ParseError);
}

TEST(TamingExponent, MatchesDefinition) {
  EXPECT_EQ(taming_exponent(4.0), 0.2);
  EXPECT_EQ(taming_exponent(1.0), 0.5);
  EXPECT_EQ(taming_exponent(0.5), 0.5);
  EXPECT_EQ(taming_exponent(9.0), 0.1);
}

TEST(GridPoint, Examples) {
  EXPECT_DOUBLE_EQ(grid_point(0.37, 10), 0.3);
  EXPECT_EQ(grid_point(1.0, 8), 1.0);
  EXPECT_EQ(grid_point(0.25, 4), 0.25);
  EXPECT_EQ(grid_point(0.0, 7), 0.0);
}

TEST(GridPoint, IdempotentAndBelowT) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> n_dist(1, 5000);
  for (int i = 0; i < 10000; ++i) {
    const double t = u(rng);
    const int n = n_dist(rng);
    const double s = grid_point(t, n);
    EXPECT_EQ(grid_point(s, n), s);
    EXPECT_LE(s, t);
    EXPECT_GT(s + 1.0 / n, t);
  }
}

TEST(Validate, JumpQuinticIsAccepted) {
  const ValidationReport r = validate(jump_quintic(), CheckGrid{});
  EXPECT_TRUE(r.ok);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_EQ(r.gamma, 0.2);
  EXPECT_GE(r.lambda_hat, 4.0);
  EXPECT_LE(r.onesided_c_hat, 2.0);
  EXPECT_NEAR(r.sigma_lip_hat, 1.0, 1e-12);
  EXPECT_TRUE(std::isfinite(r.growth_c_hat));
}

TEST(Validate, OnesidedEstimateStaysBoundedAsPairsGrow) {
  for (int pairs : {100, 1000, 10000, 50000}) {
    CheckGrid grid;
    grid.pair_count = pairs;
    EXPECT_LE(validate(jump_quintic(), grid).onesided_c_hat, 2.0) << pairs;
  }
}

TEST(Validate, SigmaVanishingAtBreakpointIsB2) {
  const ValidationReport r = validate(make_problem("x", "x", {0.0}, 1.0, 1.0), CheckGrid{});
  EXPECT_FALSE(r.ok);
  ASSERT_FALSE(r.violations.empty());
  EXPECT_EQ(r.violations.front().condition, "B2");
  EXPECT_EQ(r.violations.front().x, 0.0);
}

TEST(Validate, CubicDriftIsNotDissipative) {
  CheckGrid grid;
  grid.lo = 1.0;
  grid.hi = 2.0;
  grid.count = 2;
  grid.pair_count = 0;
  const ValidationReport r = validate(make_problem("x^3", "1", {}, 2.0, 0.0), grid);
  EXPECT_GE(r.onesided_c_hat, 7.0);
  EXPECT_TRUE(r.ok);

  grid.onesided_cap = 5.0;
  const ValidationReport capped = validate(make_problem("x^3", "1", {}, 2.0, 0.0), grid);
  EXPECT_FALSE(capped.ok);
  ASSERT_EQ(capped.violations.size(), 1u);
  EXPECT_EQ(capped.violations[0].condition, "B3-onesided");
  EXPECT_GE(capped.violations[0].value, 7.0);
}

TEST(Validate, CapsOnGrowthAndSigma) {
  CheckGrid grid;
  grid.growth_cap = 1e-3;
  grid.sigma_lipschitz_cap = 0.5;
  const ValidationReport r = validate(jump_quintic(), grid);
  EXPECT_FALSE(r.ok);
  bool growth = false, sigma = false;
  for (const auto& v : r.violations) {
    growth = growth || v.condition == "B3-growth";
    sigma = sigma || v.condition == "B2-lip";
  }
  EXPECT_TRUE(growth);
  EXPECT_TRUE(sigma);
}

TEST(Validate, Deterministic) {
  const ValidationReport a = validate(jump_quintic(), CheckGrid{});
  const ValidationReport b = validate(jump_quintic(), CheckGrid{});
  EXPECT_EQ(a.onesided_c_hat, b.onesided_c_hat);
  EXPECT_EQ(a.growth_c_hat, b.growth_c_hat);
  EXPECT_EQ(a.sigma_lip_hat, b.sigma_lip_hat);
  EXPECT_EQ(a.lambda_hat, b.lambda_hat);
}

TEST(Validate, GammaMatchesDefinitionForManyEll) {
  for (double ell : {0.1, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 7.5}) {
    const ValidationReport r = validate(make_problem("-x", "1", {}, ell, 0.0), CheckGrid{});
    EXPECT_EQ(r.gamma, std::min(1.0 / (1.0 + ell), 0.5));
  }
}

TEST(Validate, LambdaCoversCoefficientsNearOrigin) {
  const ValidationReport r = validate(make_problem("10", "2", {}, 1.0, 0.0), CheckGrid{});
  EXPECT_GE(r.lambda_hat, 13.0);
}

TEST(Validate, GridErrors) {
  CheckGrid bad;
  bad.lo = 1.0;
  bad.hi = 1.0;
  try {
    validate(jump_quintic(), bad);
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_EQ(e.kind(), ModelErrorKind::InvalidGrid);
  }
  CheckGrid sparse;
  sparse.count = 3;
  try {
    validate(make_problem("ind(0,0.001)", "1", {}, 1.0, 0.0), sparse);
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_EQ(e.kind(), ModelErrorKind::EmptyPiece);
  }
}

TEST(Validate, EvaluationErrorsPropagate) {
  EXPECT_THROW(validate(make_problem("sqrt(x)", "1", {}, 1.0, 1.0), CheckGrid{}), EvalError);
}

}  // namespace
}  // namespace sdelab
