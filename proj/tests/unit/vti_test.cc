// Copyright 2026 The TicLens Authors
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

#include "ticlens/vti.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "test_util.h"
#include "ticlens/error.h"

namespace ticlens {
namespace {

using testing::Gen;

TEST(ComputeVti, Examples) {
  EXPECT_DOUBLE_EQ(compute_vti({0, 1, 0, 0}), 0.0);
  EXPECT_NEAR(compute_vti({1, 0, 1, 1}), 1.0, 1e-12);
  EXPECT_NEAR(compute_vti({0.5, 0.6, 0.4, 0.2}), 0.39, 1e-12);
}

TEST(ComputeVti, RejectsOutOfRangeComponents) {
  EXPECT_THROW(compute_vti({1.1, 0, 0, 0}), ValidationError);
  EXPECT_THROW(compute_vti({0, -0.1, 0, 0}), ValidationError);
  EXPECT_THROW(compute_vti({0, 0, NAN, 0}), ValidationError);
}

TEST(VtiWeights, ParseAndFormat) {
  const auto w = VtiWeights::parse("0.1,0.2,0.3,0.4");
  EXPECT_EQ(w, (VtiWeights{0.1, 0.2, 0.3, 0.4}));
  EXPECT_EQ(w.to_string(), "0.1,0.2,0.3,0.4");
  EXPECT_EQ(VtiWeights{}.to_string(), "0.3,0.2,0.3,0.2");
  EXPECT_THROW(VtiWeights::parse("0.1,0.2,0.3"), ValidationError);
  EXPECT_THROW(VtiWeights::parse("0.1,0.2,x,0.4"), ValidationError);
  EXPECT_THROW(VtiWeights::parse("0.1,0.2,-0.3,0.4"), ValidationError);
}

TEST(VtiProperty, MonotoneLinearAndBounded) {
  Gen g(41);
  const auto grid = weight_grid(default_weight_grid(), true);
  for (int i = 0; i < 10000; ++i) {
    const VtiComponents c{g.unit(), g.unit(), g.unit(), g.unit()};
    const auto& w = g.pick(grid);
    const double v = compute_vti(c, w);
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0 + 1e-12);
    // Raising one component raises VTI by weight * step (TTR enters inverted).
    const double step = (1.0 - c.tic_rate) * g.unit();
    VtiComponents up = c;
    up.tic_rate += step;
    ASSERT_NEAR(compute_vti(up, w) - v, w.alpha * step, 1e-12);
    if (step > 1e-9) {
      ASSERT_GT(compute_vti(up, w), v);
    }
    VtiComponents down = c;
    down.ttr_norm *= 0.5;
    ASSERT_NEAR(compute_vti(down, w) - v, w.beta * c.ttr_norm * 0.5, 1e-12);
  }
}

TEST(WeightGrid, UnitSumFilterAdmitsFortyFour) {
  // Oracle: integer compositions of 10 into four parts from {1,2,3,4}.
  int expect = 0;
  for (int a = 1; a <= 4; ++a)
    for (int b = 1; b <= 4; ++b)
      for (int c = 1; c <= 4; ++c)
        for (int d = 1; d <= 4; ++d) expect += (a + b + c + d == 10);
  EXPECT_EQ(expect, 44);
  const auto grid = weight_grid(default_weight_grid(), true);
  EXPECT_EQ(grid.size(), 44u);
  EXPECT_EQ(weight_grid(default_weight_grid(), false).size(), 256u);
  EXPECT_EQ(grid.front(), (VtiWeights{0.1, 0.1, 0.4, 0.4}));
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const auto& p = grid[i - 1];
    const auto& q = grid[i];
    ASSERT_LT(std::tie(p.alpha, p.beta, p.gamma, p.delta),
              std::tie(q.alpha, q.beta, q.gamma, q.delta));
  }
  EXPECT_NE(std::find(grid.begin(), grid.end(), VtiWeights{}), grid.end());
}

TEST(Pearson, Examples) {
  const std::vector<double> x = {1, 2, 3};
  EXPECT_NEAR(pearson(x, std::vector<double>{2, 4, 6}), 1.0, 1e-12);
  EXPECT_NEAR(pearson(x, std::vector<double>{3, 2, 1}), -1.0, 1e-12);
  EXPECT_THROW(pearson(x, std::vector<double>{1, 1, 1}), ValidationError);
  EXPECT_THROW(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), ValidationError);
  EXPECT_THROW(pearson(x, std::vector<double>{1, 2}), ValidationError);
}

// Hand oracle: textbook sample Pearson in long double.
double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= x.size();
  my /= y.size();
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

TEST(Pearson, PublishedModelTableSycophancyVersusNaturalness) {
  // Per-model columns of the overall VTI table (8 models).
  const std::vector<double> syc = {0.456, 0.312, 0.634, 0.378, 0.523, 0.467, 0.298, 0.423};
  const std::vector<double> nat = {0.589, 0.734, 0.445, 0.634, 0.556, 0.601, 0.689, 0.523};
  const double r = pearson(syc, nat);
  std::printf("  sycophancy index vs naturalness index: r = %.6f\n", r);
  EXPECT_NEAR(r, pearson_oracle(syc, nat), 1e-12);
  EXPECT_NEAR(r, -0.905, 0.01);
}

TEST(Pearson, PublishedHumanEvalNaturalnessVersusSycophancyPerception) {
  const std::vector<double> nat = {3.42, 4.12, 2.87, 3.67, 3.23, 3.45, 3.89, 3.12};
  const std::vector<double> perc = {3.67, 2.34, 4.56, 3.12, 3.89, 3.45, 2.67, 3.34};
  const double r = pearson(nat, perc);
  std::printf("  naturalness vs sycophancy perception: r = %.6f\n", r);
  EXPECT_NEAR(r, pearson_oracle(nat, perc), 1e-12);
  EXPECT_LT(r, -0.85);
}

TEST(Spearman, Examples) {
  EXPECT_NEAR(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{10, 20, 25, 90}), 1.0, 1e-12);
  EXPECT_NEAR(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{9, 5, 1}), -1.0, 1e-12);
  EXPECT_NEAR(spearman(std::vector<double>{1, 2, 2, 3}, std::vector<double>{1, 3, 3, 5}), 1.0, 1e-12);
  EXPECT_EQ(average_ranks(std::vector<double>{1, 2, 2, 3}), (std::vector<double>{1, 2.5, 2.5, 4}));
}

TEST(CorrelationProperty, BoundsAndInvariances) {
  Gen g(43);
  for (int i = 0; i < 10000; ++i) {
    const std::size_t n = 3 + g.below(20);
    std::vector<double> x(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = std::round(g.unit() * 8);
      y[k] = std::round(g.unit() * 8);
    }
    x[0] = 0;
    x[1] = 9;
    y[0] = 9;
    y[1] = 0;
    const double r = pearson(x, y);
    ASSERT_GE(r, -1.0);
    ASSERT_LE(r, 1.0);
    const double a = 0.5 + 3 * g.unit(), b = g.unit() * 10 - 5;
    std::vector<double> ax(n), cube(n);
    for (std::size_t k = 0; k < n; ++k) {
      ax[k] = a * x[k] + b;
      cube[k] = std::pow(y[k] - 4.0, 3.0);
    }
    ASSERT_NEAR(pearson(ax, y), r, 1e-9);
    const double s = spearman(x, y);
    ASSERT_GE(s, -1.0);
    ASSERT_LE(s, 1.0);
    ASSERT_NEAR(spearman(x, cube), s, 1e-12);
  }
}

// Oracle for calibration: ranks and Pearson computed independently.
std::vector<double> ranks_oracle(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double below = 0, equal = 0;
    for (double w : v) below += (w < v[i]), equal += (w == v[i]);
    r[i] = below + (equal + 1) / 2.0;
  }
  return r;
}

CalibrationResult calibrate_oracle(const std::vector<CalibrationItem>& items) {
  std::vector<double> h;
  for (const auto& it : items) h.push_back(it.human_score);
  const auto hr = ranks_oracle(h);
  CalibrationResult best;
  best.rho = -2;
  for (int a = 1; a <= 4; ++a)
    for (int b = 1; b <= 4; ++b)
      for (int c = 1; c <= 4; ++c)
        for (int d = 1; d <= 4; ++d) {
          if (a + b + c + d != 10) continue;
          const VtiWeights w{a / 10.0, b / 10.0, c / 10.0, d / 10.0};
          std::vector<double> v;
          for (const auto& it : items) v.push_back(compute_vti(it.components, w));
          if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; })) continue;
          const double rho = pearson_oracle(ranks_oracle(v), hr);
          if (rho > best.rho + 1e-12) best.weights = w, best.rho = rho;
        }
  return best;
}

std::vector<CalibrationItem> random_items(Gen& g, std::size_t n) {
  std::vector<CalibrationItem> items(n);
  for (auto& it : items) {
    it.components = {g.unit(), g.unit(), g.unit(), g.unit()};
  }
  return items;
}

TEST(Calibrate, PlantedDefaultWeightsRecovered) {
  Gen g(44);
  auto items = random_items(g, 60);
  for (auto& it : items) it.human_score = compute_vti(it.components, VtiWeights{});
  const auto got = calibrate_weights(items);
  const auto oracle = calibrate_oracle(items);
  EXPECT_NEAR(got.rho, 1.0, 1e-12);
  EXPECT_EQ(got.weights, oracle.weights);
  EXPECT_EQ(got.candidates, 44u);
  // With 60 generic items only the planted vector ranks perfectly.
  EXPECT_EQ(got.weights, VtiWeights{});
}

TEST(Calibrate, MatchesExhaustiveOracleOnNoisyScores) {
  Gen g(45);
  for (int round = 0; round < 30; ++round) {
    auto items = random_items(g, 5 + g.below(40));
    for (auto& it : items) {
      it.human_score = std::round(5 * (compute_vti(it.components, {0.4, 0.1, 0.1, 0.4}) + 0.3 * g.unit()));
    }
    bool constant = true;
    for (const auto& it : items) constant = constant && it.human_score == items[0].human_score;
    if (constant) continue;
    const auto got = calibrate_weights(items);
    const auto oracle = calibrate_oracle(items);
    EXPECT_EQ(got.weights, oracle.weights);
    EXPECT_NEAR(got.rho, oracle.rho, 1e-12);
  }
}

TEST(Calibrate, CubeTransformKeepsArgmax) {
  Gen g(46);
  for (int round = 0; round < 50; ++round) {
    auto items = random_items(g, 10 + g.below(30));
    for (auto& it : items) it.human_score = 1 + 4 * g.unit();
    auto cubed = items;
    for (auto& it : cubed) it.human_score = std::pow(it.human_score, 3);
    const auto a = calibrate_weights(items);
    const auto b = calibrate_weights(cubed);
    EXPECT_EQ(a.weights, b.weights);
    EXPECT_NEAR(a.rho, b.rho, 1e-12);
  }
}

TEST(Calibrate, ReversedOrderGivesMinusOneAndLexicographicMinimum) {
  std::vector<CalibrationItem> items = {
      {{0, 1, 0, 0}, 3}, {{0.5, 0.5, 0.5, 0.5}, 2}, {{1, 0, 1, 1}, 1}};
  const auto r = calibrate_weights(items);
  EXPECT_NEAR(r.rho, -1.0, 1e-12);
  EXPECT_EQ(r.weights, (VtiWeights{0.1, 0.1, 0.4, 0.4}));
}

TEST(Calibrate, ErrorsAndThreadDeterminism) {
  std::vector<CalibrationItem> flat = {{{0, 1, 0, 0}, 2}, {{1, 0, 1, 1}, 2}, {{0.5, 0.5, 0.5, 0.5}, 2}};
  EXPECT_THROW(calibrate_weights(flat), ValidationError);
  EXPECT_THROW(calibrate_weights(std::span<const CalibrationItem>(flat.data(), 2)), ValidationError);
  Gen g(47);
  auto items = random_items(g, 40);
  for (auto& it : items) it.human_score = std::round(g.unit() * 4);
  const auto a = calibrate_weights(items, default_weight_grid(), false, 1);
  const auto b = calibrate_weights(items, default_weight_grid(), false, 4);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.rho, b.rho);
  EXPECT_EQ(a.candidates, 256u);
}

// Oracle: pairwise form of alpha over pairable values,
//   D_o = (1/n) sum_u 1/(m_u - 1) sum_{i != j in u} d(i, j)
//   D_e = 1/(n(n-1)) sum_{i != j} d(i, j)
double alpha_oracle(const RatingsMatrix& m, AgreementLevel level) {
  std::vector<std::vector<int>> units;
  std::map<int, double> marg;
  for (std::size_t i = 0; i < m.items(); ++i) {
    std::vector<int> u;
    for (std::size_t r = 0; r < m.raters(); ++r) {
      if (auto s = m.get(r, i)) u.push_back(*s);
    }
    if (u.size() >= 2) {
      for (int s : u) marg[s] += 1;
      units.push_back(u);
    }
  }
  auto delta = [&](int c, int k) -> double {
    if (level == AgreementLevel::kInterval) return (c - k) * (c - k);
    if (c > k) std::swap(c, k);
    double s = 0;
    for (const auto& [g, n] : marg) {
      if (g >= c && g <= k) s += n;
    }
    s -= (marg[c] + marg[k]) / 2.0;
    return s * s;
  };
  double n = 0;
  std::vector<int> all;
  for (const auto& u : units) n += u.size(), all.insert(all.end(), u.begin(), u.end());
  double d_o = 0;
  for (const auto& u : units) {
    double s = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = 0; j < u.size(); ++j)
        if (i != j) s += delta(u[i], u[j]);
    d_o += s / (u.size() - 1.0);
  }
  d_o /= n;
  double d_e = 0;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = 0; j < all.size(); ++j)
      if (i != j) d_e += delta(all[i], all[j]);
  d_e /= n * (n - 1);
  if (d_e == 0) return 1.0;
  return 1 - d_o / d_e;
}

TEST(Krippendorff, Examples) {
  RatingsMatrix same(2, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    same.set(0, i, static_cast<int>(i) + 2);
    same.set(1, i, static_cast<int>(i) + 2);
  }
  EXPECT_DOUBLE_EQ(krippendorff_alpha(same), 1.0);

  RatingsMatrix opposed(2, 2);
  opposed.set(0, 0, 1);
  opposed.set(1, 0, 5);
  opposed.set(0, 1, 5);
  opposed.set(1, 1, 1);
  // By hand: D_o = 64/4 = 16, D_e = 128/12, alpha = 1 - 1.5.
  EXPECT_NEAR(krippendorff_alpha(opposed), -0.5, 1e-12);
  EXPECT_LT(krippendorff_alpha(opposed, AgreementLevel::kOrdinal), 0.0);

  RatingsMatrix single(2, 2);
  single.set(0, 0, 3);
  single.set(1, 0, 3);
  single.set(0, 1, 4);
  EXPECT_DOUBLE_EQ(krippendorff_alpha(single), 1.0);
}

TEST(Krippendorff, Errors) {
  RatingsMatrix one_rater(1, 3);
  EXPECT_THROW(krippendorff_alpha(one_rater), ValidationError);
  RatingsMatrix unpaired(2, 2);
  unpaired.set(0, 0, 1);
  unpaired.set(1, 1, 2);
  EXPECT_THROW(krippendorff_alpha(unpaired), ValidationError);
  EXPECT_THROW(RatingsMatrix(2, 2).set(0, 0, 6), ValidationError);
}

TEST(KrippendorffProperty, MatchesPairwiseOracle) {
  Gen g(48);
  int checked = 0;
  for (int round = 0; round < 10000; ++round) {
    const std::size_t raters = 2 + g.below(5), items = 1 + g.below(8);
    RatingsMatrix m(raters, items);
    const bool agree = g.coin(0.1);
    for (std::size_t i = 0; i < items; ++i) {
      const int base = 1 + static_cast<int>(g.below(5));
      for (std::size_t r = 0; r < raters; ++r) {
        if (g.coin(0.7)) m.set(r, i, agree ? base : 1 + static_cast<int>(g.below(5)));
      }
    }
    const auto level = g.coin() ? AgreementLevel::kInterval : AgreementLevel::kOrdinal;
    double got = 0;
    try {
      got = krippendorff_alpha(m, level);
    } catch (const ValidationError&) {
      continue;  // no pairable item
    }
    ++checked;
    ASSERT_NEAR(got, alpha_oracle(m, level), 1e-9);
    if (agree) {
      ASSERT_DOUBLE_EQ(got, 1.0);
    }
  }
  EXPECT_GT(checked, 9000);
}

TEST(Annotations, MatrixAndMeanScores) {
  std::vector<AnnotationRecord> a = {
      {"r2", "u1", Dimension::kNaturalness, 4}, {"r1", "u1", Dimension::kNaturalness, 2},
      {"r1", "u2", Dimension::kNaturalness, 3}, {"r1", "u2", Dimension::kTrust, 5}};
  const auto m = RatingsMatrix::from_annotations(a, Dimension::kNaturalness);
  EXPECT_EQ(m.item_ids(), (std::vector<std::string>{"r1", "r2"}));
  EXPECT_EQ(m.rater_ids(), (std::vector<std::string>{"u1", "u2"}));
  EXPECT_EQ(m.get(0, 1), 4);
  EXPECT_FALSE(m.get(1, 1).has_value());
  const auto means = mean_scores(a, Dimension::kNaturalness, true);
  EXPECT_DOUBLE_EQ(means.at("r1"), 3.5);
  EXPECT_DOUBLE_EQ(means.at("r2"), 2.0);
  EXPECT_EQ(parse_agreement_level("ordinal"), AgreementLevel::kOrdinal);
  EXPECT_FALSE(parse_agreement_level("nominal").has_value());
}

}  // namespace
}  // namespace ticlens
