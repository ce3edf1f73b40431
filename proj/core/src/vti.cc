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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "parallel.h"
#include "ticlens/error.h"

namespace ticlens {

namespace {

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ValidationError(std::string("VTI component ") + name +
                          " outside [0,1]: " + std::to_string(v));
  }
}

double parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ValidationError("bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

VtiComponents components_of(const MetricBundle& b) {
  return {b.tic_rate, b.mattr, b.syc_score, b.rep_rate};
}

VtiWeights VtiWeights::parse(std::string_view text) {
  std::vector<double> v;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = text.find(',', pos);
    v.push_back(parse_double(text.substr(pos, comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (v.size() != 4) {
    throw ValidationError("weights need 4 comma-separated values, got " +
                          std::to_string(v.size()));
  }
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw ValidationError("weights must be finite and >= 0");
    }
  }
  return {v[0], v[1], v[2], v[3]};
}

std::string VtiWeights::to_string() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%g,%g,%g,%g", alpha, beta, gamma, delta);
  return buf;
}

double compute_vti(const VtiComponents& c, const VtiWeights& w) {
  check_unit(c.tic_rate, "tic_rate");
  check_unit(c.ttr_norm, "ttr_norm");
  check_unit(c.syc_score, "syc_score");
  check_unit(c.rep_rate, "rep_rate");
  return w.alpha * c.tic_rate + w.beta * (1.0 - c.ttr_norm) +
         w.gamma * c.syc_score + w.delta * c.rep_rate;
}

std::vector<VtiWeights> weight_grid(std::span<const double> grid,
                                    bool require_unit_sum) {
  std::vector<double> g(grid.begin(), grid.end());
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  std::vector<VtiWeights> out;
  for (double a : g)
    for (double b : g)
      for (double c : g)
        for (double d : g) {
          if (require_unit_sum && std::abs(a + b + c + d - 1.0) > 1e-9) continue;
          out.push_back({a, b, c, d});
        }
  return out;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw ValidationError("pearson: length mismatch");
  }
  if (xs.size() < 3) throw ValidationError("pearson: need at least 3 pairs");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ValidationError("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ValidationError("spearman: length mismatch");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  return pearson(rx, ry);
}

CalibrationResult calibrate_weights(std::span<const CalibrationItem> items,
                                    std::span<const double> grid,
                                    bool require_unit_sum, int threads) {
  if (items.size() < 3) throw ValidationError("calibration needs at least 3 items");
  std::vector<double> human(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) human[i] = items[i].human_score;
  if (std::all_of(human.begin(), human.end(),
                  [&](double h) { return h == human.front(); })) {
    throw ValidationError("calibration: all human scores are identical");
  }
  const auto human_ranks = average_ranks(human);
  const auto candidates = weight_grid(grid, require_unit_sum);
  if (candidates.empty()) throw ValidationError("calibration: empty weight grid");

  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> rho(candidates.size(), kNaN);
  internal::parallel_chunks(candidates.size(), threads,
                            [&](std::size_t b, std::size_t e, std::size_t) {
    std::vector<double> vti(items.size());
    for (std::size_t c = b; c < e; ++c) {
      for (std::size_t i = 0; i < items.size(); ++i) {
        vti[i] = compute_vti(items[i].components, candidates[c]);
      }
      if (std::all_of(vti.begin(), vti.end(), [&](double v) { return v == vti.front(); })) {
        continue;
      }
      rho[c] = pearson(average_ranks(vti), human_ranks);
    }
  });

  // Serial selection keeps the tie-break independent of the thread count.
  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (std::isnan(rho[c])) continue;
    if (!best || rho[c] > rho[*best] + 1e-12) best = c;
  }
  if (!best) throw ValidationError("calibration: VTI is constant for every candidate");
  return {candidates[*best], rho[*best], candidates.size()};
}

RatingsMatrix::RatingsMatrix(std::size_t raters, std::size_t items)
    : raters_(raters), items_(items), cells_(raters * items) {}

void RatingsMatrix::set(std::size_t rater, std::size_t item, int score) {
  if (rater >= raters_ || item >= items_) {
    throw ValidationError("ratings matrix index out of range");
  }
  if (score < 1 || score > 5) {
    throw ValidationError("rating " + std::to_string(score) + " outside 1..5");
  }
  cells_[rater * items_ + item] = score;
}

std::optional<int> RatingsMatrix::get(std::size_t rater, std::size_t item) const {
  return cells_.at(rater * items_ + item);
}

RatingsMatrix RatingsMatrix::from_annotations(
    const std::vector<AnnotationRecord>& annotations, Dimension dimension) {
  std::set<std::string> raters, items;
  for (const auto& a : annotations) {
    if (a.dimension != dimension) continue;
    raters.insert(a.rater_id);
    items.insert(a.response_id);
  }
  RatingsMatrix m(raters.size(), items.size());
  m.rater_ids_.assign(raters.begin(), raters.end());
  m.item_ids_.assign(items.begin(), items.end());
  for (const auto& a : annotations) {
    if (a.dimension != dimension) continue;
    const auto r = std::lower_bound(m.rater_ids_.begin(), m.rater_ids_.end(), a.rater_id);
    const auto i = std::lower_bound(m.item_ids_.begin(), m.item_ids_.end(), a.response_id);
    m.set(static_cast<std::size_t>(r - m.rater_ids_.begin()),
          static_cast<std::size_t>(i - m.item_ids_.begin()), a.score);
  }
  return m;
}

std::string_view to_string(AgreementLevel level) {
  return level == AgreementLevel::kInterval ? "interval" : "ordinal";
}

std::optional<AgreementLevel> parse_agreement_level(std::string_view s) {
  if (s == "interval") return AgreementLevel::kInterval;
  if (s == "ordinal") return AgreementLevel::kOrdinal;
  return std::nullopt;
}

double krippendorff_alpha(const RatingsMatrix& m, AgreementLevel level) {
  if (m.raters() < 2) throw ValidationError("krippendorff_alpha: need >= 2 raters");
  std::set<int> value_set;
  std::vector<std::vector<int>> units;
  for (std::size_t i = 0; i < m.items(); ++i) {
    std::vector<int> vals;
    for (std::size_t r = 0; r < m.raters(); ++r) {
      if (auto v = m.get(r, i)) vals.push_back(*v);
    }
    if (vals.size() < 2) continue;
    value_set.insert(vals.begin(), vals.end());
    units.push_back(std::move(vals));
  }
  if (units.empty()) {
    throw ValidationError("krippendorff_alpha: no item rated by >= 2 raters");
  }
  const std::vector<int> values(value_set.begin(), value_set.end());
  const std::size_t v = values.size();
  auto index = [&](int x) {
    return static_cast<std::size_t>(
        std::lower_bound(values.begin(), values.end(), x) - values.begin());
  };

  std::vector<double> o(v * v, 0.0);
  for (const auto& u : units) {
    const double w = 1.0 / static_cast<double>(u.size() - 1);
    for (std::size_t a = 0; a < u.size(); ++a)
      for (std::size_t b = 0; b < u.size(); ++b)
        if (a != b) o[index(u[a]) * v + index(u[b])] += w;
  }
  std::vector<double> nc(v, 0.0);
  double n = 0.0;
  for (std::size_t c = 0; c < v; ++c) {
    for (std::size_t k = 0; k < v; ++k) nc[c] += o[c * v + k];
    n += nc[c];
  }

  auto delta2 = [&](std::size_t c, std::size_t k) {
    if (level == AgreementLevel::kInterval) {
      const double d = static_cast<double>(values[c] - values[k]);
      return d * d;
    }
    const std::size_t lo = std::min(c, k), hi = std::max(c, k);
    double s = 0.0;
    for (std::size_t g = lo; g <= hi; ++g) s += nc[g];
    s -= (nc[lo] + nc[hi]) / 2.0;
    return s * s;
  };

  double observed = 0.0, expected = 0.0;
  for (std::size_t c = 0; c < v; ++c)
    for (std::size_t k = 0; k < v; ++k) {
      if (c == k) continue;
      const double d = delta2(c, k);
      observed += o[c * v + k] * d;
      expected += nc[c] * nc[k] * d;
    }
  if (expected == 0.0) return 1.0;
  return 1.0 - (n - 1.0) * observed / expected;
}

std::map<std::string, double> mean_scores(
    const std::vector<AnnotationRecord>& annotations, Dimension dimension,
    bool invert) {
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& a : annotations) {
    if (a.dimension != dimension) continue;
    auto& [sum, count] = acc[a.response_id];
    sum += invert ? 6.0 - a.score : static_cast<double>(a.score);
    ++count;
  }
  std::map<std::string, double> out;
  for (const auto& [id, sc] : acc) out[id] = sc.first / sc.second;
  return out;
}

}  // namespace ticlens
