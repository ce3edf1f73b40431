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

#ifndef TICLENS_VTI_H_
#define TICLENS_VTI_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ticlens/corpus.h"
#include "ticlens/metrics.h"

namespace ticlens {

struct VtiComponents {
  double tic_rate = 0.0;
  double ttr_norm = 0.0;  // the MATTR value
  double syc_score = 0.0;
  double rep_rate = 0.0;
};

VtiComponents components_of(const MetricBundle& bundle);

struct VtiWeights {
  double alpha = 0.3;
  double beta = 0.2;
  double gamma = 0.3;
  double delta = 0.2;

  // "a,b,g,d". Throws ValidationError on malformed or negative values.
  static VtiWeights parse(std::string_view text);
  std::string to_string() const;
  friend bool operator==(const VtiWeights&, const VtiWeights&) = default;
};

// alpha*tic_rate + beta*(1 - ttr_norm) + gamma*syc_score + delta*rep_rate.
// Throws ValidationError when a component lies outside [0, 1].
double compute_vti(const VtiComponents& c, const VtiWeights& w = {});

inline const std::vector<double>& default_weight_grid() {
  static const std::vector<double> grid = {0.1, 0.2, 0.3, 0.4};
  return grid;
}

// All grid^4 vectors in lexicographic (alpha, beta, gamma, delta) order,
// restricted to those summing to 1 (within 1e-9) when require_unit_sum.
std::vector<VtiWeights> weight_grid(std::span<const double> grid,
                                    bool require_unit_sum);

struct CalibrationItem {
  VtiComponents components;
  double human_score = 0.0;  // higher = more tic-afflicted
};

struct CalibrationResult {
  VtiWeights weights;
  double rho = 0.0;
  std::size_t candidates = 0;
};

// Exhaustive grid search maximizing Spearman rho between VTI and the human
// score. Ties (within 1e-12) go to the lexicographically smallest vector.
// Candidates whose VTI is constant across items are skipped. Throws
// ValidationError with fewer than 3 items, constant human scores, or no
// usable candidate.
CalibrationResult calibrate_weights(
    std::span<const CalibrationItem> items,
    std::span<const double> grid = default_weight_grid(),
    bool require_unit_sum = true, int threads = 1);

// Sample Pearson correlation. Throws ValidationError on length mismatch,
// fewer than 3 values, or zero variance.
double pearson(std::span<const double> xs, std::span<const double> ys);

// 1-based ranks; tied values share the mean of their ranks.
std::vector<double> average_ranks(std::span<const double> xs);

// Pearson of the average ranks.
double spearman(std::span<const double> xs, std::span<const double> ys);

// Raters x items, each cell an optional integer score.
class RatingsMatrix {
 public:
  RatingsMatrix(std::size_t raters, std::size_t items);

  // Builds the matrix for one dimension; raters and items are indexed in
  // sorted id order.
  static RatingsMatrix from_annotations(
      const std::vector<AnnotationRecord>& annotations, Dimension dimension);

  std::size_t raters() const { return raters_; }
  std::size_t items() const { return items_; }
  void set(std::size_t rater, std::size_t item, int score);
  std::optional<int> get(std::size_t rater, std::size_t item) const;

  const std::vector<std::string>& rater_ids() const { return rater_ids_; }
  const std::vector<std::string>& item_ids() const { return item_ids_; }

 private:
  std::size_t raters_;
  std::size_t items_;
  std::vector<std::optional<int>> cells_;
  std::vector<std::string> rater_ids_;
  std::vector<std::string> item_ids_;
};

enum class AgreementLevel { kInterval, kOrdinal };
std::string_view to_string(AgreementLevel level);
std::optional<AgreementLevel> parse_agreement_level(std::string_view s);

// Coincidence-matrix alpha = 1 - D_o / D_e. Items with fewer than two
// ratings are not pairable and are ignored. Returns 1 when D_e is zero.
// Throws ValidationError with fewer than 2 raters or no pairable item.
double krippendorff_alpha(const RatingsMatrix& m,
                          AgreementLevel level = AgreementLevel::kInterval);

// Mean score per response id for one dimension; with `invert`, each score s
// is replaced by 6 - s first.
std::map<std::string, double> mean_scores(
    const std::vector<AnnotationRecord>& annotations, Dimension dimension,
    bool invert);

}  // namespace ticlens

#endif  // TICLENS_VTI_H_
