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

#ifndef TICLENS_SYNTH_H_
#define TICLENS_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ticlens/corpus.h"
#include "ticlens/language.h"
#include "ticlens/lexicon.h"

namespace ticlens {

using InjectionMap = std::map<TicCategory, double>;

// Injection probabilities that replace the base ones for every cell matching
// all of the set fields. Later profiles win.
struct InjectionProfile {
  std::optional<std::string> model;
  std::optional<Language> language;
  std::optional<std::string> task;
  std::optional<std::string> prompt_type;
  InjectionMap injection;
};

// Linear per-turn probability for one category, overriding its injection
// probability: rate_start at turn 1, rate_end at turn n_turns.
struct TurnRamp {
  double rate_start = 0.0;
  double rate_end = 0.0;
  int n_turns = 2;
  TicCategory category = TicCategory::kSycophanticOpener;
};

enum class Sampling {
  kBernoulli,   // independent draw per response and category
  kStratified,  // exactly round(p * cell size) responses per cell
};

// Records are laid out over the full factorial of models x languages x
// tasks x prompt types x turns x temperatures, cycling through the cells in
// record order so every cell gets n_responses / cells records (+1 for the
// first n_responses % cells cells).
struct SynthSpec {
  std::size_t n_responses = 1000;
  std::vector<std::string> models = {"synth-model"};
  std::vector<Language> languages = {Language::kEn};
  std::vector<std::string> tasks = {"general"};
  std::vector<std::string> prompt_types;  // empty = field unset
  InjectionMap injection;
  std::vector<InjectionProfile> profiles;
  std::optional<TurnRamp> turn_ramp;
  std::vector<double> temperature_levels;  // empty = field unset
  // Multiplies every probability at the matching temperature level
  // (result capped at 1). Empty = all 1.
  std::vector<double> temperature_factors;
  // Empty = built-in list for each language.
  std::map<Language, std::vector<std::string>> base_vocabulary;
  std::size_t words_min = 30;
  std::size_t words_max = 60;
  std::uint64_t seed = 42;
  Sampling sampling = Sampling::kBernoulli;

  // Throws ValidationError naming the offending field.
  void validate() const;
  static SynthSpec from_json(std::string_view json_text);
  static SynthSpec load(const std::filesystem::path& path);
};

const std::vector<std::string>& default_vocabulary(Language language);

// Probability of injecting `category` into a response of this cell.
double injection_probability(const SynthSpec& spec, TicCategory category,
                             const std::string& model, Language language,
                             const std::string& task,
                             const std::optional<std::string>& prompt_type,
                             int turn, std::optional<std::size_t> temperature_level);

// Pure function of (spec, lexicon). Throws ValidationError when a category
// with nonzero probability has no lexicon entry in a generated language.
Corpus generate(const SynthSpec& spec, const TicLexicon& lexicon);

struct ExpectedValue {
  double mean = 0.0;
  double band = 0.0;  // 3 sigma of the response-level mean
};

struct ExpectedMetrics {
  ExpectedValue tic_rate;
  ExpectedValue syc_score;
};

// Mean over responses of 1 - prod(1 - p_c), with the Poisson-binomial 3
// sigma band; syc_score over the two sycophancy categories only.
ExpectedMetrics expected_metrics(const SynthSpec& spec);

}  // namespace ticlens

#endif  // TICLENS_SYNTH_H_
