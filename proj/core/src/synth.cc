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

#include "ticlens/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ticlens/error.h"
#include "ticlens/text.h"

namespace ticlens {

namespace {

using nlohmann::json;

// Portable draws on top of mt19937_64, whose output sequence is fixed by the
// standard (the std distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform in [0, n) by rejection.
  std::size_t below(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
  }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }

 private:
  std::mt19937_64 engine_;
};

void check_prob(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError("synth spec: " + what + " must lie in [0,1]");
  }
}

template <class T>
void check_unique_nonempty(const std::vector<T>& v, const char* what) {
  if (v.empty()) throw ValidationError(std::string("synth spec: ") + what + " is empty");
  std::set<T> s(v.begin(), v.end());
  if (s.size() != v.size()) {
    throw ValidationError(std::string("synth spec: ") + what + " has duplicates");
  }
}

struct Cell {
  std::size_t model = 0, language = 0, task = 0, prompt = 0, turn = 0, temp = 0;
};

struct Layout {
  std::size_t models, languages, tasks, prompts, turns, temps;
  std::size_t cells() const { return models * languages * tasks * prompts * turns * temps; }
};

Layout layout_of(const SynthSpec& spec) {
  return {spec.models.size(),
          spec.languages.size(),
          spec.tasks.size(),
          std::max<std::size_t>(spec.prompt_types.size(), 1),
          spec.turn_ramp ? static_cast<std::size_t>(spec.turn_ramp->n_turns) : 1,
          std::max<std::size_t>(spec.temperature_levels.size(), 1)};
}

Cell decompose(std::size_t c, const Layout& l) {
  Cell cell;
  cell.model = c % l.models;
  c /= l.models;
  cell.language = c % l.languages;
  c /= l.languages;
  cell.task = c % l.tasks;
  c /= l.tasks;
  cell.prompt = c % l.prompts;
  c /= l.prompts;
  cell.turn = c % l.turns;
  c /= l.turns;
  cell.temp = c;
  return cell;
}

std::size_t cell_size(const SynthSpec& spec, std::size_t c, std::size_t cells) {
  return spec.n_responses / cells + (c < spec.n_responses % cells ? 1 : 0);
}

std::optional<std::string> prompt_of(const SynthSpec& spec, const Cell& cell) {
  if (spec.prompt_types.empty()) return std::nullopt;
  return spec.prompt_types[cell.prompt];
}

std::optional<std::size_t> temp_of(const SynthSpec& spec, const Cell& cell) {
  if (spec.temperature_levels.empty()) return std::nullopt;
  return cell.temp;
}

double cell_probability(const SynthSpec& spec, const Cell& cell, TicCategory cat) {
  return injection_probability(spec, cat, spec.models[cell.model],
                               spec.languages[cell.language], spec.tasks[cell.task],
                               prompt_of(spec, cell), static_cast<int>(cell.turn) + 1,
                               temp_of(spec, cell));
}

InjectionMap parse_injection(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError("synth spec: " + where + " must be an object");
  InjectionMap m;
  for (const auto& [k, v] : j.items()) {
    auto cat = parse_category(k);
    if (!cat) throw ValidationError("synth spec: unknown category '" + k + "' in " + where);
    if (!v.is_number()) throw ValidationError("synth spec: " + where + "." + k + " not a number");
    m[*cat] = v.get<double>();
  }
  return m;
}

Language parse_lang(const json& j) {
  if (!j.is_string()) throw ValidationError("synth spec: language must be a string");
  auto lang = parse_language(j.get<std::string>());
  if (!lang) throw ValidationError("synth spec: unknown language '" + j.get<std::string>() + "'");
  return *lang;
}

std::string capitalize(std::string w) {
  if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

SynthSpec parse_spec(std::string_view text);

}  // namespace

const std::vector<std::string>& default_vocabulary(Language language) {
  static const std::vector<std::string> en = {
      "river",    "garden",   "window",  "table",    "paper",    "system",
      "method",   "value",    "result",  "process",  "number",   "design",
      "signal",   "market",   "energy",  "water",    "stone",    "light",
      "sound",    "color",    "metal",   "forest",   "bridge",   "city",
      "road",     "train",    "engine",  "circuit",  "memory",   "language",
      "pattern",  "structure", "surface", "layer",   "field",    "sample",
      "measure",  "record",   "index",   "series",   "factor",   "change",
      "growth",   "motion",   "force",   "weight",   "length",   "volume",
      "pressure", "heat",     "cloud",   "rain",     "season",   "winter",
      "summer",   "animal",   "plant",   "seed",     "root",     "branch",
      "leaf",     "flower",   "fruit",   "grain",    "trade",    "price",
      "cost",     "budget",   "office",  "worker",   "student",  "teacher",
      "school",   "library",  "museum",  "theory",   "proof",    "sketch",
      "draft",    "letter",   "story",   "chapter",  "author",   "reader",
      "music",    "rhythm",   "tone",    "voice",    "camera",   "screen",
      "device",   "sensor",   "battery", "cable",    "module",   "server",
      "network",  "packet",   "route",   "schedule", "project",  "report",
      "review",   "detail",   "example", "feature",  "option",   "choice",
      "limit",    "border",   "region",  "island",   "coast",    "valley",
      "mountain", "desert",   "harbor",  "village",  "kitchen",  "bottle",
      "basket",   "blanket",  "candle",  "mirror",   "pencil",   "ladder",
  };
  static const std::vector<std::string> zh = {
      "河流", "花园", "窗户", "桌子", "纸张", "系统", "方法", "数值", "结果",
      "过程", "数字", "设计", "信号", "市场", "能源", "石头", "光线", "声音",
      "颜色", "金属", "森林", "桥梁", "城市", "道路", "火车", "引擎", "电路",
      "记忆", "语言", "模式", "结构", "表面", "层次", "领域", "样本", "测量",
      "记录", "指数", "系列", "因素", "变化", "增长", "运动", "力量", "重量",
      "长度", "体积", "压力", "热量", "云朵", "雨水", "季节", "冬天", "夏天",
      "动物", "植物", "种子", "树根", "树枝", "叶子", "花朵", "水果",
  };
  return language == Language::kZh ? zh : en;
}

void SynthSpec::validate() const {
  if (n_responses == 0) throw ValidationError("synth spec: n_responses must be > 0");
  check_unique_nonempty(models, "models");
  check_unique_nonempty(languages, "languages");
  check_unique_nonempty(tasks, "tasks");
  if (!prompt_types.empty()) check_unique_nonempty(prompt_types, "prompt_types");
  for (const auto& [cat, p] : injection) {
    check_prob(p, "injection." + std::string(to_string(cat)));
  }
  for (const auto& prof : profiles) {
    for (const auto& [cat, p] : prof.injection) {
      check_prob(p, "profiles[].injection." + std::string(to_string(cat)));
    }
  }
  if (turn_ramp) {
    if (turn_ramp->n_turns < 2) throw ValidationError("synth spec: turn_ramp.n_turns must be >= 2");
    check_prob(turn_ramp->rate_start, "turn_ramp.rate_start");
    check_prob(turn_ramp->rate_end, "turn_ramp.rate_end");
  }
  if (!temperature_levels.empty()) {
    std::set<double> s(temperature_levels.begin(), temperature_levels.end());
    if (s.size() != temperature_levels.size()) {
      throw ValidationError("synth spec: temperature_levels has duplicates");
    }
  }
  if (!temperature_factors.empty()) {
    if (temperature_factors.size() != temperature_levels.size()) {
      throw ValidationError("synth spec: temperature_factors must match temperature_levels");
    }
    for (double f : temperature_factors) {
      if (!(f >= 0.0) || !std::isfinite(f)) {
        throw ValidationError("synth spec: temperature_factors must be finite and >= 0");
      }
    }
  }
  for (const auto& [lang, words] : base_vocabulary) {
    if (words.size() < 50) {
      throw ValidationError("synth spec: base_vocabulary." + std::string(to_string(lang)) +
                            " needs >= 50 words");
    }
    for (const auto& w : words) {
      if (w.empty() || w.find_first_of(" \t\r\n") != std::string::npos) {
        throw ValidationError("synth spec: vocabulary word '" + w + "' is empty or has whitespace");
      }
    }
  }
  if (words_min == 0 || words_min > words_max) {
    throw ValidationError("synth spec: need 0 < words_min <= words_max");
  }
}

SynthSpec SynthSpec::from_json(std::string_view text) {
  try {
    return parse_spec(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("synth spec: ") + e.what());
  }
}

namespace {

SynthSpec parse_spec(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("synth spec: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("synth spec: top level must be an object");
  SynthSpec s;
  auto strings = [](const json& v, const char* what) {
    if (!v.is_array()) throw ValidationError(std::string("synth spec: ") + what + " must be an array");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) throw ValidationError(std::string("synth spec: ") + what + " holds a non-string");
      out.push_back(e.get<std::string>());
    }
    return out;
  };
  auto numbers = [](const json& v, const char* what) {
    if (!v.is_array()) throw ValidationError(std::string("synth spec: ") + what + " must be an array");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ValidationError(std::string("synth spec: ") + what + " holds a non-number");
      out.push_back(e.get<double>());
    }
    return out;
  };
  auto count = [](const json& v, const char* what) -> std::uint64_t {
    if (!v.is_number_unsigned()) {
      throw ValidationError(std::string("synth spec: ") + what + " must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  };
  for (const auto& [k, v] : j.items()) {
    if (k == "n_responses") {
      s.n_responses = count(v, "n_responses");
    } else if (k == "models") {
      s.models = strings(v, "models");
    } else if (k == "languages") {
      s.languages.clear();
      for (const auto& name : strings(v, "languages")) s.languages.push_back(parse_lang(name));
    } else if (k == "tasks") {
      s.tasks = strings(v, "tasks");
    } else if (k == "prompt_types") {
      s.prompt_types = strings(v, "prompt_types");
    } else if (k == "injection") {
      s.injection = parse_injection(v, "injection");
    } else if (k == "profiles") {
      if (!v.is_array()) throw ValidationError("synth spec: profiles must be an array");
      for (const auto& p : v) {
        if (!p.is_object()) throw ValidationError("synth spec: profile must be an object");
        InjectionProfile prof;
        for (const auto& [pk, pv] : p.items()) {
          if (pk == "model") {
            prof.model = pv.get<std::string>();
          } else if (pk == "language") {
            prof.language = parse_lang(pv);
          } else if (pk == "task") {
            prof.task = pv.get<std::string>();
          } else if (pk == "prompt_type") {
            prof.prompt_type = pv.get<std::string>();
          } else if (pk == "injection") {
            prof.injection = parse_injection(pv, "profiles[].injection");
          } else {
            throw ValidationError("synth spec: unknown profile field '" + pk + "'");
          }
        }
        s.profiles.push_back(std::move(prof));
      }
    } else if (k == "turn_ramp") {
      TurnRamp r;
      for (const auto& [rk, rv] : v.items()) {
        if (rk == "rate_start") {
          r.rate_start = rv.get<double>();
        } else if (rk == "rate_end") {
          r.rate_end = rv.get<double>();
        } else if (rk == "n_turns") {
          r.n_turns = rv.get<int>();
        } else if (rk == "category") {
          auto cat = parse_category(rv.get<std::string>());
          if (!cat) throw ValidationError("synth spec: unknown turn_ramp.category");
          r.category = *cat;
        } else {
          throw ValidationError("synth spec: unknown turn_ramp field '" + rk + "'");
        }
      }
      s.turn_ramp = r;
    } else if (k == "temperature_levels") {
      s.temperature_levels = numbers(v, "temperature_levels");
    } else if (k == "temperature_factors") {
      s.temperature_factors = numbers(v, "temperature_factors");
    } else if (k == "base_vocabulary") {
      if (!v.is_object()) throw ValidationError("synth spec: base_vocabulary must be an object");
      for (const auto& [lk, lv] : v.items()) {
        s.base_vocabulary[parse_lang(lk)] = strings(lv, "base_vocabulary");
      }
    } else if (k == "words_min") {
      s.words_min = count(v, "words_min");
    } else if (k == "words_max") {
      s.words_max = count(v, "words_max");
    } else if (k == "seed") {
      s.seed = count(v, "seed");
    } else if (k == "sampling") {
      const auto mode = v.get<std::string>();
      if (mode == "bernoulli") {
        s.sampling = Sampling::kBernoulli;
      } else if (mode == "stratified") {
        s.sampling = Sampling::kStratified;
      } else {
        throw ValidationError("synth spec: sampling must be bernoulli or stratified");
      }
    } else {
      throw ValidationError("synth spec: unknown field '" + k + "'");
    }
  }
  s.validate();
  return s;
}

}  // namespace

SynthSpec SynthSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read synth spec " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return from_json(ss.str());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

double injection_probability(const SynthSpec& spec, TicCategory category,
                             const std::string& model, Language language,
                             const std::string& task,
                             const std::optional<std::string>& prompt_type, int turn,
                             std::optional<std::size_t> temperature_level) {
  double p = 0.0;
  if (auto it = spec.injection.find(category); it != spec.injection.end()) p = it->second;
  for (const auto& prof : spec.profiles) {
    if (prof.model && *prof.model != model) continue;
    if (prof.language && *prof.language != language) continue;
    if (prof.task && *prof.task != task) continue;
    if (prof.prompt_type && prof.prompt_type != prompt_type) continue;
    if (auto it = prof.injection.find(category); it != prof.injection.end()) p = it->second;
  }
  if (spec.turn_ramp && spec.turn_ramp->category == category) {
    const auto& r = *spec.turn_ramp;
    const double t = static_cast<double>(std::clamp(turn, 1, r.n_turns) - 1) /
                     static_cast<double>(r.n_turns - 1);
    p = r.rate_start + (r.rate_end - r.rate_start) * t;
  }
  if (temperature_level && !spec.temperature_factors.empty()) {
    p = std::min(1.0, p * spec.temperature_factors.at(*temperature_level));
  }
  return p;
}

Corpus generate(const SynthSpec& spec, const TicLexicon& lexicon) {
  spec.validate();
  const Layout lay = layout_of(spec);
  const std::size_t cells = lay.cells();

  // Entries per (language, category), in lexicon order.
  std::map<std::pair<Language, TicCategory>, std::vector<const TicEntry*>> pool;
  for (const auto& e : lexicon.entries()) pool[{e.language, e.category}].push_back(&e);

  std::set<TicCategory> initial_categories;
  for (std::size_t c = 0; c < cells; ++c) {
    const Cell cell = decompose(c, lay);
    const Language lang = spec.languages[cell.language];
    for (TicCategory cat : kAllCategories) {
      if (cell_probability(spec, cell, cat) <= 0.0) continue;
      auto it = pool.find({lang, cat});
      if (it == pool.end()) {
        throw ValidationError("synth: category " + std::string(to_string(cat)) +
                              " has nonzero probability but no " +
                              std::string(to_string(lang)) + " lexicon entry");
      }
      for (const TicEntry* e : it->second) {
        if (e->position_rule == PositionRule::kResponseInitial) initial_categories.insert(cat);
      }
    }
  }
  if (initial_categories.size() > 1) {
    throw ValidationError("synth: at most one category with response-initial entries may be injected");
  }

  Rng rng(spec.seed);
  // Bit k set = inject kAllCategories[k].
  std::vector<std::uint16_t> masks(spec.n_responses, 0);
  if (spec.sampling == Sampling::kStratified) {
    for (std::size_t c = 0; c < cells; ++c) {
      const std::size_t size = cell_size(spec, c, cells);
      const Cell cell = decompose(c, lay);
      std::vector<std::size_t> members(size);
      for (std::size_t j = 0; j < size; ++j) members[j] = c + j * cells;
      for (std::size_t k = 0; k < kAllCategories.size(); ++k) {
        const double p = cell_probability(spec, cell, kAllCategories[k]);
        const auto take = static_cast<std::size_t>(std::llround(p * static_cast<double>(size)));
        // Partial Fisher-Yates: the first `take` slots are a uniform subset.
        for (std::size_t j = 0; j < take; ++j) {
          std::swap(members[j], members[j + rng.below(size - j)]);
          masks[members[j]] |= static_cast<std::uint16_t>(1u << k);
        }
      }
    }
  }

  std::vector<ResponseRecord> records;
  records.reserve(spec.n_responses);
  const int id_width = static_cast<int>(std::to_string(spec.n_responses).size());
  for (std::size_t i = 0; i < spec.n_responses; ++i) {
    const Cell cell = decompose(i % cells, lay);
    ResponseRecord rec;
    char id[48];
    std::snprintf(id, sizeof id, "synth-%0*zu", id_width, i + 1);
    rec.id = id;
    rec.model = spec.models[cell.model];
    rec.language = spec.languages[cell.language];
    rec.task = spec.tasks[cell.task];
    rec.prompt_type = prompt_of(spec, cell);
    rec.turn = static_cast<int>(cell.turn) + 1;
    if (auto t = temp_of(spec, cell)) rec.temperature = spec.temperature_levels[*t];

    if (spec.sampling == Sampling::kBernoulli) {
      // One draw per category whatever the probability keeps the stream
      // aligned across specs that differ only in probabilities.
      for (std::size_t k = 0; k < kAllCategories.size(); ++k) {
        const double u = rng.uniform();
        if (u < cell_probability(spec, cell, kAllCategories[k])) {
          masks[i] |= static_cast<std::uint16_t>(1u << k);
        }
      }
    }

    const bool zh = rec.language == Language::kZh;
    auto vit = spec.base_vocabulary.find(rec.language);
    const auto& vocab = vit != spec.base_vocabulary.end() ? vit->second
                                                          : default_vocabulary(rec.language);
    std::size_t remaining = rng.between(spec.words_min, spec.words_max);
    std::vector<std::vector<std::string>> sentences;
    while (remaining > 0) {
      std::size_t len = std::min(remaining, rng.between(6, 14));
      if (remaining - len < 3) len = remaining;
      std::vector<std::string> s(len);
      for (auto& w : s) w = vocab[rng.below(vocab.size())];
      sentences.push_back(std::move(s));
      remaining -= len;
    }

    std::string initial;
    std::vector<std::vector<std::string>> prefixes(sentences.size());
    std::set<std::pair<std::size_t, std::size_t>> replaced;
    for (std::size_t k = 0; k < kAllCategories.size(); ++k) {
      if (!(masks[i] & (1u << k))) continue;
      const auto& entries = pool.at({rec.language, kAllCategories[k]});
      const TicEntry& e = *entries[rng.below(entries.size())];
      if (e.is_vocabulary_word) {
        for (int attempt = 0; attempt < 8; ++attempt) {
          const std::size_t s = rng.below(sentences.size());
          const std::size_t w = rng.below(sentences[s].size());
          if (replaced.insert({s, w}).second) {
            sentences[s][w] = e.phrase;
            break;
          }
        }
      } else if (e.position_rule == PositionRule::kResponseInitial) {
        initial = e.phrase;
      } else {
        // Sentences after the first, preferring one without a prefix yet.
        const std::size_t lo = sentences.size() >= 2 ? 1 : 0;
        std::vector<std::size_t> free;
        for (std::size_t s = lo; s < sentences.size(); ++s) {
          if (prefixes[s].empty()) free.push_back(s);
        }
        const std::size_t s = free.empty() ? lo + rng.below(sentences.size() - lo)
                                           : free[rng.below(free.size())];
        prefixes[s].push_back(e.phrase);
      }
    }

    std::string text = initial;
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      std::string sentence;
      for (const auto& p : prefixes[s]) {
        sentence += p;
        if (!zh) sentence.push_back(' ');
      }
      for (std::size_t w = 0; w < sentences[s].size(); ++w) {
        if (zh) {
          sentence += sentences[s][w];
        } else {
          if (w > 0) sentence.push_back(' ');
          sentence += (w == 0 && prefixes[s].empty()) ? capitalize(sentences[s][w])
                                                      : sentences[s][w];
        }
      }
      sentence += zh ? "。" : ".";
      if (!text.empty() && !zh) text.push_back(' ');
      text += sentence;
    }
    rec.text = std::move(text);
    records.push_back(std::move(rec));
  }
  return Corpus(std::move(records), "synth:seed=" + std::to_string(spec.seed));
}

ExpectedMetrics expected_metrics(const SynthSpec& spec) {
  spec.validate();
  const Layout lay = layout_of(spec);
  const std::size_t cells = lay.cells();
  double tic_sum = 0, tic_var = 0, syc_sum = 0, syc_var = 0;
  for (std::size_t c = 0; c < cells; ++c) {
    const auto size = static_cast<double>(cell_size(spec, c, cells));
    if (size == 0) continue;
    const Cell cell = decompose(c, lay);
    double none = 1.0, no_syc = 1.0;
    for (TicCategory cat : kAllCategories) {
      const double p = cell_probability(spec, cell, cat);
      none *= 1.0 - p;
      if (is_sycophancy_category(cat)) no_syc *= 1.0 - p;
    }
    const double q = 1.0 - none, qs = 1.0 - no_syc;
    tic_sum += size * q;
    tic_var += size * q * (1.0 - q);
    syc_sum += size * qs;
    syc_var += size * qs * (1.0 - qs);
  }
  const auto n = static_cast<double>(spec.n_responses);
  ExpectedMetrics m;
  m.tic_rate = {tic_sum / n, 3.0 * std::sqrt(tic_var) / n};
  m.syc_score = {syc_sum / n, 3.0 * std::sqrt(syc_var) / n};
  return m;
}

}  // namespace ticlens
