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

// ticlens: command-line front end. Exit codes: 0 success, 1 validation
// error, 2 I/O error, 3 internal invariant violation.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "ticlens/analysis.h"
#include "ticlens/corpus.h"
#include "ticlens/error.h"
#include "ticlens/lexicon.h"
#include "ticlens/ngram.h"
#include "ticlens/report.h"
#include "ticlens/semcluster.h"
#include "ticlens/synth.h"
#include "ticlens/tokenize.h"
#include "ticlens/vti.h"

namespace fs = std::filesystem;
using namespace ticlens;

namespace {

struct Globals {
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
};

struct Inputs {
  std::string corpus;
  std::string lexicon;
  std::string seg_lexicon;
};

struct ScoreArgs {
  std::string weights = "0.3,0.2,0.3,0.2";
  std::string group_by = "model";
  std::string averaging = "corpus";
  std::size_t window = kDefaultMattrWindow;
  std::size_t min_n = 20;
};

struct ClusterArgs {
  std::string embeddings;
  std::string remote;
  double threshold = 0.85;
  std::size_t batch_size = 64;
};

ReportFormat format_of(const Globals& g) {
  auto f = parse_report_format(g.format);
  if (!f) throw ValidationError("unknown --format '" + g.format + "'");
  return *f;
}

// Writes to stdout without --out, into <dir>/<kind>.<ext> when --out names a
// directory, and to the given file otherwise.
void output(const ReportTable& table, const RunManifest& manifest, const Globals& g) {
  const ReportFormat f = format_of(g);
  if (g.out.empty()) {
    std::cout << render(table, manifest, f);
    return;
  }
  fs::path path(g.out);
  if (fs::is_directory(path) || g.out.back() == '/') {
    fs::create_directories(path);
    path /= table.kind + "." + std::string(file_extension(f));
  }
  emit_report(table, manifest, f, path);
  std::cerr << "wrote " << path.string() << "\n";
}

Corpus load_checked(const std::string& path) {
  CorpusLoad load = load_corpus(path);
  if (!load.rejects.empty()) {
    std::cerr << path << ": " << load.rejects.size() << " rejected line(s)\n"
              << format_rejects(load.rejects);
  }
  if (load.corpus.empty()) throw ValidationError(path + ": no valid records");
  return std::move(load.corpus);
}

std::unique_ptr<SegmentationLexicon> load_seg(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_unique<SegmentationLexicon>(SegmentationLexicon::load(path));
}

Averaging parse_averaging(const std::string& s) {
  if (s == "corpus") return Averaging::kCorpus;
  if (s == "response") return Averaging::kPerResponse;
  throw ValidationError("--averaging must be corpus or response");
}

std::unique_ptr<EmbeddingProvider> make_provider(const ClusterArgs& a) {
  if (!a.embeddings.empty() && !a.remote.empty()) {
    throw ValidationError("--embeddings and --remote are mutually exclusive");
  }
  if (!a.embeddings.empty()) {
    return std::make_unique<StaticEmbeddingProvider>(StaticEmbeddingProvider::load(a.embeddings));
  }
  if (!a.remote.empty()) {
    RemoteProviderOptions o;
    o.url = a.remote;
    return std::make_unique<RemoteEmbeddingProvider>(o);
  }
  return std::make_unique<LocalTrigramProvider>();
}

ClusterOptions cluster_options(const ClusterArgs& a, const Globals& g) {
  ClusterOptions o;
  o.threshold = a.threshold;
  o.batch_size = a.batch_size;
  o.threads = g.threads;
  return o;
}

RunManifest manifest_for(const Inputs& in, const TicLexicon* lexicon, const std::string& weights,
                         std::vector<std::pair<std::string, std::string>> flags) {
  RunManifest m = make_manifest(std::move(flags));
  if (!in.corpus.empty()) {
    m.corpus_path = in.corpus;
    m.corpus_hash = file_content_hash(in.corpus);
  }
  if (lexicon) m.lexicon_hash = lexicon->content_hash();
  m.weights = weights;
  return m;
}

void add_inputs(CLI::App* cmd, Inputs& in, bool lexicon) {
  cmd->add_option("--corpus", in.corpus, "Response corpus (JSONL)")->required();
  if (lexicon) cmd->add_option("--lexicon", in.lexicon, "Tic lexicon (JSON)")->required();
  cmd->add_option("--seg-lexicon", in.seg_lexicon, "Chinese segmentation word list");
}

void add_score_options(CLI::App* cmd, ScoreArgs& s) {
  cmd->add_option("--weights", s.weights, "VTI weights alpha,beta,gamma,delta");
  cmd->add_option("--group-by", s.group_by,
                  "Comma-separated fields: model,language,task,prompt_type,turn,temperature");
  cmd->add_option("--averaging", s.averaging, "corpus (pooled) or response (per-response mean)");
  cmd->add_option("--window", s.window, "MATTR window");
  cmd->add_option("--min-n", s.min_n, "Groups below this size are flagged low_confidence");
}

void add_cluster_options(CLI::App* cmd, ClusterArgs& c) {
  cmd->add_option("--embeddings", c.embeddings, "Static embedding table (JSON phrase -> vector)");
  cmd->add_option("--remote", c.remote, "Embedding service base URL (POST /embed)");
  cmd->add_option("--threshold", c.threshold, "Cosine threshold");
  cmd->add_option("--batch-size", c.batch_size, "Phrases per embedding request");
}

AggregateOptions aggregate_options(const ScoreArgs& s, const Globals& g,
                                   const SegmentationLexicon* seg, const RunManifest& m) {
  AggregateOptions o;
  o.weights = VtiWeights::parse(s.weights);
  o.min_n = s.min_n;
  o.metrics.window = s.window;
  o.metrics.averaging = parse_averaging(s.averaging);
  o.seg_lexicon = seg;
  o.threads = g.threads;
  o.provenance.corpus_path = m.corpus_path;
  o.provenance.corpus_hash = m.corpus_hash;
  o.provenance.lexicon_hash = m.lexicon_hash;
  return o;
}

int run(int argc, char** argv) {
  CLI::App app{"ticlens: verbal tic detection and Verbal Tic Index analytics"};
  app.set_version_flag("--version", TICLENS_VERSION_STRING);
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Random seed (overrides the synth spec seed)");
  app.add_option("--out", g.out, "Output file or directory (default: stdout)");
  app.add_option("--format", g.format, "json, csv or md")
      ->check(CLI::IsMember({"json", "csv", "md"}));

  Inputs in;
  ScoreArgs score;
  ClusterArgs clus;

  auto* scan = app.add_subcommand("scan", "List every tic match");
  add_inputs(scan, in, true);

  std::string ref_corpus, lang = "en", orders = "1..4";
  std::uint64_t min_count = 5;
  double min_ratio = 5.0;
  auto* ngram = app.add_subcommand("ngram", "Over-represented n-grams against a reference corpus");
  ngram->add_option("--model-corpus,--corpus", in.corpus, "Model corpus (JSONL)")->required();
  ngram->add_option("--ref-corpus", ref_corpus, "Reference corpus (JSONL)")->required();
  ngram->add_option("--lang", lang, "en or zh");
  ngram->add_option("--n", orders, "Orders, e.g. 1..4 or 2");
  ngram->add_option("--min-count", min_count, "Minimum model count");
  ngram->add_option("--min-ratio", min_ratio, "Minimum rate ratio");
  ngram->add_option("--seg-lexicon", in.seg_lexicon, "Chinese segmentation word list");

  auto* cluster = app.add_subcommand("cluster", "Cluster matched tic phrases by embedding");
  add_inputs(cluster, in, true);
  add_cluster_options(cluster, clus);

  auto* scorecmd = app.add_subcommand("score", "VTI and components per group (default: model)");
  add_inputs(scorecmd, in, true);
  add_score_options(scorecmd, score);

  std::string annotations, dimension = "naturalness", grid = "0.1,0.2,0.3,0.4";
  bool invert = false, no_unit_sum = false;
  auto* calibrate = app.add_subcommand("calibrate", "Grid-search VTI weights against ratings");
  add_inputs(calibrate, in, true);
  calibrate->add_option("--annotations", annotations, "Annotation file (JSONL)")->required();
  calibrate->add_option("--dimension", dimension, "Annotation dimension");
  calibrate->add_flag("--invert", invert, "Use 6 - score (e.g. for naturalness)");
  calibrate->add_option("--grid", grid, "Comma-separated grid values");
  calibrate->add_flag("--no-unit-sum", no_unit_sum, "Enumerate the full grid^4");
  calibrate->add_option("--window", score.window, "MATTR window");

  std::string view = "table", model;
  bool do_cluster = false;
  auto* analyze = app.add_subcommand("analyze", "Grouped analyses");
  add_inputs(analyze, in, true);
  add_score_options(analyze, score);
  analyze->add_option("--view", view, "table, turns, temperature or cross-lingual")
      ->check(CLI::IsMember({"table", "turns", "temperature", "cross-lingual"}));
  analyze->add_option("--model", model, "Model filter for --view turns");
  analyze->add_flag("--cluster", do_cluster, "Cluster tic phrases before computing RepRate");
  add_cluster_options(analyze, clus);

  std::string level = "interval";
  auto* agreement = app.add_subcommand("agreement", "Krippendorff's alpha over annotations");
  agreement->add_option("--annotations", annotations, "Annotation file (JSONL)")->required();
  agreement->add_option("--dimension", dimension, "Annotation dimension");
  agreement->add_option("--level", level, "interval or ordinal")
      ->check(CLI::IsMember({"interval", "ordinal"}));

  std::string spec_path;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted tics");
  synth->add_option("--spec", spec_path, "Synth spec (JSON)")->required();
  synth->add_option("--lexicon", in.lexicon, "Tic lexicon (JSON)")->required();

  std::string input;
  auto* report = app.add_subcommand("report", "Re-render a saved JSON report");
  report->add_option("--input", input, "JSON report")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::vector<std::pair<std::string, std::string>> base_flags = {
      {"format", g.format}};
  auto flags_with = [&](std::vector<std::pair<std::string, std::string>> extra) {
    auto f = base_flags;
    f.insert(f.end(), extra.begin(), extra.end());
    return f;
  };

  if (*synth) {
    SynthSpec spec = SynthSpec::load(spec_path);
    if (g.seed) spec.seed = *g.seed;
    const TicLexicon lexicon = TicLexicon::load(in.lexicon);
    const Corpus corpus = generate(spec, lexicon);
    if (g.out.empty()) {
      write_corpus(corpus, std::cout);
    } else {
      save_corpus(corpus, g.out);
      std::cerr << "wrote " << corpus.size() << " records to " << g.out << "\n";
    }
    return 0;
  }

  if (*report) {
    std::ifstream f(input, std::ios::binary);
    if (!f) throw IoError("cannot read " + input);
    std::stringstream ss;
    ss << f.rdbuf();
    auto [table, manifest] = parse_report_json(ss.str());
    manifest.timestamp = make_manifest().timestamp;
    output(table, manifest, g);
    return 0;
  }

  if (*agreement) {
    const auto dim = parse_dimension(dimension);
    if (!dim) throw ValidationError("unknown --dimension '" + dimension + "'");
    const auto anns = load_annotations(annotations);
    const auto matrix = RatingsMatrix::from_annotations(anns, *dim);
    const AgreementLevel lv = *parse_agreement_level(level);
    ReportTable t;
    t.kind = "agreement";
    t.columns = {"dimension", "level", "alpha", "raters", "items"};
    t.rows.push_back({dimension, level, krippendorff_alpha(matrix, lv),
                      static_cast<std::int64_t>(matrix.raters()),
                      static_cast<std::int64_t>(matrix.items())});
    Inputs none;
    output(t, manifest_for(none, nullptr, "", flags_with({{"annotations", annotations}})), g);
    return 0;
  }

  if (*ngram) {
    const auto language = parse_language(lang);
    if (!language) throw ValidationError("unknown --lang '" + lang + "'");
    OverrepOptions o;
    o.min_count = min_count;
    o.min_ratio = min_ratio;
    const auto dots = orders.find("..");
    try {
      o.min_n = std::stoi(orders.substr(0, dots));
      o.max_n = dots == std::string::npos ? o.min_n : std::stoi(orders.substr(dots + 2));
    } catch (const std::exception&) {
      throw ValidationError("bad --n '" + orders + "'");
    }
    if (o.min_n < 1 || o.max_n > kMaxNgramOrder || o.min_n > o.max_n) {
      throw ValidationError("--n must lie within 1..4");
    }
    const auto seg = load_seg(in.seg_lexicon);
    const Corpus model_corpus = load_checked(in.corpus);
    const Corpus ref = load_checked(ref_corpus);
    const auto ms = build_ngram_stats(model_corpus, *language, seg.get(), g.threads);
    const auto rs = build_ngram_stats(ref, *language, seg.get(), g.threads);
    auto m = manifest_for(in, nullptr, "",
                          flags_with({{"ref_corpus", ref_corpus},
                                      {"ref_corpus_hash", file_content_hash(ref_corpus)},
                                      {"lang", lang},
                                      {"n", orders},
                                      {"min_count", std::to_string(min_count)},
                                      {"min_ratio", format_real(min_ratio)}}));
    output(to_report(overrepresented_ngrams(ms, rs, o)), m, g);
    return 0;
  }

  // Everything below scans a corpus with a lexicon.
  const auto seg = load_seg(in.seg_lexicon);
  const TicLexicon lexicon = TicLexicon::load(in.lexicon);
  const MatcherSet matchers(lexicon);
  const Corpus corpus = load_checked(in.corpus);

  if (*scan) {
    const auto scans = scan_corpus(corpus, matchers, seg.get(), g.threads);
    output(scan_report(corpus, scans), manifest_for(in, &lexicon, "", flags_with({})), g);
    return 0;
  }

  if (*cluster) {
    auto scans = scan_corpus(corpus, matchers, seg.get(), g.threads);
    auto provider = make_provider(clus);
    const auto clusters = assign_clusters(corpus, scans, *provider, cluster_options(clus, g));
    auto m = manifest_for(in, &lexicon, "",
                          flags_with({{"provider", provider->name()},
                                      {"threshold", format_real(clus.threshold)}}));
    output(to_report(clusters), m, g);
    return 0;
  }

  if (*calibrate) {
    const auto dim = parse_dimension(dimension);
    if (!dim) throw ValidationError("unknown --dimension '" + dimension + "'");
    std::vector<double> grid_values;
    {
      std::stringstream ss(grid);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          grid_values.push_back(std::stod(item));
        } catch (const std::exception&) {
          throw ValidationError("bad --grid value '" + item + "'");
        }
      }
    }
    const auto scores = mean_scores(load_annotations(annotations), *dim, invert);
    const auto scans = scan_corpus(corpus, matchers, seg.get(), g.threads);
    MetricOptions mo;
    mo.window = score.window;
    const auto set = calibration_items(corpus, scans, scores, mo, seg.get());
    if (set.unmatched_scores > 0) {
      std::cerr << set.unmatched_scores << " annotated response id(s) not in the corpus\n";
    }
    const auto result = calibrate_weights(set.items, grid_values, !no_unit_sum, g.threads);
    auto m = manifest_for(in, &lexicon, result.weights.to_string(),
                          flags_with({{"annotations", annotations},
                                      {"dimension", dimension},
                                      {"invert", invert ? "true" : "false"},
                                      {"grid", grid},
                                      {"unit_sum", no_unit_sum ? "false" : "true"},
                                      {"items", std::to_string(set.items.size())}}));
    output(to_report(result), m, g);
    return 0;
  }

  // score / analyze
  const bool is_analyze = static_cast<bool>(*analyze);
  const auto flags = flags_with({{"group_by", score.group_by},
                                 {"averaging", score.averaging},
                                 {"window", std::to_string(score.window)},
                                 {"min_n", std::to_string(score.min_n)},
                                 {"view", is_analyze ? view : "table"},
                                 {"model", model},
                                 {"cluster", do_cluster ? "true" : "false"}});
  RunManifest m = manifest_for(in, &lexicon, VtiWeights::parse(score.weights).to_string(), flags);
  const AggregateOptions opts = aggregate_options(score, g, seg.get(), m);
  const auto group_by = parse_group_fields(is_analyze && view == "cross-lingual"
                                               ? std::string("model,language")
                                               : score.group_by);

  if (!is_analyze || view == "table" || view == "cross-lingual") {
    AnalysisTable table;
    if (do_cluster) {
      auto scans = scan_corpus(corpus, matchers, seg.get(), g.threads);
      auto provider = make_provider(clus);
      assign_clusters(corpus, scans, *provider, cluster_options(clus, g));
      table = aggregate(corpus, scans, group_by, opts);
    } else {
      table = scan_and_aggregate(corpus, matchers, group_by, opts);
    }
    if (table.dropped_records > 0) {
      std::cerr << table.dropped_records << " record(s) lack a group-by field and were dropped\n";
    }
    if (view == "cross-lingual" && is_analyze) {
      const auto x = cross_lingual_delta(table);
      for (const auto& name : x.excluded_models) {
        std::cerr << "warning: model " << name << " lacks one language; excluded\n";
      }
      output(to_report(x), m, g);
    } else {
      output(to_report(table), m, g);
    }
    return 0;
  }

  const auto scans = scan_corpus(corpus, matchers, seg.get(), g.threads);
  if (view == "turns") {
    std::optional<std::string> filter;
    if (!model.empty()) filter = model;
    output(to_report(turn_accumulation(corpus, scans, filter)), m, g);
  } else {
    output(to_report(temperature_profile(corpus, scans)), m, g);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
