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

#include "ticlens/semcluster.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "parallel.h"
#include "ticlens/text.h"

namespace ticlens {

using nlohmann::json;

EmbeddingVector EmbeddingVector::from_raw(std::vector<double> values) {
  EmbeddingVector v;
  double sq = 0.0;
  for (double x : values) sq += x * x;
  v.norm_ = std::sqrt(sq);
  if (v.norm_ > 0.0) {
    for (double& x : values) x /= v.norm_;
  }
  v.values_ = std::move(values);
  return v;
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dimension() != v.dimension()) {
    throw ValidationError("cosine: dimension mismatch (" +
                          std::to_string(u.dimension()) + " vs " +
                          std::to_string(v.dimension()) + ")");
  }
  if (!u.valid() || !v.valid()) throw ValidationError("cosine: zero vector");
  double dot = 0.0;
  for (std::size_t i = 0; i < u.dimension(); ++i) {
    dot += u.values()[i] * v.values()[i];
  }
  return std::clamp(dot, -1.0, 1.0);
}

std::vector<EmbeddingVector> embed_local(std::span<const std::string> phrases) {
  std::vector<EmbeddingVector> out;
  out.reserve(phrases.size());
  for (const auto& phrase : phrases) {
    if (phrase.empty()) throw ValidationError("embed_local: empty phrase");
    std::vector<std::string> cps;
    cps.emplace_back("\x02");
    for (std::size_t pos = 0; pos < phrase.size();) {
      std::size_t len = 0;
      text::decode_utf8(phrase, pos, &len);
      cps.emplace_back(phrase.substr(pos, len));
      pos += len;
    }
    cps.emplace_back("\x03");
    std::vector<double> raw(LocalTrigramProvider::kDimension, 0.0);
    for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
      const std::uint64_t h = text::fnv1a64(cps[i] + cps[i + 1] + cps[i + 2]);
      const double sign = ((h >> 8) & 1) ? -1.0 : 1.0;
      raw[h % LocalTrigramProvider::kDimension] += sign;
    }
    out.push_back(EmbeddingVector::from_raw(std::move(raw)));
  }
  return out;
}

std::vector<EmbeddingVector> LocalTrigramProvider::embed(
    std::span<const std::string> texts) {
  return embed_local(texts);
}

StaticEmbeddingProvider::StaticEmbeddingProvider(
    std::map<std::string, std::vector<double>> table)
    : table_(std::move(table)) {
  for (const auto& [phrase, vec] : table_) {
    if (dimension_ == 0) dimension_ = vec.size();
    if (vec.size() != dimension_ || vec.empty()) {
      throw ValidationError("static embeddings: vector for \"" + phrase +
                            "\" has inconsistent dimension");
    }
  }
}

StaticEmbeddingProvider StaticEmbeddingProvider::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding table " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ValidationError(path + ": embedding table must be a JSON object");
  }
  std::map<std::string, std::vector<double>> table;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it->is_array()) {
      throw ValidationError(path + ": value for \"" + it.key() + "\" is not an array");
    }
    std::vector<double> v;
    for (const auto& x : *it) {
      if (!x.is_number()) {
        throw ValidationError(path + ": non-numeric component for \"" + it.key() + "\"");
      }
      v.push_back(x.get<double>());
    }
    table.emplace(it.key(), std::move(v));
  }
  return StaticEmbeddingProvider(std::move(table));
}

std::vector<EmbeddingVector> StaticEmbeddingProvider::embed(
    std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    auto it = table_.find(t);
    if (it == table_.end()) {
      throw ValidationError("static embeddings: no vector for \"" + t + "\"");
    }
    out.push_back(EmbeddingVector::from_raw(it->second));
  }
  return out;
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(RemoteProviderOptions options)
    : options_(std::move(options)) {
  if (options_.url.empty()) throw ValidationError("remote provider: empty URL");
  if (options_.max_retries < 0) {
    throw ValidationError("remote provider: negative retry count");
  }
}

std::vector<EmbeddingVector> RemoteEmbeddingProvider::embed(
    std::span<const std::string> texts) {
  httplib::Client client(options_.url);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
      options_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  const std::string body =
      json{{"texts", std::vector<std::string>(texts.begin(), texts.end())}}.dump();
  std::string last_error;
  auto backoff = options_.initial_backoff;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto res = client.Post("/embed", body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP status " + std::to_string(res->status);
      continue;
    }
    json j = json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("vectors") ||
        !j["vectors"].is_array()) {
      throw IoError("remote provider: malformed response body");
    }
    const auto& vecs = j["vectors"];
    if (vecs.size() != texts.size()) {
      throw IoError("remote provider: expected " + std::to_string(texts.size()) +
                    " vectors, got " + std::to_string(vecs.size()));
    }
    std::vector<EmbeddingVector> out;
    out.reserve(vecs.size());
    for (const auto& v : vecs) {
      if (!v.is_array()) throw IoError("remote provider: vector is not an array");
      std::vector<double> raw;
      raw.reserve(v.size());
      for (const auto& x : v) {
        if (!x.is_number()) throw IoError("remote provider: non-numeric component");
        raw.push_back(x.get<double>());
      }
      if (options_.dimension == 0) options_.dimension = raw.size();
      if (raw.size() != options_.dimension) {
        throw IoError("remote provider: vector dimension " +
                      std::to_string(raw.size()) + ", expected " +
                      std::to_string(options_.dimension));
      }
      out.push_back(EmbeddingVector::from_raw(std::move(raw)));
    }
    return out;
  }
  throw IoError("remote provider: giving up after " +
                std::to_string(options_.max_retries + 1) + " attempts (" +
                last_error + ")");
}

std::vector<TicCluster> cluster_tics(std::vector<std::string> phrases,
                                     EmbeddingProvider& provider,
                                     const ClusterOptions& options) {
  if (!(options.threshold > 0.0 && options.threshold < 1.0)) {
    throw ValidationError("cluster threshold must lie in (0, 1)");
  }
  if (options.batch_size == 0) throw ValidationError("batch size must be > 0");
  std::sort(phrases.begin(), phrases.end());
  phrases.erase(std::unique(phrases.begin(), phrases.end()), phrases.end());
  if (phrases.empty()) return {};

  const std::size_t n_batches =
      (phrases.size() + options.batch_size - 1) / options.batch_size;
  std::vector<std::vector<EmbeddingVector>> batches(n_batches);
  std::vector<std::string> errors(n_batches);
  auto run_batch = [&](std::size_t b) {
    const std::size_t begin = b * options.batch_size;
    const std::size_t count = std::min(options.batch_size, phrases.size() - begin);
    try {
      batches[b] = provider.embed(
          std::span<const std::string>(phrases.data() + begin, count));
      if (batches[b].size() != count) {
        errors[b] = "provider returned " + std::to_string(batches[b].size()) +
                    " vectors for " + std::to_string(count) + " phrases";
      }
    } catch (const std::exception& e) {
      errors[b] = e.what();
    }
  };
  const int threads = provider.concurrent_safe() ? options.threads : 1;
  internal::parallel_chunks(n_batches, threads,
                            [&](std::size_t begin, std::size_t end, std::size_t) {
                              for (std::size_t b = begin; b < end; ++b) run_batch(b);
                            });
  for (std::size_t b = 0; b < n_batches; ++b) {
    if (!errors[b].empty()) throw ProviderError(b, errors[b]);
  }

  std::vector<TicCluster> clusters;
  std::vector<std::vector<double>> sums;
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    const auto& vec = batches[i / options.batch_size][i % options.batch_size];
    if (!vec.valid()) {
      throw ValidationError("embedding for \"" + phrases[i] + "\" is a zero vector");
    }
    int best = -1;
    double best_cos = -2.0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      const double cs = cosine(clusters[c].centroid, vec);
      if (cs > best_cos) {
        best_cos = cs;
        best = static_cast<int>(c);
      }
    }
    if (best >= 0 && best_cos >= options.threshold) {
      auto& cl = clusters[static_cast<std::size_t>(best)];
      auto& sum = sums[static_cast<std::size_t>(best)];
      cl.member_phrases.push_back(phrases[i]);
      cl.assignment_cosines.push_back(best_cos);
      cl.member_vectors.push_back(vec);
      for (std::size_t d = 0; d < sum.size(); ++d) sum[d] += vec.values()[d];
      cl.centroid = EmbeddingVector::from_raw(sum);
    } else {
      TicCluster cl;
      cl.id = static_cast<int>(clusters.size());
      cl.member_phrases.push_back(phrases[i]);
      cl.assignment_cosines.push_back(1.0);
      cl.member_vectors.push_back(vec);
      cl.centroid = vec;
      sums.push_back(vec.values());
      clusters.push_back(std::move(cl));
    }
  }
  return clusters;
}

std::map<std::string, int> cluster_index(const std::vector<TicCluster>& clusters) {
  std::map<std::string, int> out;
  for (const auto& c : clusters) {
    for (const auto& p : c.member_phrases) out.emplace(p, c.id);
  }
  return out;
}

}  // namespace ticlens
