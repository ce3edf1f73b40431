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

#ifndef TICLENS_SEMCLUSTER_H_
#define TICLENS_SEMCLUSTER_H_

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ticlens/error.h"

namespace ticlens {

// L2-normalized embedding. A zero input vector yields an invalid embedding
// that cosine() rejects.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  static EmbeddingVector from_raw(std::vector<double> values);

  const std::vector<double>& values() const { return values_; }
  std::size_t dimension() const { return values_.size(); }
  // Norm of the raw input before normalization.
  double norm() const { return norm_; }
  bool valid() const { return norm_ > 0.0; }

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<double> values_;
  double norm_ = 0.0;
};

// Throws ValidationError on dimension mismatch or an invalid vector.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string name() const = 0;
  // 0 when not known until the first batch.
  virtual std::size_t dimension() const = 0;
  virtual std::vector<EmbeddingVector> embed(
      std::span<const std::string> texts) = 0;
  // Whether embed() may be called from several threads at once.
  virtual bool concurrent_safe() const { return true; }
};

// Character-trigram feature hashing into 256 buckets. Each code point
// trigram of "\x02" + text + "\x03" is hashed with FNV-1a; the bucket is
// hash % 256 and the sign is the parity of hash >> 8.
class LocalTrigramProvider : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDimension = 256;
  std::string name() const override { return "local-trigram-256"; }
  std::size_t dimension() const override { return kDimension; }
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
};

// Throws ValidationError on an empty string.
std::vector<EmbeddingVector> embed_local(std::span<const std::string> phrases);

// Fixed phrase -> vector table, e.g. precomputed embeddings loaded from disk.
class StaticEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit StaticEmbeddingProvider(std::map<std::string, std::vector<double>> table);
  // JSON object {"phrase": [numbers...], ...}.
  static StaticEmbeddingProvider load(const std::string& path);

  std::string name() const override { return "static"; }
  std::size_t dimension() const override { return dimension_; }
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

 private:
  std::map<std::string, std::vector<double>> table_;
  std::size_t dimension_ = 0;
};

struct RemoteProviderOptions {
  std::string url;  // e.g. "http://127.0.0.1:8080"
  std::size_t dimension = 0;  // 0 = take from the first response
  std::chrono::milliseconds timeout{120'000};
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{1'000};  // doubles per retry
};

// POST {url}/embed with {"texts": [...]}; expects {"vectors": [[...], ...]}.
// Transport failures and non-200 statuses are retried with exponential
// backoff; malformed bodies are not.
class RemoteEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit RemoteEmbeddingProvider(RemoteProviderOptions options);

  std::string name() const override { return "remote:" + options_.url; }
  std::size_t dimension() const override { return options_.dimension; }
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
  bool concurrent_safe() const override { return options_.dimension != 0; }

 private:
  RemoteProviderOptions options_;
};

// Raised by cluster_tics when a provider batch fails.
class ProviderError : public IoError {
 public:
  ProviderError(std::size_t batch_index, const std::string& what)
      : IoError("embedding batch " + std::to_string(batch_index) + ": " + what),
        batch_index_(batch_index) {}
  std::size_t batch_index() const { return batch_index_; }

 private:
  std::size_t batch_index_;
};

struct TicCluster {
  int id = 0;
  std::vector<std::string> member_phrases;
  // Cosine with the centroid at the moment each member joined; 1 for the
  // founder.
  std::vector<double> assignment_cosines;
  std::vector<EmbeddingVector> member_vectors;
  EmbeddingVector centroid;
};

struct ClusterOptions {
  double threshold = 0.85;
  std::size_t batch_size = 64;
  int threads = 1;
};

// Greedy single-pass centroid clustering. Phrases are deduplicated and
// sorted first; each joins the cluster whose centroid is most similar when
// that cosine is >= threshold, otherwise founds a new cluster. Centroids are
// the normalized mean of member vectors.
std::vector<TicCluster> cluster_tics(std::vector<std::string> phrases,
                                     EmbeddingProvider& provider,
                                     const ClusterOptions& options = {});

// phrase -> cluster id.
std::map<std::string, int> cluster_index(const std::vector<TicCluster>& clusters);

}  // namespace ticlens

#endif  // TICLENS_SEMCLUSTER_H_
