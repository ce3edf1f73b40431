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

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <set>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "test_util.h"
#include "ticlens/text.h"

namespace ticlens {
namespace {

using testing::Gen;

EmbeddingVector vec(std::vector<double> v) { return EmbeddingVector::from_raw(std::move(v)); }

TEST(Cosine, Examples) {
  EXPECT_NEAR(cosine(vec({0.6, 0.8}), vec({0.6, 0.8})), 1.0, 1e-12);
  EXPECT_NEAR(cosine(vec({1, 0}), vec({0, 1})), 0.0, 1e-12);
  EXPECT_NEAR(cosine(vec({1, 1}), vec({1, 0})), std::sqrt(0.5), 1e-9);
}

TEST(Cosine, Errors) {
  EXPECT_THROW(cosine(vec({1, 0}), vec({1, 0, 0})), ValidationError);
  EXPECT_THROW(cosine(vec({0, 0}), vec({1, 0})), ValidationError);
  EXPECT_FALSE(vec({0, 0}).valid());
  EXPECT_DOUBLE_EQ(vec({3, 4}).norm(), 5.0);
}

TEST(EmbedLocal, DeterministicAndNormalized) {
  const std::vector<std::string> in = {"abc", "abc", "to be fair", "我理解你的担忧"};
  const auto out = embed_local(in);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[0], out[1]);
  for (const auto& v : out) {
    EXPECT_EQ(v.dimension(), 256u);
    double n = 0;
    for (double x : v.values()) n += x * x;
    EXPECT_NEAR(std::sqrt(n), 1.0, 1e-9);
  }
  const std::vector<std::string> bad = {"ok", ""};
  EXPECT_THROW(embed_local(bad), ValidationError);
}

// Oracle: bucket set of a string, computed from the trigram hashing rule.
std::set<std::size_t> buckets(const std::string& s) {
  std::vector<std::string> cps = {"\x02"};
  for (std::size_t pos = 0; pos < s.size();) {
    std::size_t len = 0;
    text::decode_utf8(s, pos, &len);
    cps.push_back(s.substr(pos, len));
    pos += len;
  }
  cps.push_back("\x03");
  std::set<std::size_t> out;
  for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
    out.insert(text::fnv1a64(cps[i] + cps[i + 1] + cps[i + 2]) % 256);
  }
  return out;
}

TEST(EmbedLocal, DisjointTrigramBucketsGiveCosineZero) {
  // Search a small space for a pair with disjoint bucket sets.
  const std::string base = "xyz";
  const auto b0 = buckets(base);
  std::string other;
  for (char a = 'a'; a <= 'w' && other.empty(); ++a) {
    for (char b = 'a'; b <= 'w' && other.empty(); ++b) {
      const std::string cand = {a, b, 'q'};
      const auto b1 = buckets(cand);
      bool disjoint = true;
      for (auto x : b1) disjoint = disjoint && !b0.contains(x);
      if (disjoint) other = cand;
    }
  }
  ASSERT_FALSE(other.empty());
  const std::vector<std::string> in = {base, other};
  const auto v = embed_local(in);
  EXPECT_NEAR(cosine(v[0], v[1]), 0.0, 1e-12);
}

TEST(ClusterTics, DuplicatesCollapse) {
  LocalTrigramProvider p;
  const auto c = cluster_tics({"x", "x"}, p);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].member_phrases, std::vector<std::string>{"x"});
}

TEST(ClusterTics, OrthogonalVectorsSplit) {
  StaticEmbeddingProvider p({{"a", {1, 0}}, {"b", {0, 1}}});
  const auto c = cluster_tics({"b", "a"}, p);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].member_phrases[0], "a");
  EXPECT_EQ(c[1].id, 1);
}

TEST(ClusterTics, PairwisePointNineMergesThree) {
  // Cholesky factor of the Gram matrix with 0.9 off the diagonal.
  const double y = 0.09 / std::sqrt(0.19);
  const double z = std::sqrt(1 - 0.81 - y * y);
  StaticEmbeddingProvider p({{"a", {1, 0, 0}}, {"b", {0.9, std::sqrt(0.19), 0}}, {"c", {0.9, y, z}}});
  const auto va = vec({1, 0, 0}), vb = vec({0.9, std::sqrt(0.19), 0}), vc = vec({0.9, y, z});
  EXPECT_NEAR(cosine(va, vb), 0.9, 1e-12);
  EXPECT_NEAR(cosine(va, vc), 0.9, 1e-12);
  EXPECT_NEAR(cosine(vb, vc), 0.9, 1e-12);
  const auto c = cluster_tics({"a", "b", "c"}, p);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].member_phrases, (std::vector<std::string>{"a", "b", "c"}));
  // Greedy trace: b meets a at 0.9; c meets centroid(a,b) at 1.8 / |a+b|.
  EXPECT_NEAR(c[0].assignment_cosines[1], 0.9, 1e-12);
  EXPECT_NEAR(c[0].assignment_cosines[2], 1.8 / std::sqrt(3.8), 1e-12);
}

TEST(ClusterTics, RejectsBadThreshold) {
  LocalTrigramProvider p;
  EXPECT_THROW(cluster_tics({"a"}, p, {.threshold = 1.0}), ValidationError);
  EXPECT_THROW(cluster_tics({"a"}, p, {.threshold = 0.0}), ValidationError);
}

std::map<std::string, std::vector<double>> random_table(Gen& g, std::size_t n, std::size_t dim,
                                                        bool positive) {
  std::map<std::string, std::vector<double>> t;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (auto& x : v) x = positive ? 0.05 + g.unit() : g.unit() - 0.5;
    t["p" + std::to_string(1000 + i)] = v;
  }
  return t;
}

TEST(ClusterProperty, ReplayMatchesGreedyOracleAndAssignmentsAreSound) {
  Gen g(7);
  for (int round = 0; round < 300; ++round) {
    const double threshold = 0.05 + 0.9 * g.unit();
    const auto table = random_table(g, 2 + g.below(25), 2 + g.below(4), false);
    StaticEmbeddingProvider p(table);
    std::vector<std::string> phrases;
    for (const auto& [k, v] : table) phrases.push_back(k);
    const auto clusters = cluster_tics(phrases, p, {.threshold = threshold, .batch_size = 4});

    // Oracle replay over raw arithmetic.
    struct C {
      std::vector<double> sum;
      std::vector<std::string> members;
    };
    auto unit = [](std::vector<double> v) {
      double n = 0;
      for (double x : v) n += x * x;
      for (double& x : v) x /= std::sqrt(n);
      return v;
    };
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
      double s = 0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
      return s;
    };
    std::vector<C> expect;
    for (const auto& [k, raw] : table) {
      const auto u = unit(raw);
      int best = -1;
      double best_cos = -2;
      for (std::size_t i = 0; i < expect.size(); ++i) {
        const double c = dot(unit(expect[i].sum), u);
        if (c > best_cos) best_cos = c, best = static_cast<int>(i);
      }
      if (best >= 0 && best_cos >= threshold) {
        for (std::size_t d = 0; d < u.size(); ++d) expect[best].sum[d] += u[d];
        expect[best].members.push_back(k);
      } else {
        expect.push_back({u, {k}});
      }
    }
    ASSERT_EQ(clusters.size(), expect.size());
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      EXPECT_EQ(clusters[i].id, static_cast<int>(i));
      EXPECT_EQ(clusters[i].member_phrases, expect[i].members);
      for (std::size_t m = 1; m < clusters[i].assignment_cosines.size(); ++m) {
        ASSERT_GE(clusters[i].assignment_cosines[m], threshold);
      }
    }
  }
}

TEST(ClusterProperty, LowThresholdWithPositiveCosinesGivesOneCluster) {
  Gen g(8);
  for (int round = 0; round < 200; ++round) {
    std::vector<std::string> phrases;
    const auto table = random_table(g, 2 + g.below(20), 3, true);
    StaticEmbeddingProvider q(table);
    for (const auto& [k, v] : table) phrases.push_back(k);
    EXPECT_EQ(cluster_tics(phrases, q, {.threshold = 1e-6}).size(), 1u);
    // Near-identical only at a threshold just under 1.
    EXPECT_EQ(cluster_tics(phrases, q, {.threshold = 1 - 1e-12}).size(), phrases.size());
  }
}

TEST(ClusterProperty, ThreadsAndBatchSizeDoNotChangeClusters) {
  std::vector<std::string> phrases;
  Gen g(9);
  const std::vector<std::string> words = {"great", "question", "absolutely", "fair", "note",
                                          "important", "indeed", "truly"};
  for (int i = 0; i < 150; ++i) {
    phrases.push_back(g.pick(words) + " " + g.pick(words) + (g.coin() ? "!" : ""));
  }
  LocalTrigramProvider p;
  const auto a = cluster_tics(phrases, p, {.threshold = 0.6, .batch_size = 64, .threads = 1});
  const auto b = cluster_tics(phrases, p, {.threshold = 0.6, .batch_size = 7, .threads = 4});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].member_phrases, b[i].member_phrases);
    EXPECT_EQ(a[i].centroid, b[i].centroid);
  }
  EXPECT_EQ(cluster_index(a), cluster_index(b));
}

TEST(StaticProvider, MissingPhraseAndBadTable) {
  StaticEmbeddingProvider p({{"a", {1, 0}}});
  const std::vector<std::string> in = {"b"};
  EXPECT_THROW(p.embed(in), ValidationError);
  EXPECT_THROW(StaticEmbeddingProvider({{"a", {1, 0}}, {"b", {1}}}), ValidationError);
  testing::TempDir dir;
  const auto f = dir.file("e.json", R"({"a": [1, 0], "b": [0, 1]})");
  auto loaded = StaticEmbeddingProvider::load(f.string());
  EXPECT_EQ(loaded.dimension(), 2u);
  EXPECT_THROW(StaticEmbeddingProvider::load(dir.file("bad.json", "[1]").string()), ValidationError);
}

// Local /embed server: fails the first `fail_first` requests with 503 and
// returns a malformed body for batches containing "bad".
class FakeEmbedServer {
 public:
  explicit FakeEmbedServer(int fail_first) : fail_first_(fail_first) {
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      if (fail_first_-- > 0) {
        res.status = 503;
        return;
      }
      const auto body = nlohmann::json::parse(req.body);
      nlohmann::json vectors = nlohmann::json::array();
      for (const auto& t : body["texts"]) {
        const auto s = t.get<std::string>();
        if (s.find("bad") != std::string::npos) {
          res.set_content("{\"vectors\": \"nope\"}", "application/json");
          return;
        }
        vectors.push_back({static_cast<double>(s.size()), 1.0});
      }
      res.set_content(nlohmann::json{{"vectors", vectors}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEmbedServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int requests() const { return requests_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> fail_first_;
  std::atomic<int> requests_{0};
};

RemoteProviderOptions remote_options(const std::string& url) {
  RemoteProviderOptions o;
  o.url = url;
  o.timeout = std::chrono::milliseconds(5000);
  o.initial_backoff = std::chrono::milliseconds(1);
  return o;
}

TEST(RemoteProvider, RetriesTransientFailures) {
  FakeEmbedServer server(2);
  RemoteEmbeddingProvider p(remote_options(server.url()));
  const std::vector<std::string> in = {"aa", "bbbb"};
  const auto out = p.embed(in);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].dimension(), 2u);
  EXPECT_EQ(server.requests(), 3);
}

TEST(RemoteProvider, GivesUpAfterRetries) {
  FakeEmbedServer server(100);
  RemoteEmbeddingProvider p(remote_options(server.url()));
  const std::vector<std::string> in = {"aa"};
  EXPECT_THROW(p.embed(in), IoError);
  EXPECT_EQ(server.requests(), 4);
}

TEST(RemoteProvider, MalformedBodyFailsWithBatchIndex) {
  FakeEmbedServer server(0);
  RemoteEmbeddingProvider p(remote_options(server.url()));
  // Sorted: a1 a2 | a3 bad | ... with batch size 2 the bad phrase is in batch 1.
  try {
    cluster_tics({"a1", "a2", "a3", "bad"}, p, {.threshold = 0.5, .batch_size = 2});
    FAIL() << "expected ProviderError";
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.batch_index(), 1u);
  }
  EXPECT_EQ(server.requests(), 2);
}

TEST(RemoteProvider, DimensionMismatchRejected) {
  FakeEmbedServer server(0);
  auto o = remote_options(server.url());
  o.dimension = 3;
  RemoteEmbeddingProvider p(o);
  const std::vector<std::string> in = {"aa"};
  EXPECT_THROW(p.embed(in), std::exception);
}

}  // namespace
}  // namespace ticlens
