// Copyright 2026 The Geolink Authors.
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

#include "geolink/embedding.hpp"

#include <cstdlib>
#include <random>
#include <sstream>
#include <thread>

#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "geolink/service_client.hpp"

namespace geolink {
namespace {

Embedding vec(std::initializer_list<double> values) {
  Embedding v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

TEST(CosineSimilarityTest, AnalyticValues) {
  const Embedding v = vec({0.3, -1.2, 4.0});
  EXPECT_NEAR(cosine_similarity(v, v), 1.0, 1e-12);
  EXPECT_EQ(cosine_similarity(vec({1, 0}), vec({0, 1})), 0.0);
  EXPECT_NEAR(cosine_similarity(vec({1, 0}), vec({1, 1}) / std::sqrt(2.0)),
              std::sqrt(2.0) / 2.0, 1e-9);
}

TEST(CosineSimilarityTest, WorksOnExpressionsAndFloat) {
  Eigen::VectorXf a(2), b(2);
  a << 1.0f, 0.0f;
  b << 1.0f, 1.0f;
  EXPECT_NEAR(cosine_similarity(a, b), std::sqrt(0.5f), 1e-6f);
  EXPECT_NEAR(cosine_similarity(2.0 * vec({1, 2}), vec({1, 2}) + vec({0, 0})), 1.0, 1e-12);
}

TEST(CosineSimilarityTest, Errors) {
  EXPECT_THROW(cosine_similarity(vec({1, 0}), vec({1, 0, 0})), Error);
  EXPECT_THROW(cosine_similarity(vec({0, 0}), vec({1, 0})), Error);
}

TEST(CosineSimilarityTest, SymmetricBoundedScaleInvariant) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int trial = 0; trial < 500; ++trial) {
    Embedding a(32), b(32);
    for (int i = 0; i < 32; ++i) {
      a[i] = n(rng);
      b[i] = n(rng);
    }
    const double c = cosine_similarity(a, b);
    EXPECT_EQ(c, cosine_similarity(b, a));
    EXPECT_LE(std::abs(c), 1.0 + 1e-9);
    EXPECT_NEAR(cosine_similarity(Embedding(scale(rng) * a), b), c, 1e-9);
  }
}

TEST(TestEmbedTest, DeterministicAndUnitNorm) {
  EXPECT_EQ(test_embed("Tokyo", 64, 1), test_embed("Tokyo", 64, 1));
  EXPECT_NE(test_embed("Tokyo", 64, 1), test_embed("Tokyo", 64, 2));
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    std::string s;
    const int len = 1 + static_cast<int>(rng() % 30);
    for (int k = 0; k < len; ++k) s += static_cast<char>(' ' + rng() % 95);
    EXPECT_NEAR(test_embed(s, 128, 0).norm(), 1.0, 1e-6) << s;
  }
}

TEST(TestEmbedTest, EmptyStringIsFixedUnitVector) {
  const Embedding e = test_embed("", 32, 5);
  EXPECT_NEAR(e.norm(), 1.0, 1e-12);
  EXPECT_EQ(e, test_embed("", 32, 5));
}

TEST(TestEmbedTest, SimilarStringsScoreHigher) {
  const auto ist = test_embed("Istanbul", 256, 0);
  const double near = cosine_similarity(ist, test_embed("istanbul, turkey", 256, 0));
  const double far = cosine_similarity(ist, test_embed("Lima, Peru", 256, 0));
  EXPECT_GT(near, far);
}

TEST(TestEmbedTest, HashesCodePointsNotBytes) {
  // A non-Latin input shares features with itself embedded in a longer text.
  const auto a = test_embed("福島県いわき市", 128, 0);
  EXPECT_GT(cosine_similarity(a, test_embed("福島県いわき市 japan", 128, 0)), 0.5);
  EXPECT_THROW(test_embed("x", 4, 0), Error);
}

TEST(HashingEmbedderTest, BatchMatchesSingleCalls) {
  HashingEmbedder provider(64, 3);
  std::vector<std::string> texts{"a", "a", "Lima", ""};
  auto out = embed_batch(provider, texts);
  ASSERT_EQ(out.size(), texts.size());
  EXPECT_EQ(out[0], out[1]);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    EXPECT_EQ(out[i], test_embed(texts[i], 64, 3));
  }
  EXPECT_EQ(provider.tag(), "hash-ngram-d64-s3");
}

TEST(VectorFileStoreTest, LookupNormalizes) {
  VectorFileStore store(2, "toy");
  store.insert("x", vec({3, 4}));
  auto out = store.embed_batch(std::vector<std::string>{"x"});
  EXPECT_NEAR(out[0][0], 0.6, 1e-15);
  EXPECT_NEAR(out[0][1], 0.8, 1e-15);
}

TEST(VectorFileStoreTest, MissingTextNamesOffender) {
  VectorFileStore store(2, "toy");
  store.insert("x", vec({1, 0}));
  try {
    store.embed_batch(std::vector<std::string>{"x", "nope"});
    FAIL() << "expected ProviderError";
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.text(), "nope");
    EXPECT_EQ(e.offset(), 1u);
  }
}

TEST(VectorFileStoreTest, SaveLoadIsBitExact) {
  HashingEmbedder provider(16, 9);
  std::vector<std::string> texts{"tab\there", "new\nline", "back\\slash", "", "Zürich"};
  VectorFileStore store = capture_vectors(provider, texts);
  std::stringstream s;
  store.save(s);
  EXPECT_EQ(s.str().substr(0, s.str().find('\n')), "dimension=16 provider=hash-ngram-d16-s9");
  VectorFileStore back = VectorFileStore::load(s);
  EXPECT_EQ(back.tag(), provider.tag());
  auto a = back.embed_batch(texts);
  auto b = provider.embed_batch(texts);
  for (std::size_t i = 0; i < texts.size(); ++i) EXPECT_EQ(a[i], b[i]);
  EXPECT_EQ(back.embed_batch(texts)[2], a[2]);
}

TEST(VectorFileStoreTest, RejectsMalformedFiles) {
  std::istringstream bad_header("dim=3\n");
  EXPECT_THROW(VectorFileStore::load(bad_header), InputError);
  std::istringstream short_row("dimension=3 provider=t\nx\t1 2\n");
  EXPECT_THROW(VectorFileStore::load(short_row), InputError);
  std::istringstream zero_row("dimension=2 provider=t\nx\t0 0\n");
  EXPECT_THROW(VectorFileStore::load(zero_row), InputError);
}

std::string fake_service_command(int dim) {
  return std::string("exec:python3 ") + GEOLINK_TEST_SUPPORT_DIR +
         "/fake_embed_service.py " + std::to_string(dim);
}

TEST(ServiceProviderTest, ExecEndpointRoundTrip) {
  ServiceClientConfig config;
  config.endpoint = fake_service_command(16);
  config.tag = "fake";
  config.max_batch = 3;
  config.pool_size = 2;
  ServiceEmbeddingProvider provider(config);
  EXPECT_EQ(provider.dimension(), 16);
  std::vector<std::string> texts{"Tokyo", "Lima", "Tokyo", "x", "福島県いわき市", ""};
  auto a = provider.embed_batch(texts);
  auto b = provider.embed_batch(texts);
  ASSERT_EQ(a.size(), texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    EXPECT_NEAR(a[i].norm(), 1.0, 1e-12);
    EXPECT_LE((a[i] - b[i]).cwiseAbs().maxCoeff(), 1e-6);
  }
  EXPECT_EQ(a[0], a[2]);
}

TEST(ServiceProviderTest, ErrorResponseIdentifiesOffset) {
  ServiceClientConfig config;
  config.endpoint = fake_service_command(8);
  config.max_batch = 2;
  ServiceEmbeddingProvider provider(config);
  std::vector<std::string> texts{"a", "b", "!fail me", "c"};
  try {
    provider.embed_batch(texts);
    FAIL() << "expected ProviderError";
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.offset(), 2u);
    EXPECT_NE(std::string(e.what()).find("refused"), std::string::npos);
  }
  // The connection stays usable after an error response.
  EXPECT_EQ(provider.embed_batch(std::vector<std::string>{"a"}).size(), 1u);
}

TEST(ServiceProviderTest, UnreachableSocketFails) {
  ServiceClientConfig config;
  config.endpoint = "unix:/nonexistent/geolink.sock";
  EXPECT_THROW(ServiceEmbeddingProvider{config}, ProviderError);
  config.endpoint = "tcp:localhost:1";
  EXPECT_THROW(ServiceEmbeddingProvider{config}, InputError);
  config.endpoint = "";
  EXPECT_THROW(ServiceEmbeddingProvider{config}, InputError);
}

// Minimal in-process protocol server on a unix socket.
class SocketServer {
 public:
  explicit SocketServer(int dim) : dim_(dim) {
    path_ = "/tmp/geolink-test-" + std::to_string(::getpid()) + ".sock";
    ::unlink(path_.c_str());
    listen_fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    std::snprintf(addr.sun_path, sizeof(addr.sun_path), "%s", path_.c_str());
    EXPECT_EQ(::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)), 0);
    EXPECT_EQ(::listen(listen_fd_, 4), 0);
    thread_ = std::thread([this] { serve_one(); });
  }
  ~SocketServer() {
    thread_.join();
    ::close(listen_fd_);
    ::unlink(path_.c_str());
  }
  const std::string& path() const { return path_; }

 private:
  void serve_one() {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    std::string buffer;
    char chunk[4096];
    while (true) {
      auto pos = buffer.find('\n');
      if (pos == std::string::npos) {
        ssize_t n = ::read(fd, chunk, sizeof(chunk));
        if (n <= 0) break;
        buffer.append(chunk, static_cast<std::size_t>(n));
        continue;
      }
      auto req = nlohmann::json::parse(buffer.substr(0, pos));
      buffer.erase(0, pos + 1);
      nlohmann::json vectors = nlohmann::json::array();
      for (const auto& t : req["texts"]) {
        const Embedding v = test_embed(t.get<std::string>(), dim_, 0) * 3.0;
        vectors.push_back(std::vector<double>(v.data(), v.data() + v.size()));
      }
      std::string resp =
          nlohmann::json{{"id", req["id"]}, {"vectors", vectors}, {"dim", dim_}}.dump() + "\n";
      if (::write(fd, resp.data(), resp.size()) < 0) break;
    }
    ::close(fd);
  }

  int dim_;
  std::string path_;
  int listen_fd_ = -1;
  std::thread thread_;
};

TEST(ServiceProviderTest, UnixSocketEndpointRenormalizes) {
  SocketServer server(32);
  {
    ServiceClientConfig config;
    config.endpoint = "unix:" + server.path();
    ServiceEmbeddingProvider provider(config);
    EXPECT_EQ(provider.dimension(), 32);
    auto out = provider.embed_batch(std::vector<std::string>{"Lima", "Peru"});
    EXPECT_LE((out[0] - test_embed("Lima", 32, 0)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(MakeProviderTest, ParsesSpecs) {
  auto hash = make_provider("hash:dim=32,seed=4");
  EXPECT_EQ(hash->dimension(), 32);
  EXPECT_EQ(hash->tag(), "hash-ngram-d32-s4");
  EXPECT_EQ(make_provider("hash")->dimension(), 256);
  EXPECT_THROW(make_provider("hash:dim=4"), InputError);
  EXPECT_THROW(make_provider("hash:size=4"), InputError);
  EXPECT_THROW(make_provider("file:/nonexistent/store.tsv"), InputError);
  EXPECT_THROW(make_provider("magic"), InputError);
}

TEST(MakeProviderTest, ServiceFallsBackToEnvironment) {
  ::setenv(kEndpointEnvVar, fake_service_command(8).c_str(), 1);
  auto p = make_provider("service");
  EXPECT_EQ(p->dimension(), 8);
  ::unsetenv(kEndpointEnvVar);
  EXPECT_THROW(make_provider("service"), InputError);
}

}  // namespace
}  // namespace geolink
