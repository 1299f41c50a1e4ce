#include "scenerag/vector_store.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "scenerag/errors.hpp"

namespace scenerag::store {
namespace {

namespace fs = std::filesystem;
using embedding::EmbeddingVector;
using embedding::Norm;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("scenerag-store-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "-" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

EmbeddingVector random_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g;
  std::vector<double> v(dim);
  for (auto& x : v) x = g(rng);
  return EmbeddingVector(std::move(v), Norm::kRaw);
}

std::vector<StoredDocument> random_docs(std::size_t n, std::size_t dim, std::uint64_t seed,
                                        const std::string& prefix = "d") {
  std::mt19937_64 rng(seed);
  std::vector<StoredDocument> docs;
  for (std::size_t i = 0; i < n; ++i) {
    docs.push_back({prefix + std::to_string(i), "text " + std::to_string(i), {{"i", std::to_string(i)}},
                    random_vector(rng, dim)});
  }
  return docs;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

// Full-sort oracle over float32-rounded rows; ties keep insertion order.
std::vector<std::string> oracle_top(const std::vector<StoredDocument>& docs, const EmbeddingVector& q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> s;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    std::vector<float> row(docs[i].vector.values().begin(), docs[i].vector.values().end());
    s.emplace_back(embedding::cosine_similarity(q.values(), std::span<const float>(row)), i);
  }
  std::stable_sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(k, s.size()); ++i) out.push_back(docs[s[i].second].id);
  return out;
}

std::vector<std::string> hit_ids(const std::vector<SearchHit>& hits) {
  std::vector<std::string> out;
  for (const auto& h : hits) out.push_back(h.id);
  return out;
}

TEST(Collection, CreateAndCount) {
  Collection c("scenes", 4);
  EXPECT_EQ(c.count(), 0u);
  EXPECT_EQ(c.add_documents(random_docs(3, 4, 1)), 3u);
  EXPECT_EQ(c.count(), 3u);
  EXPECT_EQ(c.manifest().count, 3u);
  EXPECT_EQ(c.ids(), (std::vector<std::string>{"d0", "d1", "d2"}));
  EXPECT_THROW(Collection("x", 0), ConfigError);
}

TEST(Collection, DuplicateIdAgainstStored) {
  Collection c("scenes", 4);
  c.add_documents(random_docs(3, 4, 1));
  try {
    c.add_documents(random_docs(1, 4, 2));
    FAIL();
  } catch (const DuplicateIdError& e) {
    EXPECT_EQ(e.id(), "d0");
  }
  EXPECT_EQ(c.count(), 3u);
}

TEST(Collection, BatchIsAllOrNothing) {
  Collection c("scenes", 4);
  auto batch = random_docs(5, 4, 1);
  batch[3].id = batch[1].id;
  EXPECT_THROW(c.add_documents(batch), DuplicateIdError);
  EXPECT_EQ(c.count(), 0u);

  batch = random_docs(5, 4, 1);
  batch[4].vector = EmbeddingVector(std::vector<double>{1, 2, 3}, Norm::kRaw);
  EXPECT_THROW(c.add_documents(batch), DimensionMismatchError);
  EXPECT_EQ(c.count(), 0u);
  EXPECT_TRUE(c.ids().empty());
}

TEST(Collection, GetReturnsStoredFields) {
  Collection c("scenes", 4);
  const auto docs = random_docs(2, 4, 1);
  c.add_documents(docs);
  const auto got = c.get("d1");
  ASSERT_TRUE(got);
  EXPECT_EQ(got->text, "text 1");
  EXPECT_EQ(got->metadata.at("i"), "1");
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(got->vector[j], double(static_cast<float>(docs[1].vector[j])));
  EXPECT_FALSE(c.get("missing"));
}

TEST(Collection, BulkInsert) {
  Collection c("bulk", 16);
  c.add_documents(random_docs(10000, 16, 3));
  EXPECT_EQ(c.count(), 10000u);
}

TEST(SearchExact, MatchesFullSortOracle) {
  const auto docs = random_docs(500, 24, 4);
  Collection c("s", 24);
  c.add_documents(docs);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto q = random_vector(rng, 24);
    EXPECT_EQ(hit_ids(c.search_exact(q, 10)), oracle_top(docs, q, 10));
  }
}

TEST(SearchExact, TiesFollowInsertionOrder) {
  Collection c("s", 2);
  std::vector<StoredDocument> docs;
  for (const char* id : {"z", "a", "m"}) docs.push_back({id, "", {}, EmbeddingVector({1.0, 0.0}, Norm::kRaw)});
  docs.push_back({"b", "", {}, EmbeddingVector({0.0, 1.0}, Norm::kRaw)});
  c.add_documents(docs);
  const auto hits = c.search_exact(EmbeddingVector({2.0, 0.0}, Norm::kRaw), 4);
  EXPECT_EQ(hit_ids(hits), (std::vector<std::string>{"z", "a", "m", "b"}));
  EXPECT_EQ(hits[0].score, 1.0);
  EXPECT_EQ(hits[3].score, 0.0);
}

TEST(SearchExact, KLargerThanCountAndEmpty) {
  Collection c("s", 4);
  const auto q = EmbeddingVector({1.0, 0.0, 0.0, 0.0}, Norm::kRaw);
  EXPECT_TRUE(c.search_exact(q, 5).empty());
  EXPECT_TRUE(c.search_ann(q, 5).empty());
  c.add_documents(random_docs(3, 4, 6));
  EXPECT_EQ(c.search_exact(q, 5).size(), 3u);
  EXPECT_THROW(c.search_exact(q, 0), ConfigError);
  EXPECT_THROW(c.search_exact(EmbeddingVector({1.0}, Norm::kRaw), 1), DimensionMismatchError);
}

TEST(SearchExact, ScoresAreRecomputableAndSorted) {
  const auto docs = random_docs(200, 8, 7);
  Collection c("s", 8);
  c.add_documents(docs);
  std::mt19937_64 rng(8);
  const auto q = random_vector(rng, 8);
  const auto hits = c.search_exact(q, 200);
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const auto stored = c.get(hits[i].id);
    EXPECT_NEAR(hits[i].score, embedding::cosine_similarity(q, stored->vector), 1e-6);
    EXPECT_GE(hits[i].score, -1.0);
    EXPECT_LE(hits[i].score, 1.0);
    if (i) EXPECT_GE(hits[i - 1].score, hits[i].score);
  }
}

TEST(SearchAnn, SingleDocument) {
  Collection c("s", 4);
  c.add_documents(random_docs(1, 4, 9));
  const auto hits = c.search_ann(c.get("d0")->vector, 3);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].id, "d0");
}

TEST(SearchAnn, DeterministicAndKeptInSyncOnAdd) {
  const auto docs = random_docs(2000, 16, 10);
  Collection a("s", 16);
  Collection b("s", 16);
  a.add_documents(docs);
  b.add_documents(docs);
  std::mt19937_64 rng(11);
  const auto q = random_vector(rng, 16);
  EXPECT_EQ(hit_ids(a.search_ann(q, 10)), hit_ids(b.search_ann(q, 10)));

  // the graph now exists; new documents must be reachable
  const StoredDocument extra{"extra", "", {}, q};
  a.add_documents({extra});
  EXPECT_EQ(a.search_ann(q, 1)[0].id, "extra");
}

TEST(SearchAnn, DuplicatedVectorsStillFillK) {
  Collection c("s", 4);
  std::vector<StoredDocument> docs;
  for (int i = 0; i < 30; ++i) docs.push_back({"dup" + std::to_string(i), "", {}, EmbeddingVector({1.0, 1.0, 0.0, 0.0}, Norm::kRaw)});
  c.add_documents(docs);
  const auto q = EmbeddingVector({1.0, 1.0, 0.0, 0.0}, Norm::kRaw);
  const auto hits = c.search_ann(q, 25);
  EXPECT_EQ(hits.size(), 25u);
  for (const auto& h : hits) EXPECT_NEAR(h.score, 1.0, 1e-6);
}

TEST(SearchAnn, ReasonableRecall) {
  const auto docs = random_docs(2000, 32, 12);
  Collection c("s", 32);
  c.add_documents(docs);
  std::mt19937_64 rng(13);
  std::size_t found = 0;
  for (int i = 0; i < 30; ++i) {
    const auto q = random_vector(rng, 32);
    const auto truth = oracle_top(docs, q, 10);
    for (const auto& id : hit_ids(c.search_ann(q, 10))) found += std::count(truth.begin(), truth.end(), id);
  }
  EXPECT_GE(found / 300.0, 0.95);
}

TEST(SearchAnn, ConcurrentReaders) {
  Collection c("s", 16);
  c.add_documents(random_docs(1000, 16, 14));
  std::mt19937_64 rng(15);
  const auto q = random_vector(rng, 16);
  const auto want = hit_ids(c.search_exact(q, 5));
  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 20; ++i) {
        if (hit_ids(c.search_exact(q, 5)) != want) ++mismatches;
        c.search_ann(q, 5);
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(mismatches.load(), 0);
}

TEST(Persistence, RoundTripIsExact) {
  TempDir tmp;
  Collection c("scenes", 12, "local-hash:v1:dim=12:stop=en-v1", {8, 40, 32});
  auto docs = random_docs(300, 12, 16);
  docs[5].text = "unicode ✓ \"quotes\"\nnewline";
  docs[5].metadata = {{"source", "doc"}, {"file_name", "a b.txt"}};
  c.add_documents(docs);
  c.persist(tmp.path() / "scenes");

  const auto back = Collection::load(tmp.path() / "scenes");
  EXPECT_EQ(back.count(), c.count());
  EXPECT_EQ(back.manifest().provider, c.manifest().provider);
  EXPECT_EQ(back.manifest().index_params, c.manifest().index_params);
  EXPECT_EQ(back.ids(), c.ids());
  for (const auto& id : c.ids()) {
    const auto x = c.get(id);
    const auto y = back.get(id);
    EXPECT_EQ(x->text, y->text);
    EXPECT_EQ(x->metadata, y->metadata);
    EXPECT_EQ(x->vector, y->vector);
  }
  std::mt19937_64 rng(17);
  const auto q = random_vector(rng, 12);
  EXPECT_EQ(hit_ids(back.search_exact(q, 7)), hit_ids(c.search_exact(q, 7)));

  // persisting the reloaded collection reproduces the bytes
  back.persist(tmp.path() / "again");
  for (const char* f : {"manifest", "documents", "vectors.bin"}) {
    EXPECT_EQ(slurp(tmp.path() / "scenes" / f), slurp(tmp.path() / "again" / f)) << f;
  }
}

TEST(Persistence, VectorFileLayout) {
  TempDir tmp;
  Collection c("v", 2);
  c.add_documents({{"a", "", {}, EmbeddingVector({1.0, -2.0}, Norm::kRaw)}});
  c.persist(tmp.path() / "v");
  const std::string bytes = slurp(tmp.path() / "v" / "vectors.bin");
  const std::string expected("SRVC\x01\0\0\0\x02\0\0\0\x01\0\0\0\0\0\0\0\x00\x00\x80\x3f\x00\x00\x00\xc0", 28);
  EXPECT_EQ(bytes, expected);
}

class CorruptionTest : public ::testing::Test {
 protected:
  void SetUp() override {
    Collection c("v", 4);
    c.add_documents(random_docs(10, 4, 18));
    c.persist(dir());
  }
  fs::path dir() const { return tmp_.path() / "v"; }
  fs::path vectors() const { return dir() / "vectors.bin"; }

  TempDir tmp_;
};

TEST_F(CorruptionTest, BadMagic) {
  std::string b = slurp(vectors());
  b[0] = 'X';
  spit(vectors(), b);
  EXPECT_THROW(Collection::load(dir()), FormatError);
}

TEST_F(CorruptionTest, VersionMismatch) {
  std::string b = slurp(vectors());
  b[4] = 2;
  spit(vectors(), b);
  try {
    Collection::load(dir());
    FAIL();
  } catch (const VersionMismatchError& e) {
    EXPECT_EQ(e.found(), 2);
    EXPECT_EQ(e.expected(), 1);
  }
}

TEST_F(CorruptionTest, ManifestVersionMismatch) {
  std::string m = slurp(dir() / "manifest");
  const auto pos = m.find("\"format_version\": 1");
  ASSERT_NE(pos, std::string::npos);
  m.replace(pos, 19, "\"format_version\": 9");
  spit(dir() / "manifest", m);
  EXPECT_THROW(Collection::load(dir()), VersionMismatchError);
}

TEST_F(CorruptionTest, TruncatedVectors) {
  std::string b = slurp(vectors());
  b.resize(b.size() - 3);
  spit(vectors(), b);
  EXPECT_THROW(Collection::load(dir()), IntegrityError);
  spit(vectors(), b.substr(0, 10));
  EXPECT_THROW(Collection::load(dir()), IntegrityError);
}

TEST_F(CorruptionTest, CountMismatch) {
  std::string d = slurp(dir() / "documents");
  d.erase(d.rfind('\n', d.size() - 2) + 1);
  spit(dir() / "documents", d);
  EXPECT_THROW(Collection::load(dir()), IntegrityError);
}

TEST(Catalog, CreateOpenExists) {
  TempDir tmp;
  EXPECT_FALSE(collection_exists(tmp.path(), "scenes"));
  create_collection(tmp.path(), "scenes", 8, "p");
  EXPECT_TRUE(collection_exists(tmp.path(), "scenes"));
  EXPECT_THROW(create_collection(tmp.path(), "scenes", 8, "p"), ConfigError);
  EXPECT_EQ(open_collection(tmp.path(), "scenes").dim(), 8u);
  EXPECT_THROW(collection_path(tmp.path(), "../x"), ConfigError);
  EXPECT_THROW(collection_path(tmp.path(), ""), ConfigError);
  EXPECT_THROW(open_collection(tmp.path(), "nope"), Error);
}

TEST(SearchMode, Parse) {
  EXPECT_EQ(parse_search_mode("exact"), SearchMode::kExact);
  EXPECT_EQ(parse_search_mode("ann"), SearchMode::kAnn);
  EXPECT_THROW(parse_search_mode("fast"), ConfigError);
}

}  // namespace
}  // namespace scenerag::store
