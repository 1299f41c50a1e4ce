#include "scenerag/eval.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "scenerag/errors.hpp"

namespace scenerag::eval {
namespace {

std::unique_ptr<embedding::Embedder> local_embedder() { return embedding::make_embedder({}); }

TokenSet set_of(std::initializer_list<const char*> xs) { return TokenSet(xs.begin(), xs.end()); }

void expect_prf(const PrecisionRecallF1& got, double p, double r, double f) {
  EXPECT_DOUBLE_EQ(got.precision, p);
  EXPECT_DOUBLE_EQ(got.recall, r);
  EXPECT_DOUBLE_EQ(got.f1, f);
}

std::string random_words(std::mt19937_64& rng, std::size_t max_len, std::size_t vocab) {
  std::string s;
  for (std::size_t n = rng() % (max_len + 1); n > 0; --n) {
    if (!s.empty()) s += ' ';
    s += "w" + std::to_string(rng() % vocab);
  }
  return s;
}

TEST(TokenSet, Examples) {
  EXPECT_EQ(token_set("car car bus"), set_of({"car", "bus"}));
  EXPECT_TRUE(token_set("").empty());
  EXPECT_EQ(token_set("Car, bus!"), set_of({"car", "bus"}));
  const auto& en = text::StopList::builtin("en-v1");
  EXPECT_EQ(token_set("the car is red", &en), set_of({"car", "red"}));
}

TEST(PrecisionRecall, Examples) {
  expect_prf(precision_recall_f1(set_of({"a", "b"}), set_of({"a", "b"})), 1, 1, 1);
  expect_prf(precision_recall_f1(set_of({"a", "b", "c"}), set_of({"b", "c", "d"})), 2.0 / 3, 2.0 / 3, 2.0 / 3);
  expect_prf(precision_recall_f1(set_of({"a"}), set_of({"b"})), 0, 0, 0);
  expect_prf(precision_recall_f1(TokenSet{}, TokenSet{}), 1, 1, 1);
  expect_prf(precision_recall_f1(TokenSet{}, set_of({"a"})), 0, 0, 0);
  expect_prf(precision_recall_f1(set_of({"a"}), TokenSet{}), 0, 0, 0);
}

TEST(PrecisionRecall, MultisetCountsMinimumOccurrences) {
  const TokenBag r{{"a", 3}, {"b", 1}};
  const TokenBag g{{"a", 1}, {"b", 1}, {"c", 2}};
  // overlap min(3,1) + min(1,1) = 2; |r| = 4, |g| = 4
  expect_prf(precision_recall_f1(r, g), 0.5, 0.5, 0.5);
  EXPECT_EQ(faithfulness(r, g), 0.5);
}

TEST(TfCosine, Examples) {
  EXPECT_EQ(tf_cosine("a b c", "a b c"), 1.0);
  EXPECT_EQ(tf_cosine("a b", "c d"), 0.0);
  EXPECT_DOUBLE_EQ(tf_cosine("a a b", "a b b"), 0.8);
  EXPECT_EQ(tf_cosine("", ""), 1.0);
  EXPECT_EQ(tf_cosine("", "a"), 0.0);
}

TEST(Correctness, Examples) {
  for (double w : {0.0, 0.25, 0.6, 1.0}) EXPECT_EQ(correctness("the car is red", "the car is red", w), 1.0);
  EXPECT_NEAR(combine_correctness(0.8, 2.0 / 3.0, 0.25), 0.7, 1e-15);
  EXPECT_EQ(combine_correctness(0.8, 2.0 / 3.0, 1.0), 0.8);
  EXPECT_EQ(combine_correctness(0.8, 2.0 / 3.0, 0.0), 2.0 / 3.0);
  EXPECT_THROW(combine_correctness(0.5, 0.5, -0.01), ConfigError);
  EXPECT_THROW(combine_correctness(0.5, 0.5, 1.5), ConfigError);
  EXPECT_THROW(combine_correctness(0.5, 0.5, std::nan("")), ConfigError);
}

TEST(Correctness, AffineInOmega) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 200; ++i) {
    const std::string r = random_words(rng, 12, 10);
    const std::string g = random_words(rng, 12, 10);
    const double c0 = correctness(r, g, 0.0);
    const double c1 = correctness(r, g, 1.0);
    for (double w : {0.1, 0.25, 0.5, 0.9}) EXPECT_NEAR(correctness(r, g, w), w * c1 + (1 - w) * c0, 1e-12);
  }
}

TEST(Faithfulness, Examples) {
  EXPECT_EQ(faithfulness(set_of({"a", "b"}), set_of({"a", "b", "c"})), 1.0);
  EXPECT_EQ(faithfulness(set_of({"a", "b", "c", "d"}), set_of({"a", "b"})), 0.5);
  EXPECT_EQ(faithfulness(set_of({"a"}), set_of({"b"})), 0.0);
  EXPECT_EQ(faithfulness(TokenSet{}, set_of({"b"})), 0.0);
  EXPECT_EQ(faithfulness(TokenSet{}, TokenSet{}), 1.0);
}

TEST(Faithfulness, AsymmetricWhereF1IsSymmetric) {
  const auto r = set_of({"a", "b", "c", "d"});
  const auto g = set_of({"a", "b"});
  EXPECT_NE(faithfulness(r, g), faithfulness(g, r));
  EXPECT_EQ(precision_recall_f1(r, g).f1, precision_recall_f1(g, r).f1);
}

TEST(Properties, RandomPairs) {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 2000; ++i) {
    const auto r = token_set(random_words(rng, 15, 20));
    const auto g = token_set(random_words(rng, 15, 20));
    const auto prf = precision_recall_f1(r, g);
    EXPECT_EQ(faithfulness(r, g), prf.precision);
    EXPECT_EQ(prf.f1, precision_recall_f1(g, r).f1);
    for (double v : {prf.precision, prf.recall, prf.f1, faithfulness(r, g)}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Oracle, ThousandPairsMatchBruteForce) {
  std::mt19937_64 rng(33);
  const auto e = local_embedder();
  for (int i = 0; i < 1000; ++i) {
    const std::string r = random_words(rng, 20, 30);
    const std::string g = random_words(rng, 20, 30);
    const auto want = oracle::brute_force_scores(r, g);
    const auto got = score_pair({"p", r, g, std::nullopt}, {}, *e);
    EXPECT_EQ(got.precision, want.precision) << r << " | " << g;
    EXPECT_EQ(got.recall, want.recall);
    EXPECT_EQ(got.f1, want.f1);
    EXPECT_EQ(got.faithfulness, want.faithfulness);
    EXPECT_NEAR(got.tf_cosine, want.tf_cosine, 1e-15);
    EXPECT_NEAR(got.correctness, oracle::correctness(want, kDefaultOmega), 1e-12);
  }
}

TEST(SemanticSimilarity, Examples) {
  const auto e = local_embedder();
  EXPECT_EQ(semantic_similarity("buses near the tower", "buses near the tower", *e), 1.0);
  EXPECT_EQ(semantic_similarity("car truck bus", "bus car truck", *e), 1.0);
  EXPECT_EQ(semantic_similarity("", "car", *e), 0.0);
}

TEST(Relevancy, Examples) {
  const auto e = local_embedder();
  EXPECT_EQ(relevancy("where is the truck", "where is the truck", *e), 1.0);
  const auto scores = score_pair({"p", "a", "b", std::nullopt}, {}, *e);
  EXPECT_FALSE(scores.relevancy);
}

TEST(Relevancy, DisjointVocabularyNearZero) {
  const auto e = local_embedder();
  // signed hashing into 384 buckets: 20 x 20 tokens collide about once per pair, so
  // |cos| clusters near 1/20 and roughly 5% of pairs land past 0.1
  std::mt19937_64 rng(34);
  int within = 0;
  double sum = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::string q;
    std::string a;
    for (int n = 0; n < 20; ++n) {
      q += " q" + std::to_string(i) + "x" + std::to_string(rng());
      a += " a" + std::to_string(i) + "x" + std::to_string(rng());
    }
    const double v = std::fabs(relevancy(q, a, *e));
    within += v <= 0.1;
    sum += v;
    EXPECT_LE(v, 0.25) << i;
  }
  EXPECT_GE(within, 930);
  EXPECT_LE(sum / 1000.0, 0.05);
}

TEST(Corpus, SinglePairIdentity) {
  const auto e = local_embedder();
  const auto report = evaluate_corpus({{"p1", "two cars near the receiver", "two cars near the receiver", std::nullopt}},
                                      {}, *e);
  const auto& s = report.pairs.at(0).scores;
  EXPECT_EQ(s.correctness, 1.0);
  EXPECT_EQ(s.faithfulness, 1.0);
  EXPECT_EQ(s.f1, 1.0);
  EXPECT_EQ(s.semantic_similarity, 1.0);
}

TEST(Corpus, MeanOfTwoPairs) {
  const auto e = local_embedder();
  const auto report = evaluate_corpus({{"p1", "a b", "a b", std::nullopt}, {"p2", "c", "d", std::nullopt}}, {}, *e);
  EXPECT_EQ(report.aggregates.at("faithfulness").mean, 0.5);
  EXPECT_EQ(report.aggregates.at("faithfulness").count, 2u);
  EXPECT_EQ(report.aggregates.count("relevancy"), 0u);
}

TEST(Corpus, Errors) {
  const auto e = local_embedder();
  EXPECT_THROW(evaluate_corpus({}, {}, *e), ConfigError);
  EXPECT_THROW(evaluate_corpus({{"p", "a", "a", std::nullopt}, {"p", "b", "b", std::nullopt}}, {}, *e),
               DuplicateIdError);
  EvalConfig bad;
  bad.omega = 2.0;
  EXPECT_THROW(evaluate_corpus({{"p", "a", "a", std::nullopt}}, bad, *e), ConfigError);
  bad = {};
  bad.stop_list = "xx";
  EXPECT_THROW(evaluate_corpus({{"p", "a", "a", std::nullopt}}, bad, *e), ConfigError);
}

TEST(Corpus, AggregateIsPermutationInvariant) {
  const auto e = local_embedder();
  std::mt19937_64 rng(35);
  std::vector<EvalPair> pairs;
  for (int i = 0; i < 60; ++i) {
    pairs.push_back({"p" + std::to_string(i), random_words(rng, 10, 12), random_words(rng, 10, 12),
                     std::string("w1 w2")});
  }
  const auto a = to_json(evaluate_corpus(pairs, {}, *e))["aggregate"];
  std::shuffle(pairs.begin(), pairs.end(), rng);
  const auto b = to_json(evaluate_corpus(pairs, {}, *e))["aggregate"];
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(Corpus, MultisetAndEmbeddingCosineOptions) {
  const auto e = local_embedder();
  EvalConfig cfg;
  cfg.multiset = true;
  const auto s = score_pair({"p", "a a b", "a b b", std::nullopt}, cfg, *e);
  EXPECT_DOUBLE_EQ(s.precision, 2.0 / 3.0);
  cfg = {};
  cfg.correctness_cosine = CorrectnessCosine::kEmbedding;
  cfg.omega = 1.0;
  const auto t = score_pair({"p", "car truck", "truck car", std::nullopt}, cfg, *e);
  EXPECT_EQ(t.correctness, 1.0);
}

TEST(Aggregate, Statistics) {
  const auto a = aggregate({3.0, 1.0, 2.0, 10.0});
  EXPECT_EQ(a.count, 4u);
  EXPECT_EQ(a.mean, 4.0);
  EXPECT_EQ(a.median, 2.5);
  EXPECT_EQ(a.min, 1.0);
  EXPECT_EQ(a.max, 10.0);
  EXPECT_EQ(aggregate({}).count, 0u);
}

TEST(Pairs, Parse) {
  const auto pairs = parse_eval_pairs(
      "{\"pair_id\":\"a\",\"response\":\"r\",\"ground_truth\":\"g\"}\n\n"
      "{\"pair_id\":\"b\",\"response\":\"r\",\"ground_truth\":\"g\",\"question\":\"q\"}\n");
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_FALSE(pairs[0].question);
  EXPECT_EQ(pairs[1].question, "q");
  try {
    parse_eval_pairs("{\"pair_id\":\"a\",\"response\":\"r\"}\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_EQ(e.field(), "ground_truth");
  }
}

}  // namespace
}  // namespace scenerag::eval
