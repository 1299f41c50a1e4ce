#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scenerag/embedding.hpp"
#include "scenerag/text.hpp"

namespace scenerag::eval {

inline constexpr double kDefaultOmega = 0.25;

using TokenSet = std::set<std::string>;
/// Token → occurrence count, for multiset-mode metrics.
using TokenBag = std::map<std::string, std::size_t>;

/// Deduplicated tokens of `text`. Stop words are kept unless a list is given.
TokenSet token_set(std::string_view text, const text::StopList* stop = nullptr);
TokenBag token_bag(std::string_view text, const text::StopList* stop = nullptr);

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Both empty gives (1, 1, 1); exactly one empty gives (0, 0, 0).
PrecisionRecallF1 precision_recall_f1(const TokenSet& response, const TokenSet& truth);
/// Multiset variant: the intersection counts min(occurrences) per token.
PrecisionRecallF1 precision_recall_f1(const TokenBag& response, const TokenBag& truth);

/// Cosine of term-frequency vectors over the joint vocabulary, in [0, 1].
/// Either side empty gives 0, both empty gives 1.
double tf_cosine(const TokenBag& response, const TokenBag& truth);
double tf_cosine(std::string_view response, std::string_view truth);

/// ω·cosine + (1 − ω)·F1. Throws ConfigError unless ω ∈ [0, 1].
double combine_correctness(double cosine, double f1, double omega);
double correctness(std::string_view response, std::string_view truth, double omega = kDefaultOmega);

/// |r ∩ g| / |r|: the share of response tokens found in the ground truth.
/// Empty response gives 0 unless the ground truth is empty too (then 1).
double faithfulness(const TokenSet& response, const TokenSet& truth);
double faithfulness(const TokenBag& response, const TokenBag& truth);
double faithfulness(std::string_view response, std::string_view truth);

/// Cosine between the embeddings of response and ground truth, in [-1, 1].
double semantic_similarity(std::string_view response, std::string_view truth, const embedding::Embedder& embedder);
/// Cosine between the embeddings of question and answer.
double relevancy(std::string_view question, std::string_view answer, const embedding::Embedder& embedder);

struct EvalPair {
  std::string pair_id;
  std::string response;
  std::string ground_truth;
  std::optional<std::string> question;
};

/// One JSON object per line with pair_id, response, ground_truth and optional question.
std::vector<EvalPair> parse_eval_pairs(std::istream& in);
std::vector<EvalPair> parse_eval_pairs(std::string_view text);

enum class CorrectnessCosine {
  kTermFrequency,  // default: TF vectors, keeps correctness independent of semantic similarity
  kEmbedding,      // reuse the sentence-embedding cosine (negative values clipped to 0)
};

struct EvalConfig {
  double omega = kDefaultOmega;
  bool multiset = false;
  std::string stop_list = "none";
  CorrectnessCosine correctness_cosine = CorrectnessCosine::kTermFrequency;
};

struct MetricScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double tf_cosine = 0.0;
  double correctness = 0.0;
  double faithfulness = 0.0;
  double semantic_similarity = 0.0;
  std::optional<double> relevancy;  // absent when the pair has no question
  double omega = kDefaultOmega;
};

MetricScores score_pair(const EvalPair& pair, const EvalConfig& config, const embedding::Embedder& embedder);

struct Aggregate {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Order-independent summary: values are sorted before summation.
Aggregate aggregate(std::vector<double> values);

struct PairReport {
  std::string pair_id;
  MetricScores scores;
};

struct EvalReport {
  EvalConfig config;
  std::string embedder;
  std::vector<PairReport> pairs;                // input order
  std::map<std::string, Aggregate> aggregates;  // by metric name
};

/// Throws ConfigError for an empty corpus and DuplicateIdError for repeated pair ids.
EvalReport evaluate_corpus(const std::vector<EvalPair>& pairs, const EvalConfig& config,
                           const embedding::Embedder& embedder);

nlohmann::ordered_json to_json(const EvalReport& report);

}  // namespace scenerag::eval
