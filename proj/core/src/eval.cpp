#include "scenerag/eval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "scenerag/errors.hpp"

namespace scenerag::eval {
namespace {

text::TokenStream filtered_tokens(std::string_view text, const text::StopList* stop) {
  auto ts = text::tokenize(text);
  return stop ? text::remove_stopwords(ts, *stop) : ts;
}

PrecisionRecallF1 from_counts(double overlap, double response_size, double truth_size) {
  if (response_size == 0.0 && truth_size == 0.0) return {1.0, 1.0, 1.0};
  if (response_size == 0.0 || truth_size == 0.0) return {0.0, 0.0, 0.0};
  PrecisionRecallF1 out;
  out.precision = overlap / response_size;
  out.recall = overlap / truth_size;
  const double sum = out.precision + out.recall;
  out.f1 = sum == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / sum;
  return out;
}

std::size_t set_overlap(const TokenSet& a, const TokenSet& b) {
  std::size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

std::size_t bag_size(const TokenBag& b) {
  std::size_t n = 0;
  for (const auto& [_, c] : b) n += c;
  return n;
}

std::size_t bag_overlap(const TokenBag& a, const TokenBag& b) {
  std::size_t n = 0;
  for (const auto& [tok, c] : a) {
    if (auto it = b.find(tok); it != b.end()) n += std::min(c, it->second);
  }
  return n;
}

double faithfulness_from(double overlap, double response_size, double truth_size) {
  if (response_size == 0.0) return truth_size == 0.0 ? 1.0 : 0.0;
  return overlap / response_size;
}

}  // namespace

TokenSet token_set(std::string_view text, const text::StopList* stop) {
  auto ts = filtered_tokens(text, stop);
  return TokenSet(std::make_move_iterator(ts.tokens.begin()), std::make_move_iterator(ts.tokens.end()));
}

TokenBag token_bag(std::string_view text, const text::StopList* stop) {
  TokenBag bag;
  for (auto& t : filtered_tokens(text, stop).tokens) ++bag[std::move(t)];
  return bag;
}

PrecisionRecallF1 precision_recall_f1(const TokenSet& response, const TokenSet& truth) {
  return from_counts(static_cast<double>(set_overlap(response, truth)), static_cast<double>(response.size()),
                     static_cast<double>(truth.size()));
}

PrecisionRecallF1 precision_recall_f1(const TokenBag& response, const TokenBag& truth) {
  return from_counts(static_cast<double>(bag_overlap(response, truth)), static_cast<double>(bag_size(response)),
                     static_cast<double>(bag_size(truth)));
}

double tf_cosine(const TokenBag& response, const TokenBag& truth) {
  if (response.empty() && truth.empty()) return 1.0;
  if (response.empty() || truth.empty()) return 0.0;
  double dot = 0.0;
  for (const auto& [tok, c] : response) {
    if (auto it = truth.find(tok); it != truth.end()) dot += static_cast<double>(c) * static_cast<double>(it->second);
  }
  double nr = 0.0;
  for (const auto& [_, c] : response) nr += static_cast<double>(c) * static_cast<double>(c);
  double ng = 0.0;
  for (const auto& [_, c] : truth) ng += static_cast<double>(c) * static_cast<double>(c);
  return std::clamp(dot / std::sqrt(nr * ng), 0.0, 1.0);
}

double tf_cosine(std::string_view response, std::string_view truth) {
  return tf_cosine(token_bag(response), token_bag(truth));
}

double combine_correctness(double cosine, double f1, double omega) {
  if (!(omega >= 0.0 && omega <= 1.0)) throw ConfigError("omega must be within [0, 1]");
  return omega * cosine + (1.0 - omega) * f1;
}

double correctness(std::string_view response, std::string_view truth, double omega) {
  const auto prf = precision_recall_f1(token_set(response), token_set(truth));
  return combine_correctness(tf_cosine(response, truth), prf.f1, omega);
}

double faithfulness(const TokenSet& response, const TokenSet& truth) {
  return faithfulness_from(static_cast<double>(set_overlap(response, truth)), static_cast<double>(response.size()),
                           static_cast<double>(truth.size()));
}

double faithfulness(const TokenBag& response, const TokenBag& truth) {
  return faithfulness_from(static_cast<double>(bag_overlap(response, truth)), static_cast<double>(bag_size(response)),
                           static_cast<double>(bag_size(truth)));
}

double faithfulness(std::string_view response, std::string_view truth) {
  return faithfulness(token_set(response), token_set(truth));
}

double semantic_similarity(std::string_view response, std::string_view truth, const embedding::Embedder& embedder) {
  const std::vector<std::string> texts{std::string(response), std::string(truth)};
  const auto v = embedder.embed(texts);
  return embedding::cosine_similarity(v.at(0), v.at(1));
}

double relevancy(std::string_view question, std::string_view answer, const embedding::Embedder& embedder) {
  return semantic_similarity(question, answer, embedder);
}

std::vector<EvalPair> parse_eval_pairs(std::istream& in) {
  std::vector<EvalPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(line_no, "record", std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError(line_no, "record", "expected a JSON object");
    auto str = [&](const char* key, bool required) -> std::optional<std::string> {
      auto it = j.find(key);
      if (it == j.end() || it->is_null()) {
        if (required) throw ValidationError(line_no, key, "missing");
        return std::nullopt;
      }
      if (!it->is_string()) throw ValidationError(line_no, key, "expected a string");
      return it->get<std::string>();
    };
    EvalPair p;
    p.pair_id = *str("pair_id", true);
    if (p.pair_id.empty()) throw ValidationError(line_no, "pair_id", "must not be empty");
    p.response = *str("response", true);
    p.ground_truth = *str("ground_truth", true);
    p.question = str("question", false);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<EvalPair> parse_eval_pairs(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_eval_pairs(in);
}

MetricScores score_pair(const EvalPair& pair, const EvalConfig& config, const embedding::Embedder& embedder) {
  const text::StopList& stop = text::StopList::builtin(config.stop_list);
  const text::StopList* filter = stop.size() > 0 ? &stop : nullptr;

  MetricScores s;
  s.omega = config.omega;
  const TokenBag r_bag = token_bag(pair.response, filter);
  const TokenBag g_bag = token_bag(pair.ground_truth, filter);
  PrecisionRecallF1 prf;
  if (config.multiset) {
    prf = precision_recall_f1(r_bag, g_bag);
    s.faithfulness = faithfulness(r_bag, g_bag);
  } else {
    TokenSet r_set;
    TokenSet g_set;
    for (const auto& [t, _] : r_bag) r_set.insert(t);
    for (const auto& [t, _] : g_bag) g_set.insert(t);
    prf = precision_recall_f1(r_set, g_set);
    s.faithfulness = faithfulness(r_set, g_set);
  }
  s.precision = prf.precision;
  s.recall = prf.recall;
  s.f1 = prf.f1;
  s.tf_cosine = tf_cosine(r_bag, g_bag);
  s.semantic_similarity = semantic_similarity(pair.response, pair.ground_truth, embedder);
  const double cos_term = config.correctness_cosine == CorrectnessCosine::kTermFrequency
                              ? s.tf_cosine
                              : std::max(0.0, s.semantic_similarity);
  s.correctness = combine_correctness(cos_term, s.f1, config.omega);
  if (pair.question) s.relevancy = relevancy(*pair.question, pair.response, embedder);
  return s;
}

Aggregate aggregate(std::vector<double> values) {
  Aggregate a;
  a.count = values.size();
  if (values.empty()) return a;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(values.size());
  const std::size_t mid = values.size() / 2;
  a.median = values.size() % 2 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
  a.min = values.front();
  a.max = values.back();
  return a;
}

EvalReport evaluate_corpus(const std::vector<EvalPair>& pairs, const EvalConfig& config,
                           const embedding::Embedder& embedder) {
  if (pairs.empty()) throw ConfigError("evaluation needs at least one pair");
  combine_correctness(0.0, 0.0, config.omega);
  text::StopList::builtin(config.stop_list);

  std::unordered_set<std::string_view> seen;
  for (const auto& p : pairs) {
    if (!seen.insert(p.pair_id).second) throw DuplicateIdError(p.pair_id);
  }

  EvalReport report;
  report.config = config;
  report.embedder = embedder.provider_tag();
  report.pairs.reserve(pairs.size());
  std::map<std::string, std::vector<double>> columns;
  for (const auto& p : pairs) {
    PairReport pr{p.pair_id, score_pair(p, config, embedder)};
    const auto& s = pr.scores;
    columns["precision"].push_back(s.precision);
    columns["recall"].push_back(s.recall);
    columns["f1"].push_back(s.f1);
    columns["tf_cosine"].push_back(s.tf_cosine);
    columns["correctness"].push_back(s.correctness);
    columns["faithfulness"].push_back(s.faithfulness);
    columns["semantic_similarity"].push_back(s.semantic_similarity);
    if (s.relevancy) columns["relevancy"].push_back(*s.relevancy);
    report.pairs.push_back(std::move(pr));
  }
  for (auto& [name, values] : columns) report.aggregates[name] = aggregate(std::move(values));
  return report;
}

nlohmann::ordered_json to_json(const EvalReport& report) {
  using oj = nlohmann::ordered_json;
  oj j;
  j["config"] = {{"omega", report.config.omega},
                 {"multiset", report.config.multiset},
                 {"stop_list", report.config.stop_list},
                 {"correctness_cosine",
                  report.config.correctness_cosine == CorrectnessCosine::kTermFrequency ? "tf" : "embedding"},
                 {"embedder", report.embedder}};
  oj pairs = oj::array();
  for (const auto& p : report.pairs) {
    const auto& s = p.scores;
    oj o = {{"pair_id", p.pair_id},
            {"precision", s.precision},
            {"recall", s.recall},
            {"f1", s.f1},
            {"tf_cosine", s.tf_cosine},
            {"correctness", s.correctness},
            {"faithfulness", s.faithfulness},
            {"semantic_similarity", s.semantic_similarity}};
    if (s.relevancy) o["relevancy"] = *s.relevancy;
    pairs.push_back(std::move(o));
  }
  j["pairs"] = std::move(pairs);
  oj agg = oj::object();
  for (const auto& [name, a] : report.aggregates) {
    agg[name] = {{"count", a.count}, {"mean", a.mean}, {"median", a.median}, {"min", a.min}, {"max", a.max}};
  }
  j["aggregate"] = std::move(agg);
  return j;
}

}  // namespace scenerag::eval
