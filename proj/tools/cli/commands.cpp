#include "cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scenerag/embedding.hpp"
#include "scenerag/errors.hpp"
#include "scenerag/eval.hpp"
#include "scenerag/geo.hpp"
#include "scenerag/rag.hpp"
#include "scenerag/scene.hpp"
#include "scenerag/text.hpp"
#include "scenerag/vector_store.hpp"

namespace scenerag::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct EmbedFlags {
  std::string provider = "local";
  std::size_t dim = embedding::kDefaultDim;
  std::string stop_list = std::string(text::kDefaultStopList);
  std::string vocab_file;
  std::string endpoint;
  std::string model;
  std::string api_key;
  long timeout_ms = 30000;
  int retries = 3;
};

struct ChunkFlags {
  std::size_t chunk_size = text::kDefaultChunkSize;
  std::size_t overlap = text::kDefaultChunkOverlap;
};

struct IndexFlags {
  std::size_t m = 16;
  std::size_t ef_construction = 200;
  std::size_t ef_search = 64;
};

struct DbFlags {
  std::string db;
  std::string collection;
};

struct Flags {
  DbFlags db;
  EmbedFlags embed;
  ChunkFlags chunk;
  IndexFlags index;
  std::string out_file;

  // ingest-scenes
  std::string scenes_file;
  std::string vehicle_classes = "bicycle,bus,car,motorcycle,truck";
  std::string annotate_endpoint;

  // ingest-docs
  std::string docs_dir;

  // query
  std::string question;
  std::string scene_file;
  std::size_t top_k = rag::kDefaultTopK;
  std::string mode = "exact";
  std::string backend = "echo";
  std::string fixed_answer = "The scene shows a street with vehicles and roadside objects.";
  std::string llm_endpoint;
  std::string llm_model;
  std::string template_id = std::string(rag::kDefaultTemplate);
  bool timing = false;

  // eval
  std::string pairs_file;
  double omega = eval::kDefaultOmega;
  bool multiset = false;
  std::string metric_stop_list = "none";
  std::string correctness_cosine = "tf";

  // geo
  std::string from;
  std::string to;
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

HttpOptions http_options(const EmbedFlags& f) {
  HttpOptions o;
  o.bearer_token = f.api_key;
  o.timeout = std::chrono::milliseconds(f.timeout_ms);
  o.retry.max_attempts = f.retries;
  return o;
}

embedding::EmbedderConfig embedder_config(const EmbedFlags& f) {
  embedding::EmbedderConfig cfg;
  cfg.provider = embedding::parse_provider(f.provider);
  cfg.dim = f.dim;
  cfg.stop_list = f.stop_list;
  cfg.endpoint_url = f.endpoint;
  cfg.model_name = f.model;
  cfg.http = http_options(f);
  if (cfg.provider == embedding::Provider::kBowOneHot) {
    if (f.vocab_file.empty()) throw ConfigError("--embed onehot needs --vocab FILE");
    for (auto& t : text::tokenize(read_text_file(f.vocab_file)).tokens) {
      if (std::find(cfg.vocabulary.begin(), cfg.vocabulary.end(), t) == cfg.vocabulary.end()) {
        cfg.vocabulary.push_back(std::move(t));
      }
    }
    cfg.dim = cfg.vocabulary.size();
  }
  embedding::validate(cfg);
  return cfg;
}

void check_chunking(const ChunkFlags& c) {
  if (c.chunk_size == 0) throw ConfigError("--chunk-size must be at least 1");
  if (c.overlap >= c.chunk_size) throw ConfigError("--overlap must be smaller than --chunk-size");
}

void emit(const Flags& flags, std::ostream& out, const std::string& payload) {
  if (flags.out_file.empty()) {
    out << payload;
    return;
  }
  std::ofstream f(flags.out_file, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write '" + flags.out_file + "'");
  f << payload;
}

/// Opens the collection or prepares a new one; the new one is written only on persist.
store::Collection open_or_new(const DbFlags& db, const embedding::Embedder& embedder, const IndexFlags& idx) {
  if (store::collection_exists(db.db, db.collection)) {
    auto coll = store::open_collection(db.db, db.collection);
    if (coll.manifest().provider != embedder.provider_tag()) {
      throw ConfigError("collection '" + db.collection + "' was built with embedder '" + coll.manifest().provider +
                        "', not '" + embedder.provider_tag() + "'");
    }
    return coll;
  }
  return store::Collection(db.collection, embedder.dim(), embedder.provider_tag(),
                           index::HnswParams{idx.m, idx.ef_construction, idx.ef_search});
}

struct IngestBatch {
  std::vector<std::string> ids;
  std::vector<std::string> texts;
  std::vector<store::Metadata> metadata;
};

std::size_t store_batch(const Flags& flags, const embedding::Embedder& embedder, IngestBatch& batch) {
  auto coll = open_or_new(flags.db, embedder, flags.index);
  auto vectors = embedder.embed(batch.texts);
  std::vector<store::StoredDocument> docs;
  docs.reserve(batch.ids.size());
  for (std::size_t i = 0; i < batch.ids.size(); ++i) {
    docs.push_back({batch.ids[i], batch.texts[i], batch.metadata[i], std::move(vectors[i])});
  }
  coll.add_documents(docs);
  coll.persist(store::collection_path(flags.db.db, flags.db.collection));
  return coll.count();
}

int cmd_ingest_scenes(const Flags& flags, std::ostream& out, std::ostream& err) {
  check_chunking(flags.chunk);
  auto embedder = embedding::make_embedder(embedder_config(flags.embed));
  scene::SceneTextOptions text_options;
  const auto classes = split_csv(flags.vehicle_classes);
  text_options.vehicle_classes = {classes.begin(), classes.end()};
  std::optional<scene::AnnotationEndpoint> annotator;
  if (!flags.annotate_endpoint.empty()) annotator = scene::AnnotationEndpoint{flags.annotate_endpoint, http_options(flags.embed)};

  std::ifstream in(flags.scenes_file, std::ios::binary);
  if (!in) throw ConfigError("cannot read scenes file '" + flags.scenes_file + "'");
  const auto records = scene::parse_scene_records(in);

  IngestBatch batch;
  for (const auto& raw : records) {
    const auto rec = scene::annotate_scene(raw, annotator ? &*annotator : nullptr);
    const auto st = scene::scene_to_text(rec, text_options);
    for (auto& chunk : text::chunk_text(rec.scene_id, st.body, flags.chunk.chunk_size, flags.chunk.overlap)) {
      batch.ids.push_back("scene:" + rec.scene_id + ":" + std::to_string(chunk.chunk_index));
      batch.metadata.push_back(
          {{"source", "scene"}, {"scene_id", rec.scene_id}, {"chunk_index", std::to_string(chunk.chunk_index)}});
      batch.texts.push_back(std::move(chunk.text));
    }
  }

  const std::size_t total = store_batch(flags, *embedder, batch);
  ordered_json summary = {{"command", "ingest-scenes"},
                          {"collection", flags.db.collection},
                          {"records", records.size()},
                          {"chunks", batch.ids.size()},
                          {"vectors", batch.ids.size()},
                          {"collection_count", total}};
  emit(flags, out, summary.dump(2) + "\n");
  err << records.size() << " records, " << batch.ids.size() << " chunks, " << batch.ids.size() << " vectors ("
      << total << " in collection)\n";
  return kExitOk;
}

int cmd_ingest_docs(const Flags& flags, std::ostream& out, std::ostream& err) {
  check_chunking(flags.chunk);
  auto embedder = embedding::make_embedder(embedder_config(flags.embed));
  if (!fs::is_directory(flags.docs_dir)) throw ConfigError("'" + flags.docs_dir + "' is not a directory");

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(flags.docs_dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  IngestBatch batch;
  std::size_t ingested = 0;
  std::size_t skipped = 0;
  for (const auto& path : files) {
    const std::string name = fs::relative(path, flags.docs_dir).generic_string();
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    if (in) ss << in.rdbuf();
    if (!in) {
      err << "warning: skipping unreadable file " << name << "\n";
      ++skipped;
      continue;
    }
    const std::string contents = ss.str();
    if (!text::looks_like_text(contents)) {
      err << "warning: skipping non-text file " << name << "\n";
      ++skipped;
      continue;
    }
    ++ingested;
    for (auto& chunk : text::chunk_text(name, contents, flags.chunk.chunk_size, flags.chunk.overlap)) {
      batch.ids.push_back("doc:" + name + ":" + std::to_string(chunk.chunk_index));
      batch.metadata.push_back({{"source", "doc"}, {"file_name", name}, {"chunk_index", std::to_string(chunk.chunk_index)}});
      batch.texts.push_back(std::move(chunk.text));
    }
  }

  const std::size_t total = store_batch(flags, *embedder, batch);
  ordered_json summary = {{"command", "ingest-docs"},
                          {"collection", flags.db.collection},
                          {"files", ingested},
                          {"skipped", skipped},
                          {"chunks", batch.ids.size()},
                          {"vectors", batch.ids.size()},
                          {"collection_count", total}};
  emit(flags, out, summary.dump(2) + "\n");
  err << ingested << " files, " << skipped << " skipped, " << batch.ids.size() << " chunks\n";
  return kExitOk;
}

std::unique_ptr<rag::Backend> make_backend(const Flags& flags) {
  if (flags.backend == "echo") return std::make_unique<rag::EchoStubBackend>();
  if (flags.backend == "fixed") return std::make_unique<rag::FixedStubBackend>(flags.fixed_answer);
  if (flags.backend == "remote") {
    rag::ChatConfig cfg;
    cfg.endpoint_url = flags.llm_endpoint;
    cfg.model = flags.llm_model;
    cfg.http = http_options(flags.embed);
    return std::make_unique<rag::RemoteChatBackend>(cfg);
  }
  throw ConfigError("unknown backend '" + flags.backend + "' (expected echo, fixed or remote)");
}

int cmd_query(const Flags& flags, std::ostream& out, std::ostream& err) {
  auto embedder = embedding::make_embedder(embedder_config(flags.embed));
  const auto mode = store::parse_search_mode(flags.mode);
  auto backend = make_backend(flags);
  rag::template_text(flags.template_id);
  if (flags.top_k == 0) throw ConfigError("--top-k must be at least 1");

  std::optional<std::string> scene_body;
  if (!flags.scene_file.empty()) {
    std::ifstream in(flags.scene_file, std::ios::binary);
    if (!in) throw ConfigError("cannot read scene file '" + flags.scene_file + "'");
    const auto records = scene::parse_scene_records(in);
    if (records.empty()) throw ConfigError("scene file '" + flags.scene_file + "' holds no records");
    scene::SceneTextOptions opts;
    const auto classes = split_csv(flags.vehicle_classes);
    opts.vehicle_classes = {classes.begin(), classes.end()};
    scene_body = scene::scene_to_text(records.front(), opts).body;
  }

  const std::string query_text = rag::build_query_text(scene_body, flags.question);
  if (!store::collection_exists(flags.db.db, flags.db.collection)) {
    throw ConfigError("no collection '" + flags.db.collection + "' under '" + flags.db.db + "'");
  }
  const auto coll = store::open_collection(flags.db.db, flags.db.collection);
  auto hits = rag::retrieve_context(coll, *embedder, query_text, flags.top_k, mode);
  const auto prompt = rag::compose_prompt(scene_body, hits, flags.question, flags.template_id);
  const auto result = rag::generate(prompt, *backend);

  ordered_json hits_json = ordered_json::array();
  for (const auto& h : prompt.retrieved) {
    hits_json.push_back({{"rank", h.rank},
                         {"id", h.hit.id},
                         {"score", h.hit.score},
                         {"text", h.hit.text},
                         {"metadata", h.hit.metadata}});
  }
  ordered_json report = {{"question", flags.question},
                         {"query_text", query_text},
                         {"collection", flags.db.collection},
                         {"mode", flags.mode},
                         {"top_k", flags.top_k},
                         {"template", prompt.template_id},
                         {"backend", backend->name()},
                         {"hits", std::move(hits_json)},
                         {"prompt", result.prompt_bytes},
                         {"answer", result.answer}};
  if (result.usage) {
    report["usage"] = {{"prompt_tokens", result.usage->prompt_tokens},
                       {"completion_tokens", result.usage->completion_tokens},
                       {"total_tokens", result.usage->total_tokens}};
  }
  if (flags.timing) report["latency_ms"] = result.latency_ms;
  emit(flags, out, report.dump(2) + "\n");

  char latency[32];
  std::snprintf(latency, sizeof latency, "%.3f", result.latency_ms);
  err << prompt.retrieved.size() << " hits, backend " << backend->name() << ", generation " << latency << " ms\n";
  return kExitOk;
}

int cmd_eval(const Flags& flags, std::ostream& out, std::ostream& err) {
  eval::EvalConfig cfg;
  cfg.omega = flags.omega;
  cfg.multiset = flags.multiset;
  cfg.stop_list = flags.metric_stop_list;
  if (flags.correctness_cosine == "tf") {
    cfg.correctness_cosine = eval::CorrectnessCosine::kTermFrequency;
  } else if (flags.correctness_cosine == "embedding") {
    cfg.correctness_cosine = eval::CorrectnessCosine::kEmbedding;
  } else {
    throw ConfigError("--correctness-cosine must be tf or embedding");
  }
  eval::combine_correctness(0.0, 0.0, cfg.omega);
  text::StopList::builtin(cfg.stop_list);
  auto embedder = embedding::make_embedder(embedder_config(flags.embed));

  std::ifstream in(flags.pairs_file, std::ios::binary);
  if (!in) throw ConfigError("cannot read pairs file '" + flags.pairs_file + "'");
  const auto pairs = eval::parse_eval_pairs(in);
  const auto report = eval::evaluate_corpus(pairs, cfg, *embedder);
  emit(flags, out, eval::to_json(report).dump(2) + "\n");

  const auto& agg = report.aggregates;
  err << pairs.size() << " pairs; mean correctness " << agg.at("correctness").mean << ", faithfulness "
      << agg.at("faithfulness").mean << ", similarity " << agg.at("semantic_similarity").mean << "\n";
  return kExitOk;
}

geo::GeoPoint parse_point(const std::string& s, const char* flag) {
  const auto parts = split_csv(s);
  if (parts.size() != 2) throw ConfigError(std::string(flag) + " expects LAT,LON");
  geo::GeoPoint p;
  try {
    std::size_t used = 0;
    p.lat_deg = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument(parts[0]);
    p.lon_deg = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument(parts[1]);
  } catch (const std::logic_error&) {
    throw ConfigError(std::string(flag) + " expects numeric LAT,LON, got '" + s + "'");
  }
  try {
    geo::validate(p);
  } catch (const DomainError& e) {
    throw ConfigError(std::string(flag) + ": " + e.what());
  }
  return p;
}

int cmd_geo(const Flags& flags, bool bearing, std::ostream& out) {
  const auto from = parse_point(flags.from, "--from");
  const auto to = parse_point(flags.to, "--to");
  const double v = bearing ? geo::initial_bearing(from, to) : geo::haversine_distance(from, to);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f\n", v);
  out << buf;
  return kExitOk;
}

int cmd_inspect(const Flags& flags, std::ostream& out) {
  if (!store::collection_exists(flags.db.db, flags.db.collection)) {
    throw ConfigError("no collection '" + flags.db.collection + "' under '" + flags.db.db + "'");
  }
  const auto coll = store::open_collection(flags.db.db, flags.db.collection);
  emit(flags, out, store::to_json(coll.manifest()).dump(2) + "\n");
  return kExitOk;
}

void add_db_options(CLI::App* cmd, DbFlags& f) {
  cmd->add_option("--db", f.db, "Database root directory")->required()->envname("SCENE_RAG_DB");
  cmd->add_option("--collection", f.collection, "Collection name")->required();
}

void add_embed_options(CLI::App* cmd, EmbedFlags& f) {
  cmd->add_option("--embed", f.provider, "Embedding provider: local, onehot or remote")
      ->check(CLI::IsMember({"local", "local-hash", "onehot", "bow-onehot", "remote"}));
  cmd->add_option("--dim", f.dim, "Embedding dimension (local and remote providers)");
  cmd->add_option("--stop-list", f.stop_list, "Stop list applied before local embedding (en-v1 or none)");
  cmd->add_option("--vocab", f.vocab_file, "Vocabulary file for --embed onehot");
  cmd->add_option("--embed-endpoint", f.endpoint, "Embeddings endpoint URL for --embed remote");
  cmd->add_option("--embed-model", f.model, "Model name sent to the embeddings endpoint");
  cmd->add_option("--api-key", f.api_key, "Bearer token for remote endpoints")->envname(kApiKeyEnvVar);
  cmd->add_option("--timeout-ms", f.timeout_ms, "Per-request timeout for remote endpoints");
  cmd->add_option("--retries", f.retries, "Attempts per remote request")->check(CLI::PositiveNumber);
}

void add_chunk_options(CLI::App* cmd, ChunkFlags& f) {
  cmd->add_option("--chunk-size", f.chunk_size, "Tokens per chunk");
  cmd->add_option("--overlap", f.overlap, "Tokens shared by consecutive chunks");
}

void add_index_options(CLI::App* cmd, IndexFlags& f) {
  cmd->add_option("--hnsw-m", f.m, "HNSW links per node (new collections)");
  cmd->add_option("--ef-construction", f.ef_construction, "HNSW build beam width (new collections)");
  cmd->add_option("--ef-search", f.ef_search, "HNSW query beam width (new collections)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Retrieval-augmented perception over wireless sensor scenes", "scene-rag"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  Flags flags;

  auto* ingest_scenes = app.add_subcommand("ingest-scenes", "Fuse scene records to text and add them to a collection");
  add_db_options(ingest_scenes, flags.db);
  ingest_scenes->add_option("--scenes", flags.scenes_file, "Scene records, one JSON object per line")->required();
  ingest_scenes->add_option("--vehicle-classes", flags.vehicle_classes, "Comma-separated classes counted as vehicles");
  ingest_scenes->add_option("--annotate-endpoint", flags.annotate_endpoint, "Caption service for records without a camera caption");
  add_embed_options(ingest_scenes, flags.embed);
  add_chunk_options(ingest_scenes, flags.chunk);
  add_index_options(ingest_scenes, flags.index);
  ingest_scenes->add_option("--out", flags.out_file, "Write the summary here instead of stdout");

  auto* ingest_docs = app.add_subcommand("ingest-docs", "Chunk and add plain-text documents to a collection");
  add_db_options(ingest_docs, flags.db);
  ingest_docs->add_option("--dir", flags.docs_dir, "Directory of text files")->required();
  add_embed_options(ingest_docs, flags.embed);
  add_chunk_options(ingest_docs, flags.chunk);
  add_index_options(ingest_docs, flags.index);
  ingest_docs->add_option("--out", flags.out_file, "Write the summary here instead of stdout");

  auto* query = app.add_subcommand("query", "Retrieve context, compose the prompt and generate an answer");
  add_db_options(query, flags.db);
  query->add_option("--question", flags.question, "Question to answer")->required();
  query->add_option("--scene", flags.scene_file, "Scene record file; the first record becomes scene context");
  query->add_option("--vehicle-classes", flags.vehicle_classes, "Comma-separated classes counted as vehicles");
  query->add_option("--top-k", flags.top_k, "Retrieved chunks");
  query->add_option("--mode", flags.mode, "Search mode")->check(CLI::IsMember({"exact", "ann"}));
  query->add_option("--backend", flags.backend, "Generator backend")->check(CLI::IsMember({"echo", "fixed", "remote"}));
  query->add_option("--fixed-answer", flags.fixed_answer, "Answer returned by --backend fixed");
  query->add_option("--llm-endpoint", flags.llm_endpoint, "Chat-completions endpoint URL for --backend remote");
  query->add_option("--llm-model", flags.llm_model, "Model name for --backend remote");
  query->add_option("--template", flags.template_id, "Prompt template id");
  query->add_flag("--timing", flags.timing, "Include generation latency in the report");
  add_embed_options(query, flags.embed);
  query->add_option("--out", flags.out_file, "Write the report here instead of stdout");

  auto* evalc = app.add_subcommand("eval", "Score response/ground-truth pairs");
  evalc->add_option("--pairs", flags.pairs_file, "Pairs file, one JSON object per line")->required();
  evalc->add_option("--omega", flags.omega, "Weight of the cosine term in correctness")->check(CLI::Range(0.0, 1.0));
  evalc->add_flag("--multiset", flags.multiset, "Count repeated tokens in overlap metrics");
  evalc->add_option("--metric-stop-list", flags.metric_stop_list, "Stop list applied to metric token sets");
  evalc->add_option("--correctness-cosine", flags.correctness_cosine, "Cosine used inside correctness: tf or embedding");
  add_embed_options(evalc, flags.embed);
  evalc->add_option("--out", flags.out_file, "Write the report here instead of stdout");

  auto* geoc = app.add_subcommand("geo", "Great-circle distance (km) or initial bearing (degrees)");
  geoc->require_subcommand(1);
  auto* dist = geoc->add_subcommand("dist", "Haversine distance in kilometres");
  auto* bearing = geoc->add_subcommand("bearing", "Initial bearing in degrees, [0, 360)");
  for (auto* sub : {dist, bearing}) {
    sub->add_option("--from", flags.from, "Origin as LAT,LON")->required();
    sub->add_option("--to", flags.to, "Destination as LAT,LON")->required();
  }

  auto* inspect = app.add_subcommand("inspect", "Print a collection manifest");
  add_db_options(inspect, flags.db);

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "scene-rag: error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (ingest_scenes->parsed()) return cmd_ingest_scenes(flags, out, err);
    if (ingest_docs->parsed()) return cmd_ingest_docs(flags, out, err);
    if (query->parsed()) return cmd_query(flags, out, err);
    if (evalc->parsed()) return cmd_eval(flags, out, err);
    if (dist->parsed()) return cmd_geo(flags, false, out);
    if (bearing->parsed()) return cmd_geo(flags, true, out);
    if (inspect->parsed()) return cmd_inspect(flags, out);
  } catch (const ConfigError& e) {
    err << "scene-rag: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "scene-rag: error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace scenerag::cli
