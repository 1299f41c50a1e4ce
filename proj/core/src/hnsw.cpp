#include "scenerag/hnsw.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "scenerag/errors.hpp"

namespace scenerag::index {
namespace {

struct FartherFirst {
  bool operator()(const Neighbor& a, const Neighbor& b) const {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  }
};
struct CloserFirst {
  bool operator()(const Neighbor& a, const Neighbor& b) const {
    return a.distance > b.distance || (a.distance == b.distance && a.id > b.id);
  }
};

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

HnswIndex::HnswIndex(std::size_t dim, HnswParams params, std::uint64_t seed)
    : dim_(dim), params_(params), rng_state_(seed) {
  if (dim_ == 0) throw ConfigError("index dimension must be at least 1");
  if (params_.m < 2) throw ConfigError("HNSW M must be at least 2");
  if (params_.ef_construction < 1 || params_.ef_search < 1) throw ConfigError("HNSW ef values must be at least 1");
  level_mult_ = 1.0 / std::log(static_cast<double>(params_.m));
}

void HnswIndex::reserve(std::size_t n) {
  data_.reserve(n * dim_);
  levels_.reserve(n);
  links_.reserve(n);
}

float HnswIndex::distance(const float* a, const float* b) const {
  float dot = 0.0f;
  for (std::size_t i = 0; i < dim_; ++i) dot += a[i] * b[i];
  return 1.0f - dot;
}

int HnswIndex::random_level() {
  // uniform in (0, 1]
  const double u = static_cast<double>((splitmix64(rng_state_) >> 11) + 1) * 0x1.0p-53;
  return static_cast<int>(std::floor(-std::log(u) * level_mult_));
}

std::uint32_t HnswIndex::greedy_descend(const float* q, std::uint32_t entry, int from_level, int to_level) const {
  std::uint32_t cur = entry;
  float cur_dist = distance(q, vec(cur));
  for (int level = from_level; level > to_level; --level) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::uint32_t n : links_[cur][level]) {
        const float d = distance(q, vec(n));
        if (d < cur_dist) {
          cur_dist = d;
          cur = n;
          changed = true;
        }
      }
    }
  }
  return cur;
}

std::vector<Neighbor> HnswIndex::search_layer(const float* q, std::uint32_t entry, std::size_t ef, int level) const {
  std::vector<bool> visited(size(), false);
  std::priority_queue<Neighbor, std::vector<Neighbor>, CloserFirst> candidates;
  std::priority_queue<Neighbor, std::vector<Neighbor>, FartherFirst> found;

  const Neighbor start{distance(q, vec(entry)), entry};
  visited[entry] = true;
  candidates.push(start);
  found.push(start);

  while (!candidates.empty()) {
    const Neighbor c = candidates.top();
    if (c.distance > found.top().distance && found.size() >= ef) break;
    candidates.pop();
    for (std::uint32_t n : links_[c.id][level]) {
      if (visited[n]) continue;
      visited[n] = true;
      const float d = distance(q, vec(n));
      if (found.size() < ef || d < found.top().distance) {
        candidates.push({d, n});
        found.push({d, n});
        if (found.size() > ef) found.pop();
      }
    }
  }

  std::vector<Neighbor> out;
  out.reserve(found.size());
  while (!found.empty()) {
    out.push_back(found.top());
    found.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

// Keeps a candidate only if it is closer to the base point than to every
// neighbour already kept, which spreads links across directions.
std::vector<Neighbor> HnswIndex::select_neighbors(std::vector<Neighbor> candidates, std::size_t m) const {
  std::sort(candidates.begin(), candidates.end(), closer);
  if (candidates.size() <= m) return candidates;
  std::vector<Neighbor> kept;
  kept.reserve(m);
  for (const auto& c : candidates) {
    if (kept.size() >= m) break;
    bool diverse = true;
    for (const auto& k : kept) {
      if (distance(vec(c.id), vec(k.id)) < c.distance) {
        diverse = false;
        break;
      }
    }
    if (diverse) kept.push_back(c);
  }
  return kept;
}

std::uint32_t HnswIndex::add(std::span<const float> v) {
  if (v.size() != dim_) throw DimensionMismatchError(dim_, v.size());
  const auto id = static_cast<std::uint32_t>(size());

  double sq = 0.0;
  for (float x : v) sq += static_cast<double>(x) * x;
  const double inv = sq > 0.0 ? 1.0 / std::sqrt(sq) : 0.0;
  for (float x : v) data_.push_back(static_cast<float>(x * inv));

  const int level = random_level();
  levels_.push_back(level);
  links_.emplace_back(static_cast<std::size_t>(level) + 1);

  if (entry_ < 0) {
    entry_ = id;
    max_level_ = level;
    return id;
  }

  const float* q = vec(id);
  std::uint32_t cur = greedy_descend(q, static_cast<std::uint32_t>(entry_), max_level_, level);

  for (int l = std::min(level, max_level_); l >= 0; --l) {
    auto found = search_layer(q, cur, params_.ef_construction, l);
    cur = found.front().id;
    auto neighbors = select_neighbors(std::move(found), params_.m);

    auto& own = links_[id][l];
    own.reserve(neighbors.size());
    for (const auto& n : neighbors) own.push_back(n.id);

    const std::size_t cap = max_links(l);
    for (const auto& n : neighbors) {
      auto& theirs = links_[n.id][l];
      if (theirs.size() < cap) {
        theirs.push_back(id);
        continue;
      }
      std::vector<Neighbor> pool;
      pool.reserve(theirs.size() + 1);
      const float* base = vec(n.id);
      for (std::uint32_t t : theirs) pool.push_back({distance(base, vec(t)), t});
      pool.push_back({distance(base, q), id});
      auto pruned = select_neighbors(std::move(pool), cap);
      theirs.clear();
      for (const auto& p : pruned) theirs.push_back(p.id);
    }
  }

  if (level > max_level_) {
    max_level_ = level;
    entry_ = id;
  }
  return id;
}

std::vector<Neighbor> HnswIndex::search(std::span<const float> query, std::size_t k, std::size_t ef) const {
  if (query.size() != dim_) throw DimensionMismatchError(dim_, query.size());
  if (entry_ < 0 || k == 0) return {};

  std::vector<float> q(query.begin(), query.end());
  double sq = 0.0;
  for (float x : q) sq += static_cast<double>(x) * x;
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (float& x : q) x = static_cast<float>(x * inv);
  }

  const std::uint32_t entry = greedy_descend(q.data(), static_cast<std::uint32_t>(entry_), max_level_, 0);
  auto found = search_layer(q.data(), entry, std::max(ef, k), 0);
  if (found.size() > k) found.resize(k);
  return found;
}

}  // namespace scenerag::index
