#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace scenerag::index {

struct HnswParams {
  std::size_t m = 16;
  std::size_t ef_construction = 200;
  std::size_t ef_search = 64;

  friend bool operator==(const HnswParams&, const HnswParams&) = default;
};

struct Neighbor {
  float distance = 0.0f;  // cosine distance, 1 - cos
  std::uint32_t id = 0;
};

/// Hierarchical navigable small-world graph over cosine distance. Node ids are
/// assigned densely in insertion order. Construction is deterministic for a fixed
/// seed and insertion sequence. `search` is const and safe to call concurrently;
/// `add` requires exclusive access.
class HnswIndex {
 public:
  HnswIndex(std::size_t dim, HnswParams params, std::uint64_t seed = kDefaultSeed);

  static constexpr std::uint64_t kDefaultSeed = 0x9e3779b97f4a7c15ULL;

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return levels_.size(); }
  const HnswParams& params() const noexcept { return params_; }

  /// Inserts a vector and returns its id.
  std::uint32_t add(std::span<const float> vec);
  void reserve(std::size_t n);

  /// Up to `k` nearest ids sorted by ascending distance; `ef` widens the beam.
  std::vector<Neighbor> search(std::span<const float> query, std::size_t k, std::size_t ef) const;

 private:
  using LinkList = std::vector<std::uint32_t>;

  const float* vec(std::uint32_t id) const { return data_.data() + static_cast<std::size_t>(id) * dim_; }
  float distance(const float* a, const float* b) const;
  int random_level();
  std::uint32_t greedy_descend(const float* q, std::uint32_t entry, int from_level, int to_level) const;
  std::vector<Neighbor> search_layer(const float* q, std::uint32_t entry, std::size_t ef, int level) const;
  std::vector<Neighbor> select_neighbors(std::vector<Neighbor> candidates, std::size_t m) const;
  std::size_t max_links(int level) const { return level == 0 ? params_.m * 2 : params_.m; }

  std::size_t dim_;
  HnswParams params_;
  double level_mult_;
  std::uint64_t rng_state_;
  std::vector<float> data_;  // unit-normalised rows
  std::vector<int> levels_;
  std::vector<std::vector<LinkList>> links_;  // links_[node][level]
  std::int64_t entry_ = -1;
  int max_level_ = -1;
};

}  // namespace scenerag::index
