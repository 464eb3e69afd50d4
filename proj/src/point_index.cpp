#include "rotlab/point_index.hpp"

#include <cmath>

namespace rotlab::geometry {

TorusPointIndex::TorusPointIndex(double cell) {
  n_ = std::max(1L, std::min(4096L, static_cast<long>(std::ceil(1.0 / cell))));
  cell_ = 1.0 / static_cast<double>(n_);
}

std::uint64_t TorusPointIndex::key(long i, long j) const {
  i = ((i % n_) + n_) % n_;
  j = ((j % n_) + n_) % n_;
  return static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n_) + static_cast<std::uint64_t>(j);
}

void TorusPointIndex::insert(Vec2 p, std::uint32_t tag) {
  TorusPoint q = TorusPoint::from(p);
  auto idx = static_cast<std::uint32_t>(pts_.size());
  pts_.push_back(q.vec());
  tags_.push_back(tag);
  buckets_[key(static_cast<long>(q.x / cell_), static_cast<long>(q.y / cell_))].push_back(idx);
}

std::optional<TorusPointIndex::Hit> TorusPointIndex::nearest_within(
    Vec2 p, double radius, std::optional<std::uint32_t> skip) const {
  TorusPoint q = TorusPoint::from(p);
  long ci = static_cast<long>(q.x / cell_), cj = static_cast<long>(q.y / cell_);
  long reach = std::min(n_ / 2 + 1, static_cast<long>(std::ceil(radius / cell_)));
  std::optional<Hit> best;
  for (long di = -reach; di <= reach; ++di) {
    for (long dj = -reach; dj <= reach; ++dj) {
      auto it = buckets_.find(key(ci + di, cj + dj));
      if (it == buckets_.end()) continue;
      for (std::uint32_t k : it->second) {
        if (skip && tags_[k] == *skip) continue;
        double d = torus_distance(q.vec(), pts_[k]);
        if (d < radius && (!best || d < best->distance)) best = Hit{tags_[k], d, pts_[k]};
      }
    }
  }
  return best;
}

}  // namespace rotlab::geometry
