#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "rotlab/geometry.hpp"

namespace rotlab::geometry {

// Bucket grid on the torus for radius queries among many points.
class TorusPointIndex {
 public:
  explicit TorusPointIndex(double cell = 1.0 / 64);

  void insert(Vec2 p, std::uint32_t tag);
  std::size_t size() const { return pts_.size(); }

  struct Hit {
    std::uint32_t tag;
    double distance;
    Vec2 point;
  };
  // Nearest stored point within radius, ignoring entries with tag == skip.
  std::optional<Hit> nearest_within(Vec2 p, double radius,
                                    std::optional<std::uint32_t> skip = std::nullopt) const;
  bool any_within(Vec2 p, double radius, std::optional<std::uint32_t> skip = std::nullopt) const {
    return nearest_within(p, radius, skip).has_value();
  }

  // Calls fn(tag, point) for every stored point whose cell meets the
  // wrapped box [lo, hi]; the box must be narrower than 1.
  template <class Fn>
  void visit_box(Vec2 lo, Vec2 hi, Fn&& fn) const {
    long i0 = static_cast<long>(std::floor(lo.x / cell_)), i1 = static_cast<long>(std::floor(hi.x / cell_));
    long j0 = static_cast<long>(std::floor(lo.y / cell_)), j1 = static_cast<long>(std::floor(hi.y / cell_));
    i1 = std::min(i1, i0 + n_ - 1);
    j1 = std::min(j1, j0 + n_ - 1);
    for (long i = i0; i <= i1; ++i)
      for (long j = j0; j <= j1; ++j) {
        auto it = buckets_.find(key(i, j));
        if (it == buckets_.end()) continue;
        for (std::uint32_t k : it->second) fn(tags_[k], pts_[k]);
      }
  }

 private:
  std::uint64_t key(long i, long j) const;
  double cell_;
  long n_;
  std::vector<Vec2> pts_;
  std::vector<std::uint32_t> tags_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets_;
};

}  // namespace rotlab::geometry
