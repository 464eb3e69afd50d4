#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "rotlab/dynamics.hpp"
#include "rotlab/error.hpp"

namespace rotlab::dynamics {

using geometry::point_polyline_distance;
using geometry::polyline_length;
using geometry::polyline_polyline_distance;

double bump_profile(double t) {
  if (t >= 1.0) return 0.0;
  if (t <= 0.0) return 1.0;
  return 1.0 - t * t * (3.0 - 2.0 * t);
}

BumpMove::BumpMove(std::vector<Vec2> path, double radius, int submoves) : radius_(radius) {
  if (path.size() < 2) throw Error(ErrorKind::InvalidArgument, "bump", "path needs at least two points");
  for (Vec2 p : path)
    if (!p.finite()) throw Error(ErrorKind::InvalidArgument, "bump", "non-finite path point");
  if (!(radius > 0.0 && radius < 0.25))
    throw Error(ErrorKind::InvalidArgument, "bump", "support radius must lie in (0, 1/4)");
  Vec2 a = geometry::floor(path.front());
  for (Vec2& p : path) p -= a;
  path_ = std::move(path);
  double len = polyline_length(path_);
  if (!(len > 0.0)) throw Error(ErrorKind::InvalidArgument, "bump", "path has zero length");
  int K = submoves > 0 ? submoves
                       : std::max(1, static_cast<int>(std::ceil(len / (kSubmoveFraction * radius) - 1e-12)));

  nodes_.reserve(K + 1);
  nodes_.push_back(path_.front());
  std::size_t seg = 1;
  double before = 0.0;
  for (int k = 1; k < K; ++k) {
    double s = len * k / K;
    while (seg + 1 < path_.size() && before + (path_[seg] - path_[seg - 1]).norm() < s) {
      before += (path_[seg] - path_[seg - 1]).norm();
      ++seg;
    }
    Vec2 d = path_[seg] - path_[seg - 1];
    double l = d.norm();
    double u = l > 0.0 ? std::clamp((s - before) / l, 0.0, 1.0) : 0.0;
    nodes_.push_back(path_[seg - 1] + u * d);
  }
  nodes_.push_back(path_.back());

  lo_ = hi_ = path_.front();
  for (Vec2 p : path_) {
    lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y)};
    hi_ = {std::max(hi_.x, p.x), std::max(hi_.y, p.y)};
  }
  lo_ -= Vec2{radius, radius};
  hi_ += Vec2{radius, radius};
  if (hi_.x - lo_.x >= 1.0 || hi_.y - lo_.y >= 1.0)
    throw Error(ErrorKind::InvalidArgument, "bump", "support does not fit in a fundamental domain");
}

double BumpMove::length() const { return polyline_length(path_); }

double BumpMove::lipschitz_bound() const {
  double m = 0.0;
  for (std::size_t k = 1; k < nodes_.size(); ++k) m = std::max(m, (nodes_[k] - nodes_[k - 1]).norm());
  return kBumpSlope * m / radius_;
}

bool BumpMove::locate(Vec2 w, Vec2& m) const {
  double mx = std::ceil(w.x - hi_.x), my = std::ceil(w.y - hi_.y);
  if (w.x - mx < lo_.x || w.y - my < lo_.y) return false;
  m = {mx, my};
  return point_polyline_distance(w - m, path_) < radius_;
}

Vec2 BumpMove::submove_displacement(int k, Vec2 z) const {
  double d = point_polyline_distance(z, path_);
  if (d >= radius_) return {0.0, 0.0};
  return bump_profile(d / radius_) * (nodes_[k + 1] - nodes_[k]);
}

Vec2 BumpMove::apply(Vec2 w) const {
  Vec2 m;
  if (!locate(w, m)) return w;
  Vec2 z = w - m;
  for (int k = 0; k + 1 < static_cast<int>(nodes_.size()); ++k) z += submove_displacement(k, z);
  return z + m;
}

Vec2 BumpMove::apply_inverse(Vec2 w) const {
  Vec2 m;
  if (!locate(w, m)) return w;
  Vec2 z = w - m;
  for (int k = static_cast<int>(nodes_.size()) - 2; k >= 0; --k) {
    // x + delta_k(x) = z; delta_k is a contraction
    Vec2 x = z;
    bool done = false;
    for (int it = 0; it < 400; ++it) {
      Vec2 nx = z - submove_displacement(k, x);
      if ((nx - x).norm() <= 1e-15 * (1.0 + x.norm())) {
        x = nx;
        done = true;
        break;
      }
      x = nx;
    }
    if (!done) throw Error(ErrorKind::Closing, "bump", "sub-move inverse did not converge");
    z = x;
  }
  return z + m;
}

double torus_path_distance(const BumpMove& a, const BumpMove& b) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<Vec2> q(b.path().size());
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j) {
      for (std::size_t k = 0; k < q.size(); ++k) q[k] = b.path()[k] + Vec2{double(i), double(j)};
      best = std::min(best, polyline_polyline_distance(a.path(), q));
    }
  return best;
}

std::vector<std::pair<std::size_t, std::size_t>> overlapping_supports(const std::vector<BumpMove>& moves) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (moves.size() < 2) return out;
  std::vector<double> ext;
  for (const auto& m : moves) ext.push_back(std::max(m.box_hi().x - m.box_lo().x, m.box_hi().y - m.box_lo().y));
  std::nth_element(ext.begin(), ext.begin() + ext.size() / 2, ext.end());
  const int cells = std::clamp(static_cast<int>(0.5 / ext[ext.size() / 2]), 4, 512);
  std::vector<std::vector<std::size_t>> buckets(static_cast<std::size_t>(cells * cells));
  for (std::size_t k = 0; k < moves.size(); ++k) {
    Vec2 lo = moves[k].box_lo(), hi = moves[k].box_hi();
    int i0 = static_cast<int>(std::floor(lo.x * cells)), i1 = static_cast<int>(std::floor(hi.x * cells));
    int j0 = static_cast<int>(std::floor(lo.y * cells)), j1 = static_cast<int>(std::floor(hi.y * cells));
    i1 = std::min(i1, i0 + cells - 1);
    j1 = std::min(j1, j0 + cells - 1);
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j) {
        int ii = ((i % cells) + cells) % cells, jj = ((j % cells) + cells) % cells;
        buckets[static_cast<std::size_t>(ii * cells + jj)].push_back(k);
      }
  }
  // overlapping supports share a bucket
  std::unordered_set<std::uint64_t> seen;
  for (const auto& b : buckets)
    for (std::size_t x = 0; x < b.size(); ++x)
      for (std::size_t y = x + 1; y < b.size(); ++y) {
        std::size_t i = b[x], j = b[y];
        if (!seen.insert(static_cast<std::uint64_t>(i) * moves.size() + j).second) continue;
        if (torus_path_distance(moves[i], moves[j]) <= moves[i].radius() + moves[j].radius()) out.emplace_back(i, j);
      }
  std::sort(out.begin(), out.end());
  return out;
}

CompositePerturbation::CompositePerturbation(std::vector<BumpMove> moves) : moves_(std::move(moves)) {
  std::vector<double> ext;
  for (std::size_t i = 0; i < moves_.size(); ++i) {
    const BumpMove& a = moves_[i];
    if (a.lipschitz_bound() >= 0.9)
      throw Error(ErrorKind::Closing, "perturbation",
                  "move " + std::to_string(i) + " exceeds the invertibility budget");
    c0_ = std::max(c0_, a.length());
    ext.push_back(std::max(a.box_hi().x - a.box_lo().x, a.box_hi().y - a.box_lo().y));
  }
  auto bad = overlapping_supports(moves_);
  if (!bad.empty())
    throw Error(ErrorKind::Closing, "perturbation",
                "supports of moves " + std::to_string(bad[0].first) + " and " + std::to_string(bad[0].second) +
                    " overlap");
  if (!ext.empty()) {
    std::nth_element(ext.begin(), ext.begin() + ext.size() / 2, ext.end());
    cells_ = std::clamp(static_cast<int>(0.5 / ext[ext.size() / 2]), 16, 512);
  }
  build_index();
}

void CompositePerturbation::build_index() {
  buckets_.assign(static_cast<std::size_t>(cells_ * cells_), {});
  for (std::size_t k = 0; k < moves_.size(); ++k) {
    Vec2 lo = moves_[k].box_lo(), hi = moves_[k].box_hi();
    int i0 = static_cast<int>(std::floor(lo.x * cells_)), i1 = static_cast<int>(std::floor(hi.x * cells_));
    int j0 = static_cast<int>(std::floor(lo.y * cells_)), j1 = static_cast<int>(std::floor(hi.y * cells_));
    i1 = std::min(i1, i0 + cells_ - 1);
    j1 = std::min(j1, j0 + cells_ - 1);
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j) {
        int ii = ((i % cells_) + cells_) % cells_, jj = ((j % cells_) + cells_) % cells_;
        buckets_[static_cast<std::size_t>(ii * cells_ + jj)].push_back(static_cast<int>(k));
      }
  }
}

std::vector<int> CompositePerturbation::candidates(Vec2 w) const {
  if (moves_.empty()) return {};
  TorusPoint p = TorusPoint::from(w);
  int i = std::min(cells_ - 1, static_cast<int>(p.x * cells_));
  int j = std::min(cells_ - 1, static_cast<int>(p.y * cells_));
  return buckets_[static_cast<std::size_t>(i * cells_ + j)];
}

int CompositePerturbation::support_of(Vec2 w) const {
  for (int k : candidates(w))
    if (moves_[static_cast<std::size_t>(k)].in_support(w)) return k;
  return -1;
}

Vec2 CompositePerturbation::apply(Vec2 w) const {
  // moves in list order; with disjoint supports at most one acts
  for (int k : candidates(w)) {
    const BumpMove& b = moves_[static_cast<std::size_t>(k)];
    if (b.in_support(w)) w = b.apply(w);
  }
  return w;
}

Vec2 CompositePerturbation::apply_inverse(Vec2 w) const {
  std::vector<int> c = candidates(w);
  for (auto it = c.rbegin(); it != c.rend(); ++it) {
    const BumpMove& b = moves_[static_cast<std::size_t>(*it)];
    if (b.in_support(w)) w = b.apply_inverse(w);
  }
  return w;
}

PerturbedMap::PerturbedMap(MapPtr base, CompositePerturbation pert)
    : base_(std::move(base)), pert_(std::move(pert)) {}

Vec2 PerturbedMap::forward(Vec2 z) const { return pert_.apply(base_->forward(z)); }

Vec2 PerturbedMap::inverse(Vec2 z) const { return base_->inverse(pert_.apply_inverse(z)); }

double PerturbedMap::displacement_bound() const {
  return base_->displacement_bound() + pert_.c0_distance();
}

std::vector<Vec2> PerturbedMap::known_fixed_points() const {
  std::vector<Vec2> out;
  for (Vec2 p : base_->known_fixed_points())
    if (pert_.support_of(base_->forward(p)) < 0) out.push_back(p);
  return out;
}

MapPtr compose_with_perturbation(MapPtr f, CompositePerturbation pert) {
  if (pert.empty()) return f;
  return std::make_shared<PerturbedMap>(std::move(f), std::move(pert));
}

}  // namespace rotlab::dynamics
