#include "qml/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

namespace qml {

Region::Region(std::initializer_list<int> sites)
    : Region(std::vector<int>(sites)) {}

Region::Region(std::vector<int> sites) : sites_(std::move(sites)) {
  std::sort(sites_.begin(), sites_.end());
  sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
  if (!sites_.empty() && sites_.front() < 0)
    throw Error("bad-region", "negative site index");
}

bool Region::contains(int site) const {
  return std::binary_search(sites_.begin(), sites_.end(), site);
}

bool Region::contains(const Region& other) const {
  return std::includes(sites_.begin(), sites_.end(), other.sites_.begin(),
                       other.sites_.end());
}

Region Region::unite(const Region& other) const {
  std::vector<int> out;
  std::set_union(sites_.begin(), sites_.end(), other.sites_.begin(),
                 other.sites_.end(), std::back_inserter(out));
  return Region(std::move(out));
}

Region Region::intersect(const Region& other) const {
  std::vector<int> out;
  std::set_intersection(sites_.begin(), sites_.end(), other.sites_.begin(),
                        other.sites_.end(), std::back_inserter(out));
  return Region(std::move(out));
}

Region Region::subtract(const Region& other) const {
  std::vector<int> out;
  std::set_difference(sites_.begin(), sites_.end(), other.sites_.begin(),
                      other.sites_.end(), std::back_inserter(out));
  return Region(std::move(out));
}

std::string Region::to_string() const {
  std::ostringstream os;
  os << "{";
  for (size_t k = 0; k < sites_.size(); ++k) os << (k ? "," : "") << sites_[k];
  os << "}";
  return os.str();
}

Lattice::Lattice(int n, std::vector<std::pair<int, int>> edges, int local_dim,
                 GeometryTag tag)
    : n_sites_(n), edges_(std::move(edges)), local_dims_(n, local_dim), tag_(tag) {
  if (n <= 0) throw Error("bad-lattice", "need at least one site");
  if (local_dim < 2) throw Error("bad-lattice", "local_dim must be >= 2");
  compute_distances();
  for (int i = 0; i < n_sites_; ++i)
    for (int j = 0; j < n_sites_; ++j)
      if (dist_[i][j] < 0) throw Error("bad-lattice", "graph is disconnected");
}

Lattice Lattice::chain(int n, bool periodic, int local_dim) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  if (periodic && n > 2) edges.emplace_back(n - 1, 0);
  return Lattice(n, std::move(edges),
                 local_dim, periodic ? GeometryTag::ChainPeriodic
                                     : GeometryTag::ChainOpen);
}

Lattice Lattice::grid2d(int rows, int cols, int local_dim) {
  if (rows * cols > 12 || rows > 4 || cols > 4)
    throw Error("too-large", "2D grids limited to small rectangles");
  std::vector<std::pair<int, int>> edges;
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
    }
  return Lattice(rows * cols, std::move(edges), local_dim, GeometryTag::Grid2d);
}

void Lattice::compute_distances() {
  dist_.assign(n_sites_, std::vector<int>(n_sites_, -1));
  std::vector<std::vector<int>> adj(n_sites_);
  for (auto [a, b] : edges_) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (int s = 0; s < n_sites_; ++s) {
    std::deque<int> q{s};
    dist_[s][s] = 0;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int v : adj[u])
        if (dist_[s][v] < 0) {
          dist_[s][v] = dist_[s][u] + 1;
          q.push_back(v);
        }
    }
  }
}

int Lattice::diameter() const {
  int d = 0;
  for (int i = 0; i < n_sites_; ++i)
    for (int j = 0; j < n_sites_; ++j) d = std::max(d, dist_[i][j]);
  return d;
}

Region Lattice::all_sites() const {
  std::vector<int> v(n_sites_);
  for (int i = 0; i < n_sites_; ++i) v[i] = i;
  return Region(std::move(v));
}

Region Lattice::complement(const Region& x) const {
  std::vector<int> out;
  for (int i = 0; i < n_sites_; ++i)
    if (!x.contains(i)) out.push_back(i);
  return Region(std::move(out));
}

bool Lattice::adjacent(int i, int j) const { return dist_[i][j] == 1; }

std::string Lattice::to_string() const {
  std::ostringstream os;
  os << "lattice(n=" << n_sites_ << ", edges=" << edges_.size() << ")";
  return os.str();
}

int distance(const Lattice& lat, const Region& x, const Region& y) {
  if (x.empty() || y.empty()) throw Error("empty-region", "distance");
  int best = std::numeric_limits<int>::max();
  for (int a : x)
    for (int b : y) best = std::min(best, lat.distance(a, b));
  return best;
}

Region extend_region(const Lattice& lat, const Region& x, int r) {
  if (x.empty()) throw Error("empty-region", "extend_region");
  std::vector<int> out;
  for (int i = 0; i < lat.n_sites(); ++i) {
    int d = std::numeric_limits<int>::max();
    for (int a : x) d = std::min(d, lat.distance(a, i));
    if (d <= r) out.push_back(i);
  }
  return Region(std::move(out));
}

Region boundary(const Lattice& lat, const Region& x) {
  if (x.empty()) throw Error("empty-region", "boundary");
  Region comp = lat.complement(x);
  if (comp.empty()) throw Error("no-complement", "boundary of the full lattice");
  std::vector<int> out;
  for (int a : x) {
    int d = std::numeric_limits<int>::max();
    for (int b : comp) d = std::min(d, lat.distance(a, b));
    if (d == 1) out.push_back(a);
  }
  return Region(std::move(out));
}

double measured_gamma(const Lattice& lat) {
  // gamma >= 1 with |boundary(i[r])| <= gamma r^{D-1} and |i[r]| <= gamma r^D.
  double g = 1.0;
  int dim = lat.spatial_dim();
  for (int i = 0; i < lat.n_sites(); ++i) {
    for (int r = 1; r <= lat.diameter(); ++r) {
      Region ball = extend_region(lat, Region{i}, r);
      double surf = 0;
      if (ball.size() < lat.n_sites()) surf = boundary(lat, ball).size();
      g = std::max(g, surf / std::pow(double(r), dim - 1));
      g = std::max(g, double(ball.size()) / std::pow(double(r), dim));
    }
  }
  return g;
}

}  // namespace qml
