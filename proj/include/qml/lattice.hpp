#pragma once

#include <string>
#include <vector>

#include "qml/error.hpp"

namespace qml {

// Ordered site subset. Canonical form: strictly increasing, no duplicates.
class Region {
 public:
  Region() = default;
  Region(std::initializer_list<int> sites);
  explicit Region(std::vector<int> sites);

  const std::vector<int>& sites() const { return sites_; }
  int size() const { return static_cast<int>(sites_.size()); }
  bool empty() const { return sites_.empty(); }
  int operator[](int k) const { return sites_[k]; }
  bool contains(int site) const;
  bool contains(const Region& other) const;

  Region unite(const Region& other) const;
  Region intersect(const Region& other) const;
  Region subtract(const Region& other) const;

  bool operator==(const Region& other) const { return sites_ == other.sites_; }
  bool operator!=(const Region& other) const { return sites_ != other.sites_; }

  auto begin() const { return sites_.begin(); }
  auto end() const { return sites_.end(); }

  std::string to_string() const;

 private:
  std::vector<int> sites_;
};

enum class GeometryTag { ChainOpen, ChainPeriodic, Grid2d };

// Finite lattice with path-metric distances (BFS, cached at construction).
class Lattice {
 public:
  static Lattice chain(int n, bool periodic = false, int local_dim = 2);
  // Small rectangles only (dense engine limits the pairwise-Markov runs).
  static Lattice grid2d(int rows, int cols, int local_dim = 2);

  int n_sites() const { return n_sites_; }
  int local_dim(int site) const { return local_dims_[site]; }
  const std::vector<int>& local_dims() const { return local_dims_; }
  GeometryTag geometry() const { return tag_; }
  int spatial_dim() const { return tag_ == GeometryTag::Grid2d ? 2 : 1; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  int distance(int i, int j) const { return dist_[i][j]; }
  int diameter() const;

  Region all_sites() const;
  Region complement(const Region& x) const;
  bool adjacent(int i, int j) const;

  std::string to_string() const;

 private:
  Lattice(int n, std::vector<std::pair<int, int>> edges, int local_dim,
          GeometryTag tag);
  void compute_distances();

  int n_sites_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<int> local_dims_;
  GeometryTag tag_ = GeometryTag::ChainOpen;
  std::vector<std::vector<int>> dist_;
};

// min over x in X, y in Y of the graph distance; 0 on overlap.
int distance(const Lattice& lat, const Region& x, const Region& y);

// X[r] = { i : d(X, i) <= r }.
Region extend_region(const Lattice& lat, const Region& x, int r);

// Surface subset: sites of X adjacent to the complement.
Region boundary(const Lattice& lat, const Region& x);

// Measured geometric constant: max_i |boundary of i[r]| / r^{D-1} over r >= 1.
double measured_gamma(const Lattice& lat);

}  // namespace qml
