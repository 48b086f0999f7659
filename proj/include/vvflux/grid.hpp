#pragma once

// Uniform cell-centred grids on Q^d(K) and the scalar field stored on them.
// Storage is row-major: the last axis varies fastest.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "vvflux/errors.hpp"
#include "vvflux/geometry.hpp"

namespace vvflux {

class Grid {
 public:
  Grid(int dim, double K, int n) : dim_(dim), K_(K), n_(n) {
    if (dim_ < 1 || dim_ > 3) throw UsageError("Grid: dimension must be 1, 2 or 3");
    if (!(K_ > 0.0)) throw UsageError("Grid: half-width K must be > 0");
    if (n_ < 8) throw UsageError("Grid: need at least 8 cells per axis");
    cells_ = 1;
    for (int k = 0; k < dim_; ++k) cells_ *= static_cast<std::size_t>(n_);
  }

  int dim() const noexcept { return dim_; }
  double K() const noexcept { return K_; }
  int n() const noexcept { return n_; }
  double h() const noexcept { return 2.0 * K_ / n_; }
  std::size_t cells() const noexcept { return cells_; }
  double cell_volume() const { return std::pow(h(), dim_); }
  Box box() const { return Box(K_, dim_); }

  /// Flat-index distance between neighbours along 0-based axis a.
  std::size_t stride(int a) const {
    std::size_t s = 1;
    for (int k = a + 1; k < dim_; ++k) s *= static_cast<std::size_t>(n_);
    return s;
  }

  double center(int i) const { return -K_ + (i + 0.5) * h(); }
  double face(int i) const { return -K_ + i * h(); }

  /// Per-axis index of a flat cell index, written into idx (size dim).
  void unflatten(std::size_t flat, std::span<int> idx) const {
    for (int k = dim_ - 1; k >= 0; --k) {
      idx[static_cast<std::size_t>(k)] = static_cast<int>(flat % static_cast<std::size_t>(n_));
      flat /= static_cast<std::size_t>(n_);
    }
  }

  void center_point(std::size_t flat, std::span<double> x) const {
    for (int k = dim_ - 1; k >= 0; --k) {
      x[static_cast<std::size_t>(k)] = center(static_cast<int>(flat % static_cast<std::size_t>(n_)));
      flat /= static_cast<std::size_t>(n_);
    }
  }

  Point center_point(std::size_t flat) const {
    Point x(static_cast<std::size_t>(dim_));
    center_point(flat, x);
    return x;
  }

  bool on_boundary_layer(std::size_t flat) const {
    for (int k = 0; k < dim_; ++k) {
      const auto i = static_cast<int>(flat % static_cast<std::size_t>(n_));
      if (i == 0 || i == n_ - 1) return true;
      flat /= static_cast<std::size_t>(n_);
    }
    return false;
  }

  bool operator==(const Grid& o) const { return dim_ == o.dim_ && K_ == o.K_ && n_ == o.n_; }

 private:
  int dim_;
  double K_;
  int n_;
  std::size_t cells_ = 0;
};

struct Field {
  Grid grid;
  std::vector<double> values;
  double t = 0.0;

  explicit Field(const Grid& g, double time = 0.0) : grid(g), values(g.cells(), 0.0), t(time) {}
  Field(const Grid& g, std::vector<double> v, double time) : grid(g), values(std::move(v)), t(time) {
    if (values.size() != grid.cells()) throw UsageError("Field: value count does not match grid");
  }
};

// ---------------------------------------------------------------------------
// Snapshot text format:
//   # t=<time> d=<dim> n=<n> K=<K> eps=<eps>
//   x1 [x2 [x3]] u        (one line per cell, storage order)

namespace detail {

inline std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline void write_snapshot(std::ostream& os, const Field& u, double eps) {
  const Grid& g = u.grid;
  os << "# t=" << detail::shortest(u.t) << " d=" << g.dim() << " n=" << g.n()
     << " K=" << detail::shortest(g.K()) << " eps=" << detail::shortest(eps) << '\n';
  Point x(static_cast<std::size_t>(g.dim()));
  for (std::size_t c = 0; c < g.cells(); ++c) {
    g.center_point(c, x);
    for (double xi : x) os << detail::shortest(xi) << ' ';
    os << detail::shortest(u.values[c]) << '\n';
  }
}

struct Snapshot {
  Field field;
  double eps;
};

inline Snapshot read_snapshot(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("# ", 0) != 0) throw UsageError("snapshot: missing header line");
  double t = 0, K = 0, eps = 0;
  int d = 0, n = 0;
  std::istringstream hs(header.substr(2));
  std::string tok;
  int seen = 0;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw UsageError("snapshot: malformed header token '" + tok + "'");
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "t") t = std::stod(val), seen |= 1;
    else if (key == "d") d = std::stoi(val), seen |= 2;
    else if (key == "n") n = std::stoi(val), seen |= 4;
    else if (key == "K") K = std::stod(val), seen |= 8;
    else if (key == "eps") eps = std::stod(val), seen |= 16;
    else throw UsageError("snapshot: unknown header key '" + key + "'");
  }
  if (seen != 31) throw UsageError("snapshot: incomplete header");
  Grid g(d, K, n);
  std::vector<double> v(g.cells());
  for (std::size_t c = 0; c < g.cells(); ++c) {
    double x;
    for (int k = 0; k < d; ++k) {
      if (!(is >> x)) throw UsageError("snapshot: truncated cell records");
    }
    if (!(is >> v[c])) throw UsageError("snapshot: truncated cell records");
  }
  return {Field(g, std::move(v), t), eps};
}

}  // namespace vvflux
