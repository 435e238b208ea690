#include "nucleitrace/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nucleitrace {

double adaptive_cutoff(std::span<const Point> points, double fallback) {
  const std::size_t n = points.size();
  if (n < 4) return fallback;
  const std::size_t last_rank = std::min<std::size_t>(8, n - 1);
  std::vector<double> d;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    d.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) d.push_back(distance(points[i], points[j]));
    }
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(last_rank), d.end());
    for (std::size_t rank = 3; rank <= last_rank; ++rank) {
      sum += d[rank - 1];
      ++count;
    }
  }
  return 0.5 * sum / double(count);
}

std::vector<std::vector<int>> Clustering::members() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    out[static_cast<std::size_t>(assignment[i])].push_back(static_cast<int>(i));
  }
  return out;
}

namespace {

// Squared Ward heights with Lance-Williams updates. The cluster stored at
// slot i always contains point i and no point below it, so slot order is the
// smallest-member order used for tie-breaking.
class WardMatrix {
 public:
  explicit WardMatrix(std::span<const Point> points)
      : n_(points.size()), d2_(n_ * n_, 0.0), size_(n_, 1), active_(n_, true), row_min_(n_), row_arg_(n_) {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) d2_[i * n_ + j] = squared_distance(points[i], points[j]);
    }
    for (std::size_t i = 0; i < n_; ++i) refresh_row(i);
  }

  // Lowest (height, i, j) pair among active slots; false when one is left.
  bool best(std::size_t& i, std::size_t& j) const {
    bool found = false;
    for (std::size_t k = 0; k < n_; ++k) {
      if (!active_[k] || row_arg_[k] == kNone) continue;
      if (!found || row_min_[k] < row_min_[i]) {
        i = k;
        found = true;
      }
    }
    if (found) j = row_arg_[i];
    return found;
  }

  double d2(std::size_t i, std::size_t j) const { return i < j ? d2_[i * n_ + j] : d2_[j * n_ + i]; }

  void merge(std::size_t i, std::size_t j) {
    const double ni = double(size_[i]), nj = double(size_[j]), dij = d2(i, j);
    for (std::size_t k = 0; k < n_; ++k) {
      if (!active_[k] || k == i || k == j) continue;
      const double nk = double(size_[k]);
      const double v = ((nk + ni) * d2(k, i) + (nk + nj) * d2(k, j) - nk * dij) / (nk + ni + nj);
      (k < i ? d2_[k * n_ + i] : d2_[i * n_ + k]) = v;
    }
    size_[i] += size_[j];
    active_[j] = false;
    refresh_row(i);
    for (std::size_t k = 0; k < i; ++k) {
      if (!active_[k]) continue;
      if (row_arg_[k] == i || row_arg_[k] == j) {
        refresh_row(k);
      } else if (d2_[k * n_ + i] < row_min_[k] || (d2_[k * n_ + i] == row_min_[k] && i < row_arg_[k])) {
        row_min_[k] = d2_[k * n_ + i];
        row_arg_[k] = i;
      }
    }
    for (std::size_t k = i + 1; k < j; ++k) {
      if (active_[k] && row_arg_[k] == j) refresh_row(k);
    }
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  void refresh_row(std::size_t i) {
    row_arg_[i] = kNone;
    row_min_[i] = std::numeric_limits<double>::infinity();
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (active_[j] && (row_arg_[i] == kNone || d2_[i * n_ + j] < row_min_[i])) {
        row_min_[i] = d2_[i * n_ + j];
        row_arg_[i] = j;
      }
    }
  }

  std::size_t n_;
  std::vector<double> d2_;
  std::vector<std::size_t> size_;
  std::vector<bool> active_;
  std::vector<double> row_min_;
  std::vector<std::size_t> row_arg_;
};

}  // namespace

Clustering ward_cluster(std::span<const Point> points, double cutoff) {
  if (!(cutoff > 0.0)) throw ParameterError("ward_cluster: cutoff must be > 0");
  const std::size_t n = points.size();
  Clustering out;
  std::vector<std::size_t> slot(n);
  for (std::size_t i = 0; i < n; ++i) slot[i] = i;

  if (n > 1) {
    WardMatrix ward(points);
    std::size_t i = 0, j = 0;
    while (ward.best(i, j)) {
      const double height = std::sqrt(ward.d2(i, j));
      if (height > cutoff) break;
      out.merges.push_back({static_cast<int>(i), static_cast<int>(j), height});
      ward.merge(i, j);
      for (std::size_t& s : slot) {
        if (s == j) s = i;
      }
    }
  }

  out.assignment.assign(n, -1);
  std::vector<int> index_of_slot(n, -1);
  for (std::size_t p = 0; p < n; ++p) {
    int& idx = index_of_slot[slot[p]];
    if (idx < 0) idx = out.count++;
    out.assignment[p] = idx;
  }
  return out;
}

}  // namespace nucleitrace
