#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "mmes/rng.hpp"

namespace mmes {

/// Maps a geometric draw j onto a logical archive position in {0,...,m-1},
/// newest-first: j % m == 0 selects the most recent entry (logical m-1),
/// larger residues select progressively older entries.
inline int logical_from_geometric(std::uint64_t j, int m) {
  return m - 1 - static_cast<int>(j % static_cast<std::uint64_t>(m));
}

/// Fixed-capacity store of m direction vectors with generation timestamps
/// and a logical-order permutation. Replacement evicts the logical slot
/// whose predecessor gap (in generations) is smallest, or the oldest entry
/// once every consecutive gap has reached the distance threshold T. Only
/// the m-entry index array moves on update; the n-vector payload is written
/// once, so an update costs O(n + m).
class DirectionArchive {
 public:
  DirectionArchive(Eigen::Index dim, int m, int min_gap)
      : q_(Eigen::MatrixXd::Zero(dim, m)), t_(m, 0), v_(m), T_(min_gap) {
    if (dim < 1 || m < 1) throw std::invalid_argument("DirectionArchive: need dim >= 1, m >= 1");
    if (min_gap < 1) throw std::invalid_argument("DirectionArchive: need T >= 1");
    for (int i = 0; i < m; ++i) v_[i] = i;
  }

  Eigen::Index dim() const { return q_.rows(); }
  int size() const { return static_cast<int>(v_.size()); }
  int min_gap() const { return T_; }

  /// Direction vector in physical slot `physical`.
  Eigen::MatrixXd::ConstColXpr vector(int physical) const { return q_.col(physical); }
  /// Physical slot of logical position `logical` (0 = oldest, m-1 = newest).
  int physical_of(int logical) const { return v_.at(static_cast<std::size_t>(logical)); }
  std::int64_t timestamp(int physical) const { return t_.at(static_cast<std::size_t>(physical)); }
  const std::vector<int>& logical_order() const { return v_; }

  /// Draws j ~ G(c_a) and returns the physical slot of logical position
  /// m-1-(j mod m); recent entries are favored.
  int select_physical_index(RngStream& rng, double c_a) const {
    return v_[static_cast<std::size_t>(logical_from_geometric(rng.geometric(c_a), size()))];
  }

  /// Inserts the evolution path of generation `gen` as the newest entry.
  void update(const Eigen::VectorXd& new_path, std::int64_t gen) {
    if (new_path.size() != q_.rows())
      throw std::invalid_argument("DirectionArchive::update: dimension mismatch");
    const int m = size();
    int k_star = 0;
    if (m > 1) {
      k_star = 1;
      std::int64_t best_gap = gap_at(1);
      for (int k = 2; k < m; ++k) {
        const std::int64_t g = gap_at(k);
        if (g < best_gap) {  // ties keep the smallest k
          best_gap = g;
          k_star = k;
        }
      }
      if (best_gap >= T_) k_star = 0;  // every pair is spaced out: drop the oldest
    }

    const int slot = v_[static_cast<std::size_t>(k_star)];
    for (int k = k_star; k + 1 < m; ++k) v_[static_cast<std::size_t>(k)] = v_[static_cast<std::size_t>(k + 1)];
    v_[static_cast<std::size_t>(m - 1)] = slot;
    t_[static_cast<std::size_t>(slot)] = gen + 1;
    q_.col(slot) = new_path;
  }

  /// Writes a vector straight into a physical slot without touching the
  /// logical order or timestamps. Used by the verification harness and
  /// tests to pose an archive in a known configuration.
  void preload(int physical, const Eigen::VectorXd& value) {
    if (value.size() != q_.rows())
      throw std::invalid_argument("DirectionArchive::preload: dimension mismatch");
    q_.col(physical) = value;
  }

  /// All direction vectors as columns, physical order.
  const Eigen::MatrixXd& vectors() const { return q_; }

 private:
  std::int64_t gap_at(int k) const {
    return t_[static_cast<std::size_t>(v_[static_cast<std::size_t>(k)])] -
           t_[static_cast<std::size_t>(v_[static_cast<std::size_t>(k - 1)])];
  }

  Eigen::MatrixXd q_;           // dim x m, one direction vector per column
  std::vector<std::int64_t> t_; // timestamps, physical order
  std::vector<int> v_;          // logical -> physical permutation
  int T_;
};

}  // namespace mmes
