#ifndef SVARDAG_PARTIAL_ORDER_HPP
#define SVARDAG_PARTIAL_ORDER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "svardag/model_core.hpp"
#include "svardag/rng.hpp"
#include "svardag/types.hpp"

namespace svardag {

// ---------------------------------------------------------------------------
// TierAssignment: one tier index per variable, tier 1 being the earliest.
// ---------------------------------------------------------------------------
struct TierAssignment {
  std::vector<int> tiers;  // tiers[i] >= 1, one entry per variable (0-based variable index)

  void validate() const {
    if (tiers.empty()) {
      throw invalid_input_error("TierAssignment: empty");
    }
    for (int t : tiers) {
      if (t < 1) throw invalid_input_error("TierAssignment: tiers must be positive integers");
    }
  }
};

// ---------------------------------------------------------------------------
// PartialOrdering: the set of (child, parent) pairs whose coefficient
// A(child, parent) is constrained to zero a priori. Self-pairs are excluded
// globally (zero diagonal) and never stored. Stored row-indexed (dense mask)
// for O(1) membership and O(p) allowed-parent extraction; serialization uses
// the explicit pair list.
// ---------------------------------------------------------------------------
class PartialOrdering {
 public:
  PartialOrdering() = default;

  explicit PartialOrdering(int p) : p_(p), forbidden_(static_cast<std::size_t>(p) * p, 0) {
    if (p < 1) throw invalid_input_error("PartialOrdering: p must be >= 1");
  }

  static PartialOrdering from_pairs(int p, const std::vector<std::pair<int, int>>& pairs) {
    PartialOrdering po(p);
    for (auto [child, parent] : pairs) po.forbid(child, parent);
    return po;
  }

  int dimension() const { return p_; }

  void forbid(int child, int parent) {
    check_index(child);
    check_index(parent);
    if (child == parent) return;  // implied globally, not stored
    forbidden_[index(child, parent)] = 1;
  }

  bool is_forbidden(int child, int parent) const {
    check_index(child);
    check_index(parent);
    if (child == parent) return false;  // handled by the global no-self-loop rule
    return forbidden_[index(child, parent)] != 0;
  }

  std::size_t forbidden_count() const {
    std::size_t c = 0;
    for (auto v : forbidden_) c += v;
    return c;
  }

  bool empty() const { return forbidden_count() == 0; }

  // Explicit (child, parent) pair list in row-major order, 0-based.
  std::vector<std::pair<int, int>> forbidden_pairs() const {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < p_; ++i) {
      for (int j = 0; j < p_; ++j) {
        if (i != j && forbidden_[index(i, j)]) out.emplace_back(i, j);
      }
    }
    return out;
  }

 private:
  int p_ = 0;
  std::vector<std::uint8_t> forbidden_;

  std::size_t index(int child, int parent) const {
    return static_cast<std::size_t>(child) * static_cast<std::size_t>(p_) +
           static_cast<std::size_t>(parent);
  }
  void check_index(int v) const {
    if (v < 0 || v >= p_) throw invalid_input_error("PartialOrdering: index out of range");
  }
};

// ---------------------------------------------------------------------------
// allowed_parents: S_i = {1..p} \ ({i} u forbidden parents of row i), in
// ascending order.
// ---------------------------------------------------------------------------
inline std::vector<int> allowed_parents(const PartialOrdering& P, int i) {
  std::vector<int> s;
  s.reserve(static_cast<std::size_t>(P.dimension()));
  for (int j = 0; j < P.dimension(); ++j) {
    if (j != i && !P.is_forbidden(i, j)) s.push_back(j);
  }
  return s;
}

// ---------------------------------------------------------------------------
// from_tiers: forbid A(child, parent) exactly when tier(parent) >
// tier(child); within-tier edges and earlier-to-later edges stay free.
// ---------------------------------------------------------------------------
inline PartialOrdering from_tiers(const TierAssignment& t) {
  t.validate();
  const int p = static_cast<int>(t.tiers.size());
  PartialOrdering po(p);
  for (int child = 0; child < p; ++child) {
    for (int parent = 0; parent < p; ++parent) {
      if (child != parent && t.tiers[static_cast<std::size_t>(parent)] >
                                 t.tiers[static_cast<std::size_t>(child)]) {
        po.forbid(child, parent);
      }
    }
  }
  return po;
}

// ---------------------------------------------------------------------------
// from_regulator_target: given a 0/1 gold adjacency (gold(i,j)=1 means edge
// j -> i), regulators are nodes that only emit (zero row, nonzero column) and
// targets only receive (nonzero row, zero column). Regulators cannot receive
// any edge (their whole row of A is forbidden) and targets cannot emit (their
// whole column is forbidden). Nodes doing both, or neither, stay free.
// ---------------------------------------------------------------------------
template <typename Derived>
PartialOrdering from_regulator_target(const Eigen::MatrixBase<Derived>& gold) {
  const int p = static_cast<int>(gold.rows());
  if (gold.cols() != p) throw invalid_input_error("from_regulator_target: gold must be square");
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      const double v = static_cast<double>(gold(i, j));
      if (v != 0.0 && v != 1.0) {
        throw invalid_input_error("from_regulator_target: gold adjacency must be 0/1");
      }
    }
  }
  PartialOrdering po(p);
  for (int v = 0; v < p; ++v) {
    const bool emits = gold.col(v).template cast<double>().cwiseAbs().sum() > 0;
    const bool receives = gold.row(v).template cast<double>().cwiseAbs().sum() > 0;
    if (emits && !receives) {
      for (int j = 0; j < p; ++j) {
        if (j != v) po.forbid(v, j);  // regulator v receives from nobody
      }
    } else if (receives && !emits) {
      for (int i = 0; i < p; ++i) {
        if (i != v) po.forbid(i, v);  // target v emits to nobody
      }
    }
  }
  return po;
}

// ---------------------------------------------------------------------------
// random_nonsupport_mask: sample floor(fraction * #off-diagonal zeros of
// A_true) cells uniformly without replacement from the off-diagonal
// non-support of A_true, via a partial Fisher-Yates shuffle driven by the
// seeded engine. Never forbids a true edge; deterministic given the seed.
// ---------------------------------------------------------------------------
template <typename Scalar>
PartialOrdering random_nonsupport_mask(const StructuralMatrixT<Scalar>& A_true,
                                       double fraction, std::uint64_t rng_seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw invalid_input_error("random_nonsupport_mask: fraction must lie in [0, 1]");
  }
  validate_structural(A_true, 0.0);  // requires an acyclic truth
  const int p = static_cast<int>(A_true.entries.rows());
  std::vector<std::pair<int, int>> zeros;  // row-major scan order
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (i != j && A_true.entries(i, j) == Scalar(0)) zeros.emplace_back(i, j);
    }
  }
  const std::size_t take =
      static_cast<std::size_t>(std::floor(fraction * static_cast<double>(zeros.size())));
  Rng rng(rng_seed);
  PartialOrdering po(p);
  for (std::size_t t = 0; t < take; ++t) {
    const std::size_t pick = t + static_cast<std::size_t>(rng.uniform_int(zeros.size() - t));
    std::swap(zeros[t], zeros[pick]);
    po.forbid(zeros[t].first, zeros[t].second);
  }
  return po;
}

}  // namespace svardag

#endif  // SVARDAG_PARTIAL_ORDER_HPP
