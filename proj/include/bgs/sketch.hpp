#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "bgs/rng.hpp"
#include "bgs/types.hpp"

namespace bgs {

/// Sorted, duplicate-free column (or row) indices in [0, n).
struct IndexSet {
  std::vector<Index> idx;

  Index size() const { return static_cast<Index>(idx.size()); }
  bool operator==(const IndexSet& other) const { return idx == other.idx; }

  /// Sorts, checks uniqueness and the [0, n) range.
  static IndexSet checked(std::vector<Index> v, Index n);
};

/// A distribution over index sets. Immutable and shareable; each consumer
/// owns its own Rng stream, so sample() is pure given (sampler, rng state).
class SketchSampler {
 public:
  enum class Mode { FixedPartition, UniformRandom, Weighted };

  static constexpr std::size_t kDefaultSupportBudget = 200000;

  /// Contiguous blocks {0..p-1}, {p..2p-1}, ...; requires p | n.
  static SketchSampler fixed_partition(Index n, Index p);
  /// Fresh uniformly random p-subset of [0, n) each draw; requires 1 <= p <= n.
  static SketchSampler uniform_random(Index n, Index p);
  /// Stored blocks with the given positive probabilities (sum 1 +- 1e-12).
  static SketchSampler weighted(Index n, std::vector<IndexSet> blocks, std::vector<double> probs);

  Mode mode() const { return mode_; }
  Index n() const { return n_; }
  Index p() const { return p_; }
  const std::vector<IndexSet>& blocks() const { return blocks_; }
  const std::vector<double>& probs() const { return probs_; }

  IndexSet sample(Rng& rng) const;
  /// Block ordinal draw for the stored-block modes (FixedPartition, Weighted).
  std::size_t sample_ordinal(Rng& rng) const;

  /// Full support with probabilities (sum 1 +- 1e-12). For UniformRandom this
  /// lists all C(n,p) subsets and fails when that exceeds the budget.
  std::vector<std::pair<IndexSet, double>> enumerate_support(
      std::size_t budget = kDefaultSupportBudget) const;

 private:
  SketchSampler() = default;

  Mode mode_ = Mode::UniformRandom;
  Index n_ = 0;
  Index p_ = 0;
  std::vector<IndexSet> blocks_;
  std::vector<double> probs_;
};

/// C(n, p) capped at `cap` (returns cap + 1 once exceeded).
std::size_t binomial_capped(Index n, Index p, std::size_t cap);

/// Cumulative-walk draw from a finite distribution; consumes one next_double.
std::size_t pick_weighted(Rng& rng, const std::vector<double>& probs);

}  // namespace bgs
