#include "bgs/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace bgs {

IndexSet IndexSet::checked(std::vector<Index> v, Index n) {
  std::sort(v.begin(), v.end());
  if (std::adjacent_find(v.begin(), v.end()) != v.end())
    throw ConstraintError("IndexSet: duplicate indices");
  if (!v.empty() && (v.front() < 0 || v.back() >= n))
    throw ConstraintError("IndexSet: index out of range [0, n)");
  IndexSet s;
  s.idx = std::move(v);
  return s;
}

std::size_t pick_weighted(Rng& rng, const std::vector<double>& probs) {
  const double u = rng.next_double();
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return i;
  }
  return probs.size() - 1;
}

std::size_t binomial_capped(Index n, Index p, std::size_t cap) {
  if (p < 0 || p > n) return 0;
  p = std::min(p, n - p);
  const double cap_d = static_cast<double>(cap);
  double c = 1.0;
  for (Index i = 1; i <= p; ++i) {
    c *= static_cast<double>(n - p + i) / static_cast<double>(i);
    if (c > cap_d) return cap + 1;
  }
  return static_cast<std::size_t>(std::llround(c));
}

SketchSampler SketchSampler::fixed_partition(Index n, Index p) {
  if (n < 1 || p < 1 || p > n) throw ConstraintError("fixed_partition: need 1 <= p <= n");
  if (n % p != 0)
    throw ConstraintError("fixed_partition: p does not divide n (n = " + std::to_string(n) +
                          ", p = " + std::to_string(p) + ")");
  SketchSampler s;
  s.mode_ = Mode::FixedPartition;
  s.n_ = n;
  s.p_ = p;
  const Index k = n / p;
  s.blocks_.reserve(k);
  for (Index b = 0; b < k; ++b) {
    IndexSet set;
    set.idx.resize(p);
    std::iota(set.idx.begin(), set.idx.end(), b * p);
    s.blocks_.push_back(std::move(set));
  }
  s.probs_.assign(k, 1.0 / static_cast<double>(k));
  return s;
}

SketchSampler SketchSampler::uniform_random(Index n, Index p) {
  if (n < 1 || p < 1 || p > n) throw ConstraintError("uniform_random: need 1 <= p <= n");
  SketchSampler s;
  s.mode_ = Mode::UniformRandom;
  s.n_ = n;
  s.p_ = p;
  return s;
}

SketchSampler SketchSampler::weighted(Index n, std::vector<IndexSet> blocks,
                                      std::vector<double> probs) {
  if (blocks.empty() || blocks.size() != probs.size())
    throw ConstraintError("weighted: blocks and probs must be nonempty and match");
  double sum = 0.0;
  for (double q : probs) {
    if (!(q > 0.0)) throw ConstraintError("weighted: probabilities must be positive");
    sum += q;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ConstraintError("weighted: probabilities must sum to 1 (got " + std::to_string(sum) +
                          ")");
  Index p = blocks.front().size();
  for (auto& b : blocks) {
    b = IndexSet::checked(std::move(b.idx), n);
    if (b.size() < 1) throw ConstraintError("weighted: empty block");
    p = std::max(p, b.size());
  }
  SketchSampler s;
  s.mode_ = Mode::Weighted;
  s.n_ = n;
  s.p_ = p;
  s.blocks_ = std::move(blocks);
  s.probs_ = std::move(probs);
  return s;
}

std::size_t SketchSampler::sample_ordinal(Rng& rng) const {
  if (mode_ == Mode::UniformRandom)
    throw ConstraintError("sample_ordinal: UniformRandom has no stored blocks");
  return pick_weighted(rng, probs_);
}

IndexSet SketchSampler::sample(Rng& rng) const {
  if (mode_ != Mode::UniformRandom) return blocks_[sample_ordinal(rng)];
  // Partial Fisher-Yates: p swaps over [0, n), then sort the prefix.
  std::vector<Index> v(static_cast<std::size_t>(n_));
  std::iota(v.begin(), v.end(), Index{0});
  for (Index i = 0; i < p_; ++i) {
    const Index j = i + static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(n_ - i)));
    std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
  }
  v.resize(static_cast<std::size_t>(p_));
  std::sort(v.begin(), v.end());
  IndexSet s;
  s.idx = std::move(v);
  return s;
}

std::vector<std::pair<IndexSet, double>> SketchSampler::enumerate_support(
    std::size_t budget) const {
  std::vector<std::pair<IndexSet, double>> support;
  if (mode_ != Mode::UniformRandom) {
    support.reserve(blocks_.size());
    for (std::size_t i = 0; i < blocks_.size(); ++i) support.emplace_back(blocks_[i], probs_[i]);
    return support;
  }
  const std::size_t count = binomial_capped(n_, p_, budget);
  if (count > budget) {
    throw ConstraintError("enumerate_support: support too large (C(" + std::to_string(n_) + "," +
                          std::to_string(p_) + ") exceeds budget " + std::to_string(budget) +
                          "), use Monte Carlo");
  }
  const double prob = 1.0 / static_cast<double>(count);
  support.reserve(count);
  std::vector<Index> comb(static_cast<std::size_t>(p_));
  std::iota(comb.begin(), comb.end(), Index{0});
  for (;;) {
    IndexSet s;
    s.idx = comb;
    support.emplace_back(std::move(s), prob);
    // Next combination in lexicographic order.
    Index i = p_ - 1;
    while (i >= 0 && comb[static_cast<std::size_t>(i)] == n_ - p_ + i) --i;
    if (i < 0) break;
    ++comb[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < p_; ++j)
      comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
  }
  return support;
}

}  // namespace bgs
