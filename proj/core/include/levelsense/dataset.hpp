#pragma once

#include <cstdint>
#include <vector>

namespace levelsense {

// Train/test splits over per-sweep samples labeled with 1-based level
// classes (class K = highest level).

// Alternating-level split: train classes {1, 3, 5, ..., K-3} plus {K}, test
// the rest. For ten levels this is train {1,3,5,7,10} / test {2,4,6,8,9};
// both end levels always train, so continuous prediction interpolates.
std::vector<int> interleaved_train_classes(int n_classes);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Splits sample indices by their class membership per
// interleaved_train_classes. Order within each side follows input order.
SplitIndices split_by_level(const std::vector<int>& level_classes);

// Per-class random half split: within each class, a seeded shuffle sends
// ceil(n/2) samples to train and the rest to test.
SplitIndices split_half_per_class(const std::vector<int>& level_classes,
                                  std::uint64_t seed);

}  // namespace levelsense
