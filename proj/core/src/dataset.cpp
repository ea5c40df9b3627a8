#include "levelsense/dataset.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "levelsense/errors.hpp"
#include "levelsense/rng.hpp"

namespace levelsense {

namespace {
constexpr std::uint64_t kTagSplit = 0x73706c6974;  // "split"
}

std::vector<int> interleaved_train_classes(int n_classes) {
  if (n_classes < 3)
    raise(ErrorCode::config_error,
          "interleaved split needs at least three classes, got " +
              std::to_string(n_classes));
  std::vector<int> train;
  for (int c = 1; c < n_classes - 1; c += 2) train.push_back(c);
  train.push_back(n_classes);
  return train;
}

SplitIndices split_by_level(const std::vector<int>& level_classes) {
  if (level_classes.empty())
    raise(ErrorCode::insufficient_data, "no samples to split");
  int n_classes = 0;
  for (int c : level_classes) {
    if (c < 1)
      raise(ErrorCode::domain_error,
            "level classes are 1-based, got " + std::to_string(c));
    n_classes = std::max(n_classes, c);
  }
  std::vector<int> train_classes = interleaved_train_classes(n_classes);
  SplitIndices split;
  for (std::size_t i = 0; i < level_classes.size(); ++i) {
    bool in_train = std::find(train_classes.begin(), train_classes.end(),
                              level_classes[i]) != train_classes.end();
    (in_train ? split.train : split.test).push_back(i);
  }
  return split;
}

SplitIndices split_half_per_class(const std::vector<int>& level_classes,
                                  std::uint64_t seed) {
  if (level_classes.empty())
    raise(ErrorCode::insufficient_data, "no samples to split");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < level_classes.size(); ++i) {
    if (level_classes[i] < 1)
      raise(ErrorCode::domain_error, "level classes are 1-based, got " +
                                         std::to_string(level_classes[i]));
    by_class[level_classes[i]].push_back(i);
  }

  SplitIndices split;
  for (auto& [cls, indices] : by_class) {
    SplitMix64 rng(
        derive_stream(seed, kTagSplit, static_cast<std::uint64_t>(cls)));
    for (std::size_t i = indices.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(rng.next_double() *
                                        static_cast<double>(i));
      j = std::min(j, i - 1);
      std::swap(indices[i - 1], indices[j]);
    }
    std::size_t n_train = (indices.size() + 1) / 2;
    split.train.insert(split.train.end(), indices.begin(),
                       indices.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.insert(split.test.end(),
                      indices.begin() + static_cast<std::ptrdiff_t>(n_train),
                      indices.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace levelsense
