#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace thlda {

using TermId = std::int32_t;
using NodeId = std::int32_t;
using Level = std::int32_t;
using Count = std::int64_t;

inline constexpr NodeId kNoNode = -1;

struct TermCount {
  TermId term = 0;
  Count count = 0;

  friend bool operator==(const TermCount&, const TermCount&) = default;
};

struct TermWeight {
  TermId term = 0;
  double weight = 0.0;

  friend bool operator==(const TermWeight&, const TermWeight&) = default;
};

// Sorted by term, no duplicate terms.
using SparseVector = std::vector<TermWeight>;

// Root-to-leaf node ids, one per level.
using Path = std::vector<NodeId>;

// Category labels for levels 1..k below the root.
using PriorPath = std::vector<std::string>;

}  // namespace thlda
