#pragma once

#include <array>
#include <stdexcept>

namespace tta {

// The six orderings of the magnification levels (0.25, 0.5, 1.0), listed in
// lexicographic order of the displayed mpp sequence. Label 0 is the identity
// ordering, label 5 the full reversal. perm[i] names which pyramid level sits
// at displayed position i.
inline constexpr std::array<std::array<int, 3>, 6> kLevelOrderings = {{
    {0, 1, 2},  // (0.25, 0.5, 1.0)
    {0, 2, 1},  // (0.25, 1.0, 0.5)
    {1, 0, 2},  // (0.5, 0.25, 1.0)
    {1, 2, 0},  // (0.5, 1.0, 0.25)
    {2, 0, 1},  // (1.0, 0.25, 0.5)
    {2, 1, 0},  // (1.0, 0.5, 0.25)
}};

inline std::array<int, 3> order_of_label(int label) {
  if (label < 0 || label > 5) throw std::invalid_argument("permutation label outside [0, 5]");
  return kLevelOrderings[static_cast<size_t>(label)];
}

inline int label_of_order(const std::array<int, 3>& order) {
  for (int k = 0; k < 6; ++k)
    if (kLevelOrderings[static_cast<size_t>(k)] == order) return k;
  throw std::invalid_argument("not a permutation of {0,1,2}");
}

}  // namespace tta
