#pragma once

#include <stdexcept>
#include <string>

namespace tta {

/// Bad config document, bad CLI arguments, missing paths. Maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

/// Training aborted on a non-finite loss.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, int step) : std::runtime_error(what), step(step) {}
  int step;
};

}  // namespace tta
