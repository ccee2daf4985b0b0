#pragma once

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tta/core/errors.hpp"

namespace tta {

using Json = nlohmann::json;

/// Cursor over one JSON object that records which keys were consumed.
/// done() rejects anything left over, so config typos fail loudly instead of
/// silently skewing a sweep.
class StrictObject {
 public:
  StrictObject(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw UsageError("config: expected object at " + path_);
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& raw(const std::string& key) {
    mark(key);
    if (!j_.contains(key)) throw UsageError("config: missing key " + at(key));
    return j_.at(key);
  }

  template <typename T>
  T get(const std::string& key) {
    return convert<T>(raw(key), at(key));
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    if (!j_.contains(key)) return fallback;
    return convert<T>(raw(key), at(key));
  }

  StrictObject child(const std::string& key) { return StrictObject(raw(key), at(key)); }

  bool has_child(const std::string& key) { return j_.contains(key); }

  std::vector<Json> array(const std::string& key) {
    const Json& a = raw(key);
    if (!a.is_array()) throw UsageError("config: expected array at " + at(key));
    return std::vector<Json>(a.begin(), a.end());
  }

  /// Throws if any key in the object was never consumed.
  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw UsageError("config: unknown key " + at(it.key()));
  }

  const std::string& path() const { return path_; }

 private:
  void mark(const std::string& key) { seen_.insert(key); }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  static T convert(const Json& v, const std::string& where) {
    try {
      return v.get<T>();
    } catch (const Json::exception&) {
      throw UsageError("config: wrong type at " + where);
    }
  }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace tta
