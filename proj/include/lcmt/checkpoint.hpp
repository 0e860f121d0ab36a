#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lcmt/tensor.hpp"

namespace lcmt::nn {

/// Self-describing parameter container: magic + JSON header (shapes, offsets,
/// caller metadata) followed by a little-endian float32 blob.
struct Checkpoint {
  nlohmann::json meta;
  struct Entry {
    int rows = 0, cols = 0;
    std::vector<float> values;
  };
  std::map<std::string, Entry> params;

  bool has(const std::string& name) const { return params.count(name) > 0; }

  /// Copies stored values into a live tensor, checking shape.
  template <typename Real>
  void restore(const std::string& name, const TensorPtr<Real>& t) const {
    auto it = params.find(name);
    check(it != params.end(), "checkpoint has no parameter '", name, "'");
    check(it->second.rows == t->rows && it->second.cols == t->cols, "checkpoint parameter '", name,
          "' is ", it->second.rows, "x", it->second.cols, ", model expects ", t->rows, "x",
          t->cols);
    for (std::size_t i = 0; i < t->size(); ++i) t->v[i] = (Real)it->second.values[i];
  }

  template <typename Real>
  void put(const std::string& name, const TensorPtr<Real>& t) {
    Entry e;
    e.rows = t->rows;
    e.cols = t->cols;
    e.values.resize(t->size());
    for (std::size_t i = 0; i < t->size(); ++i) e.values[i] = (float)t->v[i];
    check(params.emplace(name, std::move(e)).second, "duplicate checkpoint parameter '", name,
          "'");
  }
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace lcmt::nn
