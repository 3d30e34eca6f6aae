// Copyright 2026 The SSDA Desk Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SSDA_PARAM_SET_H_
#define SSDA_PARAM_SET_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ssda/errors.h"

namespace ssda {

struct ParamSpec {
  std::string name;
  std::vector<int> shape;

  size_t count() const {
    size_t n = 1;
    for (int d : shape) n *= static_cast<size_t>(d);
    return n;
  }
  friend bool operator==(const ParamSpec&, const ParamSpec&) = default;
};

using ParamSchema = std::vector<ParamSpec>;

template <typename T>
struct ParamTensor {
  ParamSpec spec;
  std::vector<T> values;
};

// Ordered collection of named parameter arrays plus a version counter that
// is bumped on every in-place update (optimizer step, EMA, load).
template <typename T>
class ParamSet {
 public:
  ParamSet() = default;

  explicit ParamSet(const ParamSchema& schema) {
    for (const ParamSpec& s : schema) add(s);
  }

  void add(const ParamSpec& spec) {
    if (index_.count(spec.name)) {
      throw SchemaError("duplicate parameter name '" + spec.name + "'");
    }
    index_[spec.name] = tensors_.size();
    tensors_.push_back({spec, std::vector<T>(spec.count(), T(0))});
  }

  size_t size() const { return tensors_.size(); }
  ParamTensor<T>& operator[](size_t i) { return tensors_[i]; }
  const ParamTensor<T>& operator[](size_t i) const { return tensors_[i]; }

  auto begin() { return tensors_.begin(); }
  auto end() { return tensors_.end(); }
  auto begin() const { return tensors_.begin(); }
  auto end() const { return tensors_.end(); }

  const ParamTensor<T>& at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw SchemaError("unknown parameter '" + name + "'");
    return tensors_[it->second];
  }
  ParamTensor<T>& at(const std::string& name) {
    return const_cast<ParamTensor<T>&>(std::as_const(*this).at(name));
  }

  ParamSchema schema() const {
    ParamSchema out;
    out.reserve(tensors_.size());
    for (const auto& t : tensors_) out.push_back(t.spec);
    return out;
  }

  size_t total_count() const {
    size_t n = 0;
    for (const auto& t : tensors_) n += t.values.size();
    return n;
  }

  // Flat views for optimizers and finite-difference probes.
  T& flat(size_t i) {
    for (auto& t : tensors_) {
      if (i < t.values.size()) return t.values[i];
      i -= t.values.size();
    }
    throw SchemaError("flat parameter index out of range");
  }
  T flat(size_t i) const { return const_cast<ParamSet&>(*this).flat(i); }

  uint64_t version() const { return version_; }
  void set_version(uint64_t v) { version_ = v; }
  void bump_version() { ++version_; }

  template <typename U>
  bool same_schema(const ParamSet<U>& other) const {
    if (size() != other.size()) return false;
    for (size_t i = 0; i < size(); ++i) {
      if (!(tensors_[i].spec == other[i].spec)) return false;
    }
    return true;
  }

  template <typename U>
  ParamSet<U> cast() const {
    ParamSet<U> out(schema());
    for (size_t i = 0; i < size(); ++i) {
      const auto& src = tensors_[i].values;
      auto& dst = out[i].values;
      for (size_t j = 0; j < src.size(); ++j) dst[j] = static_cast<U>(src[j]);
    }
    out.set_version(version_);
    return out;
  }

  ParamSet zeros_like() const { return ParamSet(schema()); }

  void fill(T v) {
    for (auto& t : tensors_) std::fill(t.values.begin(), t.values.end(), v);
  }

  bool all_finite() const {
    for (const auto& t : tensors_) {
      for (T v : t.values) {
        if (!std::isfinite(v)) return false;
      }
    }
    return true;
  }

  friend bool operator==(const ParamSet& a, const ParamSet& b) {
    if (!a.same_schema(b)) return false;
    for (size_t i = 0; i < a.size(); ++i) {
      if (a[i].values != b[i].values) return false;
    }
    return true;
  }

 private:
  std::vector<ParamTensor<T>> tensors_;
  std::map<std::string, size_t> index_;
  uint64_t version_ = 0;
};

inline std::string describe_schema_mismatch(const ParamSchema& a,
                                            const ParamSchema& b) {
  if (a.size() != b.size()) {
    return "parameter count differs (" + std::to_string(a.size()) + " vs " +
           std::to_string(b.size()) + ")";
  }
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].name != b[i].name) {
      return "parameter " + std::to_string(i) + " is '" + a[i].name +
             "' vs '" + b[i].name + "'";
    }
    if (a[i].shape != b[i].shape) return "shape of '" + a[i].name + "' differs";
  }
  return "schemas equal";
}

}  // namespace ssda

#endif  // SSDA_PARAM_SET_H_
