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

#ifndef SSDA_CONFIG_H_
#define SSDA_CONFIG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ssda {

// Flat "key = value" configuration with '#' comments. Insertion order is
// kept so that snapshots are stable and diffable.
class KeyValues {
 public:
  static KeyValues parse(std::string_view text, const std::string& source = "<text>");
  static KeyValues load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::optional<std::string> get(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  // Copies every entry of `other` over this one.
  void merge(const KeyValues& other);

  const std::vector<std::string>& keys() const { return order_; }
  std::string to_text() const;

  friend bool operator==(const KeyValues&, const KeyValues&) = default;

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Shortest text that parses back to the same double.
std::string format_double(double v);

int parse_int(const std::string& key, const std::string& text);
double parse_double(const std::string& key, const std::string& text);
bool parse_bool(const std::string& key, const std::string& text);
std::vector<int> parse_int_list(const std::string& key, const std::string& text);
std::vector<double> parse_double_list(const std::string& key, const std::string& text);

std::string join_ints(const std::vector<int>& values);
std::string join_doubles(const std::vector<double>& values);

// 64-bit FNV-1a; used for config and spec fingerprints.
uint64_t fnv1a64(std::string_view data);
std::string hex64(uint64_t v);

}  // namespace ssda

#endif  // SSDA_CONFIG_H_
