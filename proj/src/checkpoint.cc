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

#include "ssda/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ssda/config.h"
#include "ssda/errors.h"

namespace ssda {
namespace {

constexpr char kMagic[] = "SSDA-CHECKPOINT 1";

template <typename U>
U to_little_endian(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    U out = 0;
    for (size_t i = 0; i < sizeof(U); ++i) {
      out = (out << 8) | ((v >> (8 * i)) & 0xffu);
    }
    return out;
  }
  return v;
}

template <typename T>
struct Dtype;
template <>
struct Dtype<float> {
  using Bits = uint32_t;
  static constexpr const char* kName = "f32";
};
template <>
struct Dtype<double> {
  using Bits = uint64_t;
  static constexpr const char* kName = "f64";
};

template <typename T>
void save_impl(const std::string& path, const DetectorConfig& config,
               const ParamSet<T>& params,
               const std::map<std::string, std::string>& metadata) {
  if (!params.same_schema(ParamSet<float>(detector_schema(config)))) {
    throw SchemaError("refusing to save parameters that do not match the config");
  }
  std::ostringstream header;
  header << kMagic << '\n';
  header << "meta.version = " << params.version() << '\n';
  for (const auto& [k, v] : metadata) {
    if (k == "version") continue;
    header << "meta." << k << " = " << v << '\n';
  }
  std::istringstream cfg_lines(serialize_detector_config(config));
  std::string line;
  while (std::getline(cfg_lines, line)) header << "detector." << line << '\n';
  for (const auto& t : params) {
    header << "param " << t.spec.name << ' ' << Dtype<T>::kName << ' '
           << join_ints(t.spec.shape) << '\n';
  }
  header << "END\n";

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path);
  const std::string h = header.str();
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (const auto& t : params) {
    for (T v : t.values) {
      const auto bits = to_little_endian(std::bit_cast<typename Dtype<T>::Bits>(v));
      out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
    }
  }
  if (!out) throw IoError("failed while writing checkpoint " + path);
}

template <typename T>
void read_values(std::istream& in, const std::string& path, ParamSet<T>& params) {
  for (auto& t : params) {
    for (T& v : t.values) {
      typename Dtype<T>::Bits bits = 0;
      if (!in.read(reinterpret_cast<char*>(&bits), sizeof(bits))) {
        throw ParseError(path + ": truncated parameter data in '" + t.spec.name + "'");
      }
      v = std::bit_cast<T>(to_little_endian(bits));
    }
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const DetectorConfig& config,
                     const ParamSet<float>& params,
                     const std::map<std::string, std::string>& metadata) {
  save_impl(path, config, params, metadata);
}

void save_checkpoint(const std::string& path, const DetectorConfig& config,
                     const ParamSet<double>& params,
                     const std::map<std::string, std::string>& metadata) {
  save_impl(path, config, params, metadata);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw ParseError(path + ": not an SSDA checkpoint");
  }
  Checkpoint ckpt;
  std::string detector_text;
  ParamSchema stored;
  std::string dtype;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "END") {
      ended = true;
      break;
    }
    if (line.rfind("param ", 0) == 0) {
      const auto fields = split(line.substr(6), ' ');
      if (fields.size() != 3 || (fields[1] != "f32" && fields[1] != "f64") ||
          (!dtype.empty() && fields[1] != dtype)) {
        throw ParseError(path + ": malformed parameter line '" + line + "'");
      }
      dtype = fields[1];
      stored.push_back({fields[0], parse_int_list(fields[0], fields[2])});
    } else if (line.rfind("detector.", 0) == 0) {
      detector_text += line.substr(9) + '\n';
    } else if (line.rfind("meta.", 0) == 0) {
      const size_t eq = line.find('=');
      if (eq == std::string::npos) throw ParseError(path + ": bad metadata line");
      ckpt.metadata[trim(line.substr(5, eq - 5))] = trim(line.substr(eq + 1));
    } else {
      throw ParseError(path + ": unexpected header line '" + line + "'");
    }
  }
  if (!ended) throw ParseError(path + ": header is missing END");

  ckpt.config = parse_detector_config(detector_text);
  const ParamSchema expected = detector_schema(ckpt.config);
  if (!(stored == expected)) {
    throw SchemaError(path + ": stored schema disagrees with its config: " +
                      describe_schema_mismatch(stored, expected));
  }
  if (dtype == "f64") {
    ParamSet<double> precise(stored);
    read_values(in, path, precise);
    ckpt.params = precise.cast<float>();
    ckpt.precise = std::move(precise);
  } else {
    ckpt.params = ParamSet<float>(stored);
    read_values(in, path, ckpt.params);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError(path + ": trailing bytes after parameter data");
  }
  if (auto v = ckpt.metadata.find("version"); v != ckpt.metadata.end()) {
    ckpt.params.set_version(std::stoull(v->second));
    if (ckpt.precise) ckpt.precise->set_version(ckpt.params.version());
  }
  return ckpt;
}

Checkpoint load_checkpoint(const std::string& path, const DetectorConfig& expected) {
  Checkpoint ckpt = load_checkpoint(path);
  if (!(ckpt.config == expected)) {
    throw SchemaError(path + ": checkpoint detector config differs from the expected one");
  }
  return ckpt;
}

}  // namespace ssda
