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

#ifndef SSDA_IMAGE_IO_H_
#define SSDA_IMAGE_IO_H_

#include <string>

#include "ssda/image.h"

namespace ssda {

// 8-bit RGB PNG. Samples are quantized with round(clamp(v, 0, 1) * 255).
void write_png(const std::string& path, const Image& image);
Image read_png(const std::string& path);

bool is_supported_image(const std::string& path);

}  // namespace ssda

#endif  // SSDA_IMAGE_IO_H_
