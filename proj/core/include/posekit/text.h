// Copyright 2026 The posekit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef POSEKIT_TEXT_H_
#define POSEKIT_TEXT_H_

#include <string>
#include <string_view>

namespace posekit {

// Category matching key: Unicode NFC normalization followed by full case
// folding. Throws InvalidArgument on malformed UTF-8.
std::string CategoryKey(std::string_view utf8);

}  // namespace posekit

#endif  // POSEKIT_TEXT_H_
