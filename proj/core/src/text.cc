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

#include "posekit/text.h"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "posekit/error.h"

namespace posekit {

std::string CategoryKey(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::kInvalidArgument, "ICU NFC normalizer unavailable");
  }
  // Invalid sequences decode to U+FFFD; detect them by re-encoding.
  const icu::UnicodeString in = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  std::string check;
  in.toUTF8String(check);
  if (check != utf8) {
    throw Error(ErrorCode::kInvalidArgument, "category is not valid UTF-8");
  }
  icu::UnicodeString folded = nfc->normalize(in, status);
  folded.foldCase(U_FOLD_CASE_DEFAULT);
  // Case folding can denormalize (e.g. some precomposed capitals).
  icu::UnicodeString out = nfc->normalize(folded, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::kInvalidArgument, "category normalization failed");
  }
  std::string result;
  out.toUTF8String(result);
  return result;
}

}  // namespace posekit
