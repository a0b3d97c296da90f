// core/src/json-util.h

// Copyright 2026  CSRec Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CSREC_SRC_JSON_UTIL_H_
#define CSREC_SRC_JSON_UTIL_H_

#include <filesystem>
#include <initializer_list>
#include <string>

#include "csrec/types.h"
#include "json.hpp"

namespace csrec {
namespace internal {

using Json = nlohmann::json;

Json ReadJsonFile(const std::filesystem::path& path);
void WriteJsonFile(const std::filesystem::path& path, const Json& value);

// Model/manifest files carry an explicit integer 'version'.
void RequireVersion(const Json& obj, int expected, const std::string& what);

// Config parsing rejects unknown keys so typos fail loudly.
void RequireKeys(const Json& obj, std::initializer_list<const char*> allowed,
                 const std::string& what);

}  // namespace internal
}  // namespace csrec

#endif  // CSREC_SRC_JSON_UTIL_H_
