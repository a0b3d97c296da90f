// core/include/csrec/rng.h

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

#ifndef CSREC_RNG_H_
#define CSREC_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace csrec {

// All randomness flows from one root seed through named derivation, so
// components and parallel work items never share a stream.

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t Fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t DeriveSeed(std::uint64_t root, std::string_view component,
                                std::uint64_t index = 0) {
  return SplitMix64(SplitMix64(root ^ Fnv1a64(component)) + index);
}

inline std::mt19937_64 MakeRng(std::uint64_t root, std::string_view component,
                               std::uint64_t index = 0) {
  return std::mt19937_64(DeriveSeed(root, component, index));
}

}  // namespace csrec

#endif  // CSREC_RNG_H_
