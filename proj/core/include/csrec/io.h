// core/include/csrec/io.h

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

#ifndef CSREC_IO_H_
#define CSREC_IO_H_

#include <filesystem>
#include <string>

#include "csrec/types.h"

namespace csrec {

// Text formats are deterministic: save followed by load is the identity on
// in-memory values, and load followed by save reproduces a canonical file
// byte for byte. Floating point cells use shortest round-trip notation.

// Stream file: '#stream modality=<L|P|S> period_ms=<int> dim=<int>' header,
// then one row of dim space-separated decimals per frame.
FrameStream LoadStream(const std::filesystem::path& path);
void SaveStream(const FrameStream& stream, const std::filesystem::path& path);

// Segmentation file: '#tier <audio|hand_pos|hand_shape>' header, then
// 'start_ms end_ms label' lines. An empty file is an empty segmentation.
Segmentation LoadSegmentation(const std::filesystem::path& path,
                              const Alphabet* alphabet = nullptr);
void SaveSegmentation(const Segmentation& seg,
                      const std::filesystem::path& path);

// Corpus manifest: JSON document listing the alphabet, frame period,
// metadata and per-sentence file paths relative to the manifest directory.
Corpus LoadCorpus(const std::filesystem::path& manifest_path);

// Writes <dir>/manifest.json plus stream/segmentation files under
// <dir>/data/. Existing files are overwritten.
void SaveCorpus(const Corpus& corpus, const std::filesystem::path& dir);

std::string ReadTextFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path,
                   const std::string& content);

// Shortest decimal text that parses back to exactly this double.
std::string FormatDouble(double value);

}  // namespace csrec

#endif  // CSREC_IO_H_
