// core/src/io.cc

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

#include "csrec/io.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>
#include <system_error>
#include <vector>

#include "json-util.h"

namespace csrec {

namespace {

std::vector<std::string_view> SplitWs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool ParseDouble(std::string_view token, double* value) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, *value);
  return ec == std::errc() && ptr == last;
}

bool ParseInt(std::string_view token, long long* value) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, *value);
  return ec == std::errc() && ptr == last;
}

std::string Location(const std::filesystem::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no);
}

// Header attributes look like 'key=value'.
std::string_view AttrValue(std::string_view token, std::string_view key,
                           const std::filesystem::path& path) {
  if (token.size() <= key.size() + 1 || token.substr(0, key.size()) != key ||
      token[key.size()] != '=') {
    throw FormatError(Location(path, 1) + ": expected '" + std::string(key) +
                      "=<value>', got '" + std::string(token) + "'");
  }
  return token.substr(key.size() + 1);
}

Modality ModalityFromLetter(std::string_view letter,
                            const std::filesystem::path& path) {
  if (letter == "L") return Modality::kLips;
  if (letter == "P") return Modality::kHandPos;
  if (letter == "S") return Modality::kHandShape;
  throw FormatError(Location(path, 1) + ": unknown modality '" +
                    std::string(letter) + "' (expected L, P or S)");
}

Tier TierFromName(std::string_view name, const std::filesystem::path& path) {
  if (name == "audio") return Tier::kAudio;
  if (name == "hand_pos") return Tier::kHandPosTier;
  if (name == "hand_shape") return Tier::kHandShapeTier;
  throw FormatError(Location(path, 1) + ": unknown tier '" +
                    std::string(name) + "'");
}

std::vector<std::string> ReadLines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteTextFile(const std::filesystem::path& path,
                   const std::string& content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << content;
}

std::string FormatDouble(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw ValidationError("FormatDouble failed");
  return std::string(buf, ptr);
}

FrameStream LoadStream(const std::filesystem::path& path) {
  std::vector<std::string> lines = ReadLines(path);
  if (lines.empty()) {
    throw FormatError(Location(path, 1) + ": missing #stream header");
  }
  std::vector<std::string_view> header = SplitWs(lines[0]);
  if (header.size() != 4 || header[0] != "#stream") {
    throw FormatError(Location(path, 1) +
                      ": header must be '#stream modality=<L|P|S> "
                      "period_ms=<int> dim=<int>'");
  }
  FrameStream stream;
  stream.modality = ModalityFromLetter(AttrValue(header[1], "modality", path),
                                       path);
  long long period = 0, dim = 0;
  if (!ParseInt(AttrValue(header[2], "period_ms", path), &period) ||
      period <= 0) {
    throw FormatError(Location(path, 1) + ": bad period_ms");
  }
  if (!ParseInt(AttrValue(header[3], "dim", path), &dim) || dim < 1) {
    throw FormatError(Location(path, 1) + ": bad dim");
  }
  stream.period_ms = static_cast<int>(period);
  stream.dim = static_cast<int>(dim);

  std::size_t row = 0;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    ++row;
    std::vector<std::string_view> cells = SplitWs(lines[ln]);
    if (cells.size() != static_cast<std::size_t>(stream.dim)) {
      throw FormatError(Location(path, ln + 1) + ": row " +
                        std::to_string(row) + ": expected " +
                        std::to_string(stream.dim) + " values, got " +
                        std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0;
      if (!ParseDouble(cells[c], &v)) {
        throw FormatError(Location(path, ln + 1) + ": row " +
                          std::to_string(row) + ": bad number '" +
                          std::string(cells[c]) + "'");
      }
      if (!std::isfinite(v)) {
        throw FormatError(Location(path, ln + 1) + ": row " +
                          std::to_string(row) + ": non-finite value '" +
                          std::string(cells[c]) + "'");
      }
      stream.data.push_back(v);
    }
  }
  if (stream.data.empty()) {
    throw FormatError(path.string() + ": stream has no frames");
  }
  return stream;
}

void SaveStream(const FrameStream& stream, const std::filesystem::path& path) {
  stream.Validate();
  if (stream.modality == Modality::kMerged) {
    throw ValidationError("SaveStream: merged streams have no file form");
  }
  std::ostringstream out;
  out << "#stream modality=" << ModalityName(stream.modality)
      << " period_ms=" << stream.period_ms << " dim=" << stream.dim << "\n";
  const std::size_t n = stream.NumFrames();
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const double> f = stream.Frame(i);
    for (std::size_t c = 0; c < f.size(); ++c) {
      if (c > 0) out << ' ';
      out << FormatDouble(f[c]);
    }
    out << '\n';
  }
  WriteTextFile(path, out.str());
}

Segmentation LoadSegmentation(const std::filesystem::path& path,
                              const Alphabet* alphabet) {
  std::vector<std::string> lines = ReadLines(path);
  Segmentation seg;
  std::size_t first_data = 0;
  if (!lines.empty()) {
    std::vector<std::string_view> head = SplitWs(lines[0]);
    if (!head.empty() && head[0] == "#tier") {
      if (head.size() != 2) {
        throw FormatError(Location(path, 1) + ": header must be '#tier <name>'");
      }
      seg.tier = TierFromName(head[1], path);
      first_data = 1;
    }
  }
  for (std::size_t ln = first_data; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    std::vector<std::string_view> cells = SplitWs(lines[ln]);
    if (cells.size() != 3) {
      throw FormatError(Location(path, ln + 1) +
                        ": expected 'start_ms end_ms label'");
    }
    long long start = 0, end = 0;
    if (!ParseInt(cells[0], &start) || !ParseInt(cells[1], &end)) {
      throw FormatError(Location(path, ln + 1) + ": bad interval times");
    }
    seg.intervals.push_back(
        Interval{start, end, std::string(cells[2])});
  }
  seg.Validate(alphabet);
  return seg;
}

void SaveSegmentation(const Segmentation& seg,
                      const std::filesystem::path& path) {
  seg.Validate();
  std::ostringstream out;
  out << "#tier " << TierName(seg.tier) << "\n";
  for (const Interval& iv : seg.intervals) {
    out << iv.start_ms << ' ' << iv.end_ms << ' ' << iv.label << '\n';
  }
  WriteTextFile(path, out.str());
}

namespace {

constexpr int kManifestVersion = 1;

using internal::Json;

std::string StreamFileName(const std::string& id, Modality m) {
  return "data/" + id + "." + ModalityName(m) + ".stream";
}

std::string SegFileName(const std::string& id, const std::string& tag) {
  return "data/" + id + "." + tag + ".seg";
}

}  // namespace

Corpus LoadCorpus(const std::filesystem::path& manifest_path) {
  Json doc = internal::ReadJsonFile(manifest_path);
  internal::RequireVersion(doc, kManifestVersion, "corpus manifest");
  internal::RequireKeys(
      doc, {"version", "period_ms", "alphabet", "metadata", "sentences"},
      "corpus manifest");
  const std::filesystem::path base = manifest_path.parent_path();

  Corpus corpus;
  corpus.period_ms = doc.at("period_ms").get<int>();
  std::vector<PhonemeInfo> entries;
  for (const Json& e : doc.at("alphabet")) {
    internal::RequireKeys(e, {"symbol", "kind"}, "alphabet entry");
    entries.push_back(PhonemeInfo{
        e.at("symbol").get<std::string>(),
        PhonemeKindFromName(e.at("kind").get<std::string>())});
  }
  corpus.alphabet = Alphabet(std::move(entries));
  if (doc.contains("metadata")) {
    for (auto it = doc.at("metadata").begin(); it != doc.at("metadata").end();
         ++it) {
      corpus.metadata[it.key()] = it.value().get<std::string>();
    }
  }

  for (const Json& entry : doc.at("sentences")) {
    internal::RequireKeys(entry,
                          {"id", "group", "lips", "hand_pos", "hand_shape",
                           "audio_seg", "truth"},
                          "sentence entry");
    Sentence s;
    s.id = entry.at("id").get<std::string>();
    s.group = entry.value("group", s.id);
    s.lips = LoadStream(base / entry.at("lips").get<std::string>());
    s.hand_pos = LoadStream(base / entry.at("hand_pos").get<std::string>());
    s.hand_shape = LoadStream(base / entry.at("hand_shape").get<std::string>());
    s.audio_seg = LoadSegmentation(
        base / entry.at("audio_seg").get<std::string>(), &corpus.alphabet);
    if (entry.contains("truth")) {
      const Json& t = entry.at("truth");
      internal::RequireKeys(
          t, {"hand_pos_seg", "hand_shape_seg", "delta_v_ms", "delta_c_ms"},
          "sentence truth");
      SentenceTruth truth;
      truth.hand_pos_seg = LoadSegmentation(
          base / t.at("hand_pos_seg").get<std::string>(), &corpus.alphabet);
      truth.hand_shape_seg = LoadSegmentation(
          base / t.at("hand_shape_seg").get<std::string>(), &corpus.alphabet);
      truth.delta_v_ms = t.at("delta_v_ms").get<std::vector<double>>();
      truth.delta_c_ms = t.at("delta_c_ms").get<std::vector<double>>();
      s.truth = std::move(truth);
    }
    corpus.sentences.push_back(std::move(s));
  }
  corpus.Validate();
  return corpus;
}

void SaveCorpus(const Corpus& corpus, const std::filesystem::path& dir) {
  corpus.Validate();
  std::filesystem::create_directories(dir / "data");

  Json sentences = Json::array();
  for (const Sentence& s : corpus.sentences) {
    SaveStream(s.lips, dir / StreamFileName(s.id, Modality::kLips));
    SaveStream(s.hand_pos, dir / StreamFileName(s.id, Modality::kHandPos));
    SaveStream(s.hand_shape, dir / StreamFileName(s.id, Modality::kHandShape));
    SaveSegmentation(s.audio_seg, dir / SegFileName(s.id, "audio"));

    Json entry;
    entry["id"] = s.id;
    entry["group"] = s.group;
    entry["lips"] = StreamFileName(s.id, Modality::kLips);
    entry["hand_pos"] = StreamFileName(s.id, Modality::kHandPos);
    entry["hand_shape"] = StreamFileName(s.id, Modality::kHandShape);
    entry["audio_seg"] = SegFileName(s.id, "audio");
    if (s.truth.has_value()) {
      SaveSegmentation(s.truth->hand_pos_seg,
                       dir / SegFileName(s.id, "hand_pos"));
      SaveSegmentation(s.truth->hand_shape_seg,
                       dir / SegFileName(s.id, "hand_shape"));
      Json t;
      t["hand_pos_seg"] = SegFileName(s.id, "hand_pos");
      t["hand_shape_seg"] = SegFileName(s.id, "hand_shape");
      t["delta_v_ms"] = s.truth->delta_v_ms;
      t["delta_c_ms"] = s.truth->delta_c_ms;
      entry["truth"] = std::move(t);
    }
    sentences.push_back(std::move(entry));
  }

  Json alphabet = Json::array();
  for (const PhonemeInfo& p : corpus.alphabet.entries()) {
    alphabet.push_back(
        Json{{"symbol", p.symbol}, {"kind", PhonemeKindName(p.kind)}});
  }

  Json doc;
  doc["version"] = kManifestVersion;
  doc["period_ms"] = corpus.period_ms;
  doc["alphabet"] = std::move(alphabet);
  doc["metadata"] = corpus.metadata;
  doc["sentences"] = std::move(sentences);
  internal::WriteJsonFile(dir / "manifest.json", doc);
}

namespace internal {

Json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  Json doc;
  try {
    in >> doc;
  } catch (const Json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return doc;
}

void WriteJsonFile(const std::filesystem::path& path, const Json& value) {
  WriteTextFile(path, value.dump(2) + "\n");
}

void RequireVersion(const Json& obj, int expected, const std::string& what) {
  if (!obj.is_object() || !obj.contains("version")) {
    throw FormatError(what + ": missing version field");
  }
  int got = obj.at("version").get<int>();
  if (got != expected) {
    throw FormatError(what + ": unsupported version " + std::to_string(got) +
                      " (expected " + std::to_string(expected) + ")");
  }
}

void RequireKeys(const Json& obj, std::initializer_list<const char*> allowed,
                 const std::string& what) {
  if (!obj.is_object()) throw FormatError(what + ": expected a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) throw FormatError(what + ": unknown key '" + it.key() + "'");
  }
}

}  // namespace internal

}  // namespace csrec
