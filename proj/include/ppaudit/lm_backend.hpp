/*
 * Copyright (C) 2026 The ppaudit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppaudit/taxonomy.hpp"

namespace ppaudit {

class RuleLexicon;

enum class Task {
  kHeadings,
  kClassify,
  kDecode,
  kMapItems,
  kMapPurposes,
  kVerifyItem,
  kVerifyPurpose,
};

std::string_view to_string(Task task);
std::optional<Task> task_from_string(std::string_view s);

struct Budget {
  int max_output_tokens = 512;
  bool deterministic = true;
};

// Payload shapes, fixed per task:
//   headings, classify, decode:   {"text": string}
//   map_items, map_purposes:      {"items": [string, ...]}
//   verify_item, verify_purpose:  {"item": string}
struct BackendRequest {
  Task task = Task::kClassify;
  nlohmann::json payload;
  Budget budget;
  std::uint64_t correlation_id = 0;
};

struct BackendResponse {
  Task task = Task::kClassify;
  std::uint64_t correlation_id = 0;
  std::string raw_text;
  std::optional<nlohmann::json> parsed;  // set iff raw_text fits the grammar
  std::string parse_error;
  std::chrono::microseconds latency{0};
  std::string backend_id;
};

// A text model. Implementations must tolerate concurrent calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string id() const = 0;
  // Raw completion text for the request. Transport failures throw
  // BackendError; malformed output is returned as-is for the parser.
  virtual std::string complete(const BackendRequest& request) = 0;
};

// Runs the request and parses the raw text with the task grammar.
BackendResponse invoke(Backend& backend, const BackendRequest& request,
                       const Taxonomy& taxonomy);

std::uint64_t next_correlation_id();

// ---------------------------------------------------------------------------
// Output grammars. Each returns std::nullopt and fills `error` on mismatch.

// JSON list of strings.
std::optional<nlohmann::json> parse_headings_output(std::string_view raw,
                                                    std::string& error);
// "Matching category = '<label>'" / "Reasoning = '<excerpt>'".
// Parsed: {"class": int, "rationale": string}.
std::optional<nlohmann::json> parse_classify_output(std::string_view raw,
                                                    const Taxonomy& taxonomy,
                                                    std::string& error);
// JSON list of {data, purpose, processing, storage|retention, recipients};
// entries with an empty `data` are dropped. Python-style single quotes are
// tolerated.
std::optional<nlohmann::json> parse_decode_output(std::string_view raw,
                                                  std::string& error);
// output_list = {'item': 'keyword', ...} (or [...] with the same pairs, or a
// plain JSON list of keywords). Parsed: list of keyword strings, in order.
std::optional<nlohmann::json> parse_mapping_output(std::string_view raw,
                                                   std::string& error);
// A single keyword, optionally quoted. Parsed: string.
std::optional<nlohmann::json> parse_verify_output(std::string_view raw,
                                                  std::string& error);

// ---------------------------------------------------------------------------
// Typed task helpers

struct PracticeTuple {
  std::string data;
  std::string purpose;
  std::string processing;
  std::string retention;
  std::string recipients;

  bool operator==(const PracticeTuple&) const = default;
};

void to_json(nlohmann::json& j, const PracticeTuple& t);
void from_json(const nlohmann::json& j, PracticeTuple& t);

struct Classification {
  PracticeClass practice_class;
  std::string rationale;  // verbatim substring of the input, or empty
  bool rationale_repaired = false;
  int attempts = 1;
};

// One class plus a verbatim excerpt. A response whose rationale is not a
// substring of `text` is retried once; after that the rationale becomes the
// first sentence holding a lexicon trigger for the chosen class (or empty when
// `lexicon` is null or nothing matches). Throws BackendError when the class
// itself cannot be obtained.
Classification classify_paragraph(Backend& backend, std::string_view text,
                                  const Taxonomy& taxonomy,
                                  const RuleLexicon* lexicon);

struct DecodeResult {
  std::vector<PracticeTuple> tuples;
  std::optional<std::string> parse_error;
};

DecodeResult decode_elements(Backend& backend, std::string_view text,
                             const Taxonomy& taxonomy);

enum class VocabularyKind { kDataItems, kPurposes };

inline constexpr std::size_t kMaxMappingBatch = 20;

// Keywords a mapping may legally return: the 21 concrete items plus
// "generic information" and "N/A" for data items; the 8 purposes otherwise.
std::vector<std::string> mapping_vocabulary(VocabularyKind kind,
                                            const Taxonomy& taxonomy);
bool in_vocabulary(std::string_view keyword, VocabularyKind kind,
                   const Taxonomy& taxonomy);

// Positional batch mapping. Output is returned unvalidated: it may be shorter
// or longer than the input, or contain out-of-vocabulary keywords. An
// unparseable response yields an empty list. Requires 1 <= N <= 20.
std::vector<std::string> map_keywords_batch(Backend& backend,
                                            std::span<const std::string> items,
                                            VocabularyKind kind,
                                            const Taxonomy& taxonomy);

// Always returns an in-vocabulary keyword; out-of-vocabulary or unparseable
// answers fall back to "generic information" / "other".
std::string verify_keyword(Backend& backend, std::string_view item,
                           VocabularyKind kind, const Taxonomy& taxonomy);

// Candidate headings proposed by the backend (not yet verified against text).
std::vector<std::string> request_headings(Backend& backend,
                                          std::string_view text,
                                          const Taxonomy& taxonomy);

// Python repr of a list of strings: ['a', "b'c"].
std::string python_list_repr(std::span<const std::string> items);

}  // namespace ppaudit
