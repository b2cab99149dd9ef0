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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppaudit/lm_backend.hpp"
#include "ppaudit/taxonomy.hpp"

namespace ppaudit {

struct Heading {
  int line_index = 0;
  std::string text;  // trimmed line content

  bool operator==(const Heading&) const = default;
};

struct HeadingSet {
  std::vector<Heading> headings;
  int trial_id = 0;  // 1-based
  double section_length_mean = 0.0;
  double section_length_std = 0.0;
};

struct TrialStats {
  double mean = 0.0;
  double std = 0.0;
};

// A heading line plus everything up to the next heading. The preamble has no
// heading and an empty heading_line. heading_line + body is the exact slice
// [begin_line, end_line) of the source.
struct Section {
  std::optional<std::string> heading;
  std::string heading_line;
  std::string body;
  int begin_line = 0;
  int end_line = 0;  // exclusive
  std::size_t begin_offset = 0;
};

// A merged classification unit: a verbatim slice of a section body.
struct ParagraphUnit {
  int unit_id = 0;
  int section_index = 0;
  std::string text;
  std::size_t char_len = 0;  // code points of the trimmed text
  std::size_t begin_offset = 0;  // byte offset in the document
};

inline constexpr std::size_t kDefaultMinUnitLength = 512;

// Candidates kept only when some line, trimmed, equals them; each candidate
// binds to its first unused matching line. Output is in line order.
std::vector<Heading> verify_headings(std::string_view text,
                                     std::span<const std::string> candidates);

// Code-point lengths of the heading-bounded sections (preamble excluded).
std::vector<std::size_t> section_lengths(std::string_view text,
                                         std::span<const Heading> headings);

TrialStats length_stats(std::span<const std::size_t> lengths);

// Index of the trial with the largest mean - std; the earliest wins ties.
std::size_t select_trial(std::span<const TrialStats> trials);

// Runs `trials` heading requests and keeps the best verified set. Throws
// StageError when every trial fails at the transport level.
HeadingSet extract_headings(std::string_view text, Backend& backend,
                            const Taxonomy& taxonomy, int trials = 3);

std::vector<Section> split_sections(std::string_view text,
                                    std::span<const Heading> headings);

// Greedy forward merge of non-blank lines until a unit reaches `min_len`.
// Blank lines never close a unit; trailing ones join the last unit.
std::vector<ParagraphUnit> merge_paragraphs(const Section& section, int section_index,
                                            std::size_t min_len = kDefaultMinUnitLength,
                                            int first_unit_id = 0);

std::vector<ParagraphUnit> segment_units(std::span<const Section> sections,
                                         std::size_t min_len = kDefaultMinUnitLength);

void to_json(nlohmann::json& j, const Heading& h);
void from_json(const nlohmann::json& j, Heading& h);
void to_json(nlohmann::json& j, const HeadingSet& h);
void from_json(const nlohmann::json& j, HeadingSet& h);
void to_json(nlohmann::json& j, const Section& s);
void to_json(nlohmann::json& j, const ParagraphUnit& u);
void from_json(const nlohmann::json& j, ParagraphUnit& u);

}  // namespace ppaudit
