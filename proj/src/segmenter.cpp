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

#include "ppaudit/segmenter.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include "ppaudit/errors.hpp"
#include "ppaudit/text.hpp"

namespace ppaudit {

std::vector<Heading> verify_headings(std::string_view text,
                                     std::span<const std::string> candidates) {
  std::map<std::string, int, std::less<>> pending;  // candidate -> unbound copies
  for (const auto& c : candidates) {
    const std::string_view t = text::trim(c);
    if (!t.empty()) ++pending[std::string(t)];
  }
  std::vector<Heading> out;
  int line_index = 0;
  for (std::string_view line : text::split_lines_keep_ends(text)) {
    const std::string_view t = text::trim(line);
    if (auto it = pending.find(t); it != pending.end() && it->second > 0) {
      --it->second;
      out.push_back({line_index, std::string(t)});
    }
    ++line_index;
  }
  return out;
}

std::vector<std::size_t> section_lengths(std::string_view text,
                                         std::span<const Heading> headings) {
  std::vector<std::size_t> out;
  for (const Section& s : split_sections(text, headings)) {
    if (!s.heading) continue;
    out.push_back(text::code_point_count(s.heading_line) + text::code_point_count(s.body));
  }
  return out;
}

TrialStats length_stats(std::span<const std::size_t> lengths) {
  TrialStats stats;
  if (lengths.empty()) return stats;
  const double n = static_cast<double>(lengths.size());
  stats.mean = std::accumulate(lengths.begin(), lengths.end(), 0.0) / n;
  double ss = 0.0;
  for (std::size_t len : lengths) {
    const double d = static_cast<double>(len) - stats.mean;
    ss += d * d;
  }
  stats.std = std::sqrt(ss / n);
  return stats;
}

std::size_t select_trial(std::span<const TrialStats> trials) {
  if (trials.empty()) throw ContractViolation("select_trial: no trials");
  std::size_t best = 0;
  for (std::size_t i = 1; i < trials.size(); ++i) {
    if (trials[i].mean - trials[i].std > trials[best].mean - trials[best].std) best = i;
  }
  return best;
}

HeadingSet extract_headings(std::string_view text, Backend& backend,
                            const Taxonomy& taxonomy, int trials) {
  if (trials < 1) throw ContractViolation("extract_headings: trials must be >= 1");
  std::vector<std::vector<Heading>> sets;
  std::vector<TrialStats> stats;
  int failures = 0;
  std::string last_error;
  for (int t = 0; t < trials; ++t) {
    std::vector<Heading> verified;
    try {
      verified = verify_headings(text, request_headings(backend, text, taxonomy));
    } catch (const BackendError& e) {
      ++failures;
      last_error = e.what();
    }
    const auto lengths = section_lengths(text, verified);
    stats.push_back(length_stats(lengths));
    sets.push_back(std::move(verified));
  }
  if (failures == trials) {
    throw StageError("segment", StageError::Kind::kBackend,
                     "all " + std::to_string(trials) + " heading trials failed: " + last_error);
  }
  const std::size_t best = select_trial(stats);
  HeadingSet out;
  out.headings = std::move(sets[best]);
  out.trial_id = static_cast<int>(best) + 1;
  out.section_length_mean = stats[best].mean;
  out.section_length_std = stats[best].std;
  return out;
}

std::vector<Section> split_sections(std::string_view text,
                                    std::span<const Heading> headings) {
  const auto lines = text::split_lines_keep_ends(text);
  const int line_count = static_cast<int>(lines.size());
  int prev = -1;
  for (const auto& h : headings) {
    if (h.line_index <= prev || h.line_index >= line_count) {
      throw ContractViolation("split_sections: heading lines must be increasing and in range");
    }
    prev = h.line_index;
  }

  std::vector<std::size_t> offsets(lines.size() + 1, 0);
  for (std::size_t i = 0; i < lines.size(); ++i) offsets[i + 1] = offsets[i] + lines[i].size();

  std::vector<Section> out;
  auto slice = [&](int a, int b) {
    return std::string(text.substr(offsets[a], offsets[b] - offsets[a]));
  };
  const int first = headings.empty() ? line_count : headings.front().line_index;
  if (first > 0 || headings.empty()) {
    Section pre;
    pre.begin_line = 0;
    pre.end_line = first;
    pre.body = slice(0, first);
    out.push_back(std::move(pre));
  }
  for (std::size_t i = 0; i < headings.size(); ++i) {
    const int begin = headings[i].line_index;
    const int end = i + 1 < headings.size() ? headings[i + 1].line_index : line_count;
    Section s;
    s.heading = headings[i].text;
    s.heading_line = slice(begin, begin + 1);
    s.body = slice(begin + 1, end);
    s.begin_line = begin;
    s.end_line = end;
    s.begin_offset = offsets[begin];
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ParagraphUnit> merge_paragraphs(const Section& section, int section_index,
                                            std::size_t min_len, int first_unit_id) {
  std::vector<ParagraphUnit> out;
  const std::size_t body_offset = section.begin_offset + section.heading_line.size();
  std::size_t cursor = 0;
  std::size_t unit_begin = 0;
  bool has_content = false;
  auto current_len = [&](std::size_t end) {
    return text::code_point_count(
        text::trim(std::string_view(section.body).substr(unit_begin, end - unit_begin)));
  };
  auto emit = [&](std::size_t end) {
    ParagraphUnit u;
    u.unit_id = first_unit_id + static_cast<int>(out.size());
    u.section_index = section_index;
    u.text = section.body.substr(unit_begin, end - unit_begin);
    u.char_len = text::code_point_count(text::trim(u.text));
    u.begin_offset = body_offset + unit_begin;
    out.push_back(std::move(u));
    unit_begin = end;
    has_content = false;
  };
  for (std::string_view line : text::split_lines_keep_ends(section.body)) {
    cursor += line.size();
    if (text::trim(line).empty()) continue;
    has_content = true;
    if (current_len(cursor) >= min_len) emit(cursor);
  }
  if (has_content) {
    emit(cursor);
  } else if (unit_begin < cursor && !out.empty()) {
    // Trailing blank lines join the last unit.
    out.back().text += section.body.substr(unit_begin);
  }
  return out;
}

std::vector<ParagraphUnit> segment_units(std::span<const Section> sections,
                                         std::size_t min_len) {
  std::vector<ParagraphUnit> out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    auto units = merge_paragraphs(sections[i], static_cast<int>(i), min_len,
                                  static_cast<int>(out.size()));
    for (auto& u : units) out.push_back(std::move(u));
  }
  return out;
}

void to_json(nlohmann::json& j, const Heading& h) {
  j = nlohmann::json{{"line", h.line_index}, {"text", h.text}};
}

void from_json(const nlohmann::json& j, Heading& h) {
  h.line_index = j.at("line").get<int>();
  h.text = j.at("text").get<std::string>();
}

void to_json(nlohmann::json& j, const HeadingSet& h) {
  j = nlohmann::json{{"headings", h.headings},
                     {"trial_id", h.trial_id},
                     {"section_length_mean", h.section_length_mean},
                     {"section_length_std", h.section_length_std}};
}

void from_json(const nlohmann::json& j, HeadingSet& h) {
  h.headings = j.at("headings").get<std::vector<Heading>>();
  h.trial_id = j.at("trial_id").get<int>();
  h.section_length_mean = j.at("section_length_mean").get<double>();
  h.section_length_std = j.at("section_length_std").get<double>();
}

void to_json(nlohmann::json& j, const Section& s) {
  j = nlohmann::json{{"heading", s.heading ? nlohmann::json(*s.heading) : nlohmann::json()},
                     {"begin_line", s.begin_line},
                     {"end_line", s.end_line},
                     {"begin_offset", s.begin_offset},
                     {"heading_line", s.heading_line},
                     {"body", s.body}};
}

void to_json(nlohmann::json& j, const ParagraphUnit& u) {
  j = nlohmann::json{{"unit_id", u.unit_id},
                     {"section", u.section_index},
                     {"begin_offset", u.begin_offset},
                     {"char_len", u.char_len},
                     {"text", u.text}};
}

void from_json(const nlohmann::json& j, ParagraphUnit& u) {
  u.unit_id = j.at("unit_id").get<int>();
  u.section_index = j.at("section").get<int>();
  u.begin_offset = j.at("begin_offset").get<std::size_t>();
  u.char_len = j.at("char_len").get<std::size_t>();
  u.text = j.at("text").get<std::string>();
}

}  // namespace ppaudit
