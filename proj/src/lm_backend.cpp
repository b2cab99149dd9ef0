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

#include "ppaudit/lm_backend.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <regex>

#include "ppaudit/errors.hpp"
#include "ppaudit/rule_backend.hpp"
#include "ppaudit/text.hpp"

namespace ppaudit {

namespace {

constexpr std::array<std::pair<Task, std::string_view>, 7> kTaskNames = {{
    {Task::kHeadings, "headings"},
    {Task::kClassify, "classify"},
    {Task::kDecode, "decode"},
    {Task::kMapItems, "map_items"},
    {Task::kMapPurposes, "map_purposes"},
    {Task::kVerifyItem, "verify_item"},
    {Task::kVerifyPurpose, "verify_purpose"},
}};

// Strips a surrounding ```...``` fence if present.
std::string_view strip_fence(std::string_view raw) {
  raw = text::trim(raw);
  if (raw.starts_with("```")) {
    const std::size_t nl = raw.find('\n');
    raw = nl == std::string_view::npos ? std::string_view{} : raw.substr(nl + 1);
    const std::size_t close = raw.rfind("```");
    if (close != std::string_view::npos) raw = raw.substr(0, close);
  }
  return text::trim(raw);
}

std::string_view strip_quotes(std::string_view s) {
  s = text::trim(s);
  if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"' || s.front() == '`') &&
      s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

// Rewrites a Python literal (single-quoted strings, None/True/False) into
// JSON text. Already-valid JSON passes through unchanged.
std::string python_literal_to_json(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  auto is_ident = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
           (c >= '0' && c <= '9');
  };
  while (i < s.size()) {
    const char c = s[i];
    if (c == '"' || c == '\'') {
      const char quote = c;
      out.push_back('"');
      ++i;
      while (i < s.size() && s[i] != quote) {
        if (s[i] == '\\' && i + 1 < s.size()) {
          const char e = s[i + 1];
          if (e == '\'') {
            out.push_back('\'');
          } else {
            out.push_back('\\');
            out.push_back(e);
          }
          i += 2;
          continue;
        }
        if (s[i] == '"') {
          out += "\\\"";
        } else if (s[i] == '\n') {
          out += "\\n";
        } else if (s[i] == '\t') {
          out += "\\t";
        } else {
          out.push_back(s[i]);
        }
        ++i;
      }
      out.push_back('"');
      ++i;
      continue;
    }
    if (is_ident(c) && (i == 0 || !is_ident(s[i - 1]))) {
      std::size_t j = i;
      while (j < s.size() && is_ident(s[j])) ++j;
      const std::string_view word = s.substr(i, j - i);
      if (word == "None") {
        out += "null";
      } else if (word == "True") {
        out += "true";
      } else if (word == "False") {
        out += "false";
      } else {
        out += word;
      }
      i = j;
      continue;
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

std::optional<nlohmann::json> parse_loose_json(std::string_view s) {
  auto j = nlohmann::json::parse(s, nullptr, false);
  if (!j.is_discarded()) return j;
  j = nlohmann::json::parse(python_literal_to_json(s), nullptr, false);
  if (!j.is_discarded()) return j;
  return std::nullopt;
}

std::string field_as_string(const nlohmann::json& obj, std::string_view key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (it->is_string()) return std::string(text::trim(it->get<std::string>()));
  if (it->is_array()) {
    std::vector<std::string> parts;
    for (const auto& v : *it) {
      if (v.is_string()) {
        parts.emplace_back(text::trim(v.get<std::string>()));
      } else if (!v.is_null()) {
        parts.push_back(v.dump());
      }
    }
    return text::join(parts, ", ");
  }
  return it->dump();
}

// Splits the bracketed body of a mapping answer into quoted or bare tokens,
// remembering which token was followed by a colon.
struct MapToken {
  std::string value;
  bool is_key = false;
};

std::optional<std::vector<MapToken>> tokenize_mapping(std::string_view body) {
  std::vector<MapToken> tokens;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < body.size() && (body[i] == ' ' || body[i] == '\n' || body[i] == '\r' ||
                               body[i] == '\t')) {
      ++i;
    }
  };
  while (true) {
    skip_ws();
    if (i >= body.size()) break;
    std::string value;
    if (body[i] == '\'' || body[i] == '"') {
      const char quote = body[i++];
      bool closed = false;
      while (i < body.size()) {
        if (body[i] == '\\' && i + 1 < body.size()) {
          value.push_back(body[i + 1]);
          i += 2;
          continue;
        }
        if (body[i] == quote) {
          closed = true;
          ++i;
          break;
        }
        value.push_back(body[i++]);
      }
      if (!closed) return std::nullopt;
    } else {
      const std::size_t start = i;
      while (i < body.size() && body[i] != ',' && body[i] != ':') ++i;
      value = std::string(text::trim(body.substr(start, i - start)));
      // "N/A" unquoted contains no separator; URLs etc. are not expected.
      if (value.empty()) {
        if (i < body.size()) {
          ++i;
          continue;
        }
        break;
      }
    }
    skip_ws();
    MapToken tok{std::move(value), false};
    if (i < body.size() && body[i] == ':') {
      tok.is_key = true;
      ++i;
    } else if (i < body.size() && body[i] == ',') {
      ++i;
    } else if (i < body.size()) {
      return std::nullopt;
    }
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

}  // namespace

std::string_view to_string(Task task) {
  for (const auto& [t, name] : kTaskNames) {
    if (t == task) return name;
  }
  return "unknown";
}

std::optional<Task> task_from_string(std::string_view s) {
  for (const auto& [t, name] : kTaskNames) {
    if (name == s) return t;
  }
  return std::nullopt;
}

std::uint64_t next_correlation_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

// ---------------------------------------------------------------------------
// Grammars

std::optional<nlohmann::json> parse_headings_output(std::string_view raw,
                                                    std::string& error) {
  const std::string_view body = strip_fence(raw);
  const std::size_t open = body.find('[');
  const std::size_t close = body.rfind(']');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    error = "headings: no list found";
    return std::nullopt;
  }
  auto parsed = parse_loose_json(body.substr(open, close - open + 1));
  if (!parsed || !parsed->is_array()) {
    error = "headings: not a list";
    return std::nullopt;
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& v : *parsed) {
    if (!v.is_string()) {
      error = "headings: non-string entry";
      return std::nullopt;
    }
    out.push_back(v);
  }
  return out;
}

std::optional<nlohmann::json> parse_classify_output(std::string_view raw,
                                                    const Taxonomy& taxonomy,
                                                    std::string& error) {
  static const std::regex kCategory(R"(matching\s+category\s*[=:]\s*(.*))",
                                    std::regex::icase);
  static const std::regex kReason(R"(reason(ing)?\s*[=:]\s*)", std::regex::icase);
  const std::string body(strip_fence(raw));

  std::smatch m;
  if (!std::regex_search(body, m, kCategory)) {
    error = "classify: missing 'Matching category'";
    return std::nullopt;
  }
  std::string label_line = m[1].str();
  if (const auto nl = label_line.find('\n'); nl != std::string::npos) {
    label_line.resize(nl);
  }
  std::string_view label = strip_quotes(label_line);
  // Tolerate "1. First Party Collection / Use" and bare numbers.
  static const std::regex kNumbered(R"(^(\d{1,2})\.?\s*(.*)$)");
  std::optional<PracticeClass> cls = taxonomy.practice_class_from_label(label);
  std::cmatch nm;
  if (!cls && std::regex_match(label.begin(), label.end(), nm, kNumbered)) {
    const std::string rest(strip_quotes(nm[2].str()));
    cls = taxonomy.practice_class_from_label(rest);
    if (!cls && rest.empty()) {
      const int n = std::stoi(nm[1].str());
      if (n >= 1 && n <= kPracticeClassCount) cls = PracticeClass{n - 1};
    }
  }
  if (!cls) {
    error = "classify: unknown category '" + std::string(label) + "'";
    return std::nullopt;
  }

  std::string rationale;
  std::smatch rm;
  const std::string after = m.suffix().str();
  if (std::regex_search(after, rm, kReason)) {
    rationale = std::string(strip_quotes(rm.suffix().str()));
  }
  return nlohmann::json{{"class", cls->index}, {"rationale", rationale}};
}

std::optional<nlohmann::json> parse_decode_output(std::string_view raw,
                                                  std::string& error) {
  std::string_view body = strip_fence(raw);
  const std::size_t open = body.find_first_of("[{");
  const std::size_t close = body.find_last_of("]}");
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    error = "decode: no JSON list found";
    return std::nullopt;
  }
  body = body.substr(open, close - open + 1);
  auto parsed = parse_loose_json(body);
  if (!parsed) {
    error = "decode: output is not valid JSON";
    return std::nullopt;
  }
  if (parsed->is_object()) {
    // A single object, or {"processed_jsons": [...]}.
    if (parsed->size() == 1 && parsed->begin()->is_array()) {
      parsed = *parsed->begin();
    } else {
      parsed = nlohmann::json::array({*parsed});
    }
  }
  if (!parsed->is_array()) {
    error = "decode: top-level value is not a list";
    return std::nullopt;
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& entry : *parsed) {
    if (!entry.is_object()) {
      error = "decode: list entry is not an object";
      return std::nullopt;
    }
    PracticeTuple t;
    t.data = field_as_string(entry, "data");
    if (t.data.empty()) continue;
    t.purpose = field_as_string(entry, "purpose");
    t.processing = field_as_string(entry, "processing");
    t.retention = field_as_string(entry, "storage");
    if (t.retention.empty()) t.retention = field_as_string(entry, "retention");
    t.recipients = field_as_string(entry, "recipients");
    out.push_back(t);
  }
  return out;
}

std::optional<nlohmann::json> parse_mapping_output(std::string_view raw,
                                                   std::string& error) {
  std::string_view body = strip_fence(raw);
  const std::size_t open = body.find_first_of("[{");
  if (open == std::string_view::npos) {
    error = "mapping: no list or dict found";
    return std::nullopt;
  }
  const char closer = body[open] == '[' ? ']' : '}';
  const std::size_t close = body.rfind(closer);
  if (close == std::string_view::npos || close < open) {
    error = "mapping: unterminated list";
    return std::nullopt;
  }
  auto tokens = tokenize_mapping(body.substr(open + 1, close - open - 1));
  if (!tokens) {
    error = "mapping: malformed entries";
    return std::nullopt;
  }
  const bool has_pairs = std::any_of(tokens->begin(), tokens->end(),
                                     [](const MapToken& t) { return t.is_key; });
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < tokens->size(); ++i) {
    const MapToken& tok = (*tokens)[i];
    if (!has_pairs) {
      out.push_back(tok.value);
      continue;
    }
    if (!tok.is_key) {
      error = "mapping: value without key";
      return std::nullopt;
    }
    if (i + 1 >= tokens->size() || (*tokens)[i + 1].is_key) {
      error = "mapping: key without value";
      return std::nullopt;
    }
    out.push_back((*tokens)[i + 1].value);
    ++i;
  }
  return out;
}

std::optional<nlohmann::json> parse_verify_output(std::string_view raw,
                                                  std::string& error) {
  std::string_view body = strip_fence(raw);
  const std::size_t nl = body.find('\n');
  if (nl != std::string_view::npos) body = body.substr(0, nl);
  body = strip_quotes(body);
  if (body.starts_with("keyword")) {
    const std::size_t eq = body.find_first_of("=:");
    if (eq != std::string_view::npos) body = strip_quotes(body.substr(eq + 1));
  }
  if (body.empty()) {
    error = "verify: empty answer";
    return std::nullopt;
  }
  return nlohmann::json(std::string(body));
}

BackendResponse invoke(Backend& backend, const BackendRequest& request,
                       const Taxonomy& taxonomy) {
  BackendResponse response;
  response.task = request.task;
  response.correlation_id = request.correlation_id;
  response.backend_id = backend.id();
  const auto start = std::chrono::steady_clock::now();
  response.raw_text = backend.complete(request);
  response.latency = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::steady_clock::now() - start);
  std::string error;
  switch (request.task) {
    case Task::kHeadings:
      response.parsed = parse_headings_output(response.raw_text, error);
      break;
    case Task::kClassify:
      response.parsed = parse_classify_output(response.raw_text, taxonomy, error);
      break;
    case Task::kDecode:
      response.parsed = parse_decode_output(response.raw_text, error);
      break;
    case Task::kMapItems:
    case Task::kMapPurposes:
      response.parsed = parse_mapping_output(response.raw_text, error);
      break;
    case Task::kVerifyItem:
    case Task::kVerifyPurpose:
      response.parsed = parse_verify_output(response.raw_text, error);
      break;
  }
  if (!response.parsed) response.parse_error = error;
  return response;
}

// ---------------------------------------------------------------------------
// Typed helpers

void to_json(nlohmann::json& j, const PracticeTuple& t) {
  j = nlohmann::json{{"data", t.data},
                     {"purpose", t.purpose},
                     {"processing", t.processing},
                     {"retention", t.retention},
                     {"recipients", t.recipients}};
}

void from_json(const nlohmann::json& j, PracticeTuple& t) {
  t.data = j.value("data", "");
  t.purpose = j.value("purpose", "");
  t.processing = j.value("processing", "");
  t.retention = j.contains("retention") ? j.value("retention", "") : j.value("storage", "");
  t.recipients = j.value("recipients", "");
}

namespace {

BackendRequest make_request(Task task, nlohmann::json payload) {
  BackendRequest request;
  request.task = task;
  request.payload = std::move(payload);
  request.correlation_id = next_correlation_id();
  if (task == Task::kVerifyItem || task == Task::kVerifyPurpose) {
    request.budget.max_output_tokens = 16;
  } else if (task == Task::kDecode || task == Task::kHeadings) {
    request.budget.max_output_tokens = 1024;
  }
  return request;
}

bool rationale_ok(std::string_view rationale, std::string_view source) {
  return rationale.empty() || source.find(rationale) != std::string_view::npos;
}

}  // namespace

Classification classify_paragraph(Backend& backend, std::string_view text,
                                  const Taxonomy& taxonomy, const RuleLexicon* lexicon) {
  Classification result;
  std::optional<nlohmann::json> last;
  std::string last_error;
  for (int attempt = 1; attempt <= 2; ++attempt) {
    result.attempts = attempt;
    const BackendResponse response = invoke(
        backend, make_request(Task::kClassify, {{"text", std::string(text)}}), taxonomy);
    if (!response.parsed) {
      last_error = response.parse_error;
      continue;
    }
    last = response.parsed;
    const std::string rationale = last->at("rationale").get<std::string>();
    if (rationale_ok(rationale, text)) {
      result.practice_class = PracticeClass{last->at("class").get<int>()};
      result.rationale = rationale;
      return result;
    }
  }
  if (!last) throw BackendError("classification unparseable: " + last_error);
  result.practice_class = PracticeClass{last->at("class").get<int>()};
  result.rationale = lexicon ? lexicon->trigger_excerpt(text, result.practice_class) : "";
  result.rationale_repaired = true;
  return result;
}

DecodeResult decode_elements(Backend& backend, std::string_view text,
                             const Taxonomy& taxonomy) {
  DecodeResult result;
  const BackendResponse response = invoke(
      backend, make_request(Task::kDecode, {{"text", std::string(text)}}), taxonomy);
  if (!response.parsed) {
    result.parse_error = response.parse_error;
    return result;
  }
  for (const auto& t : *response.parsed) result.tuples.push_back(t.get<PracticeTuple>());
  return result;
}

std::vector<std::string> mapping_vocabulary(VocabularyKind kind, const Taxonomy& taxonomy) {
  std::vector<std::string> out;
  if (kind == VocabularyKind::kPurposes) {
    for (const auto& k : taxonomy.purpose_keywords()) out.push_back(k);
    return out;
  }
  for (int i = 0; i < kDataItemCount; ++i) {
    const DataItemId id{i};
    out.push_back(id == items::kNegative ? std::string(kNotApplicableKeyword)
                                         : taxonomy.keyword(id));
  }
  return out;
}

bool in_vocabulary(std::string_view keyword, VocabularyKind kind, const Taxonomy& taxonomy) {
  if (kind == VocabularyKind::kPurposes) {
    return taxonomy.purpose_from_keyword(keyword).has_value();
  }
  return taxonomy.data_item_from_keyword(keyword).has_value();
}

std::vector<std::string> map_keywords_batch(Backend& backend,
                                            std::span<const std::string> items,
                                            VocabularyKind kind, const Taxonomy& taxonomy) {
  if (items.empty() || items.size() > kMaxMappingBatch) {
    throw ContractViolation("map_keywords_batch: batch size must be 1..20, got " +
                            std::to_string(items.size()));
  }
  nlohmann::json list = nlohmann::json::array();
  for (const auto& item : items) list.push_back(item);
  const Task task = kind == VocabularyKind::kDataItems ? Task::kMapItems : Task::kMapPurposes;
  const BackendResponse response =
      invoke(backend, make_request(task, {{"items", list}}), taxonomy);
  std::vector<std::string> out;
  if (!response.parsed) return out;
  for (const auto& v : *response.parsed) out.push_back(v.get<std::string>());
  return out;
}

std::string verify_keyword(Backend& backend, std::string_view item, VocabularyKind kind,
                           const Taxonomy& taxonomy) {
  const bool items_kind = kind == VocabularyKind::kDataItems;
  const std::string fallback =
      items_kind ? taxonomy.keyword(items::kGenericInformation) : taxonomy.keyword(purposes::kOther);
  const Task task = items_kind ? Task::kVerifyItem : Task::kVerifyPurpose;
  std::optional<nlohmann::json> parsed;
  try {
    parsed = invoke(backend, make_request(task, {{"item", std::string(item)}}), taxonomy).parsed;
  } catch (const BackendError&) {
    return fallback;
  }
  if (!parsed || !parsed->is_string()) return fallback;
  const std::string answer = parsed->get<std::string>();
  if (items_kind) {
    const auto id = taxonomy.data_item_from_keyword(answer);
    if (!id) return fallback;
    return *id == items::kNegative ? std::string(kNotApplicableKeyword) : taxonomy.keyword(*id);
  }
  const auto id = taxonomy.purpose_from_keyword(answer);
  return id ? taxonomy.keyword(*id) : fallback;
}

std::vector<std::string> request_headings(Backend& backend, std::string_view text,
                                          const Taxonomy& taxonomy) {
  const BackendResponse response = invoke(
      backend, make_request(Task::kHeadings, {{"text", std::string(text)}}), taxonomy);
  std::vector<std::string> out;
  if (!response.parsed) return out;
  for (const auto& v : *response.parsed) out.push_back(v.get<std::string>());
  return out;
}

}  // namespace ppaudit
