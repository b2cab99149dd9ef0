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
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace ppaudit {

struct FetchLimits {
  int max_redirects = 10;
  std::size_t max_bytes = 4 * 1024 * 1024;
  std::chrono::milliseconds timeout{30'000};
};

enum class FetchFailure {
  kNone,
  kNetwork,
  kTimeout,
  kRedirectLimit,
  kOversize,
  kHttpStatus,
  kBadUrl,
};

std::string_view to_string(FetchFailure f);

// Outcome of one policy download. redirect_chain[0] is always the requested
// URL; body is only populated for a 2xx final response.
struct FetchRecord {
  std::string requested_url;
  std::vector<std::string> redirect_chain;
  int final_status = 0;
  std::string content_type;
  std::string body;
  std::string fetched_at;  // ISO-8601 UTC
  FetchFailure failure = FetchFailure::kNone;
  std::string failure_detail;

  bool ok() const { return failure == FetchFailure::kNone; }
  bool redirected() const { return redirect_chain.size() > 1; }
};

void to_json(nlohmann::json& j, const FetchRecord& r);
void from_json(const nlohmann::json& j, FetchRecord& r);

// Follows redirects by hand so each hop is recorded. Never throws for
// network-level problems; they come back as a FetchRecord with `failure` set.
FetchRecord fetch_policy(const std::string& url, const FetchLimits& limits);

// Flattens an HTML page to text: scripts, styles and navigation dropped,
// block elements on their own lines, blank-line runs collapsed. Input with
// no markup is only line-normalized, which makes the function idempotent.
std::string html_to_text(std::string_view html);

struct LanguageGuess {
  std::string code = "und";
  double confidence = 0.0;
};

// Stopword/script-profile heuristic over en, ja, ko, pt, es, de, fr, zh.
// Texts shorter than 40 code points are "und" with confidence 0.
LanguageGuess guess_language(std::string_view text);

struct PolicyDocument {
  std::string policy_id;  // sha256 of lower-cased, whitespace-collapsed text
  std::string source_url;
  std::string content_type;
  std::string raw_html;
  std::string plain_text;
  std::size_t text_bytes = 0;
  LanguageGuess language;
  bool fetch_failed = false;
};

PolicyDocument make_policy_document(std::string source_url,
                                    std::string content_type,
                                    std::string raw_html);
// Wraps a fetch result; failed fetches yield an empty document flagged as such.
PolicyDocument make_policy_document(const FetchRecord& record);

std::string policy_id_for_text(std::string_view plain_text);

// Sorted by name; keep the enumerator order alphabetical.
enum class AdmissionReason { kEmpty, kFetchFailed, kNonEnglish, kNonHtml, kOversize };

std::string_view to_string(AdmissionReason r);
std::optional<AdmissionReason> admission_reason_from_string(std::string_view s);

struct AdmissionPolicy {
  std::size_t max_text_bytes = 51200;
  double min_english_confidence = 0.3;
};

struct AdmissionDecision {
  bool admitted = true;
  std::vector<AdmissionReason> reasons;

  bool has(AdmissionReason r) const;
};

AdmissionDecision admit_policy(const PolicyDocument& doc,
                               const AdmissionPolicy& policy = {});

bool is_html_content_type(std::string_view content_type);

// Content type for a local file, from its extension.
std::string content_type_for_path(std::string_view path);

}  // namespace ppaudit
