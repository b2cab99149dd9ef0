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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppaudit/datasafety.hpp"
#include "ppaudit/extraction.hpp"
#include "ppaudit/ingest.hpp"
#include "ppaudit/metrics.hpp"

namespace ppaudit {

struct AppEntry {
  std::string app_id;
  std::string policy_id;
  std::string policy_url;
  std::uint64_t downloads = 0;
};

struct ReuseGroup {
  std::string key;  // policy_id, or the URL for URL-level groups
  std::vector<std::string> member_app_ids;  // sorted
  std::string representative_app;

  bool operator==(const ReuseGroup&) const = default;
};

struct ReuseReport {
  std::vector<ReuseGroup> by_content;  // sorted by key
  std::vector<ReuseGroup> by_url;
};

// Representative = most downloads, ties to the smallest app id.
ReuseReport detect_reuse(std::span<const AppEntry> apps);

// Element-wise OR of both grids. Throws ContractViolation on empty input.
DsDeclaration super_data_safety(std::span<const DsDeclaration> declarations);

struct IouInput {
  PracticeMatrix pp;
  BinaryGrid ds{};
};

using IouGrid = std::array<std::array<Ratio, kPurposeCount>, kDataItemCount>;

// cell(j,k) = #(in_pp && in_ds) / #(in_pp || in_ds) over pairs holding j on
// both sides; NA when the denominator is zero.
IouGrid corpus_purpose_iou(std::span<const IouInput> pairs, bool include_generic = false);

struct TrendPoint {
  int rank = 0;  // 0-based position in the download-sorted input
  Ratio mean;
  double std = 0.0;  // population std of the window's valid scores
  int samples = 0;

  double band_low() const { return mean ? *mean - 0.5 * std : 0.0; }
  double band_high() const { return mean ? *mean + 0.5 * std : 0.0; }
};

struct TrendSeries {
  int window = 50;
  std::vector<TrendPoint> points;
};

// Centered window [i - window/2, i + (window - window/2) - 1], clipped at the
// edges; NA scores are skipped.
TrendSeries moving_average_trend(std::span<const Ratio> scores, int window = 50);

struct Flag {
  bool value = false;
  std::string evidence;

  bool operator==(const Flag&) const = default;
};

struct AuditFlags {
  Flag redirected;
  Flag placeholder_content;
  Flag name_mismatch;
  Flag empty_policy;
  Flag non_english;

  bool operator==(const AuditFlags&) const = default;
};

struct AuditInputs {
  std::vector<std::string> redirect_chain;
  std::optional<std::string> plain_text;  // absent when nothing was retrieved
  std::optional<int> practice_units;      // c0 + c1 units; empty when not analyzed
  std::vector<AdmissionReason> admission_reasons;
  std::optional<std::string> developer_name;
  std::vector<std::string> contact_texts;  // c10 unit texts
};

struct AuditThresholds {
  std::size_t placeholder_chars = 400;
};

AuditFlags audit_flags(const AuditInputs& in, const AuditThresholds& thresholds = {});

void to_json(nlohmann::json& j, const Flag& f);
void from_json(const nlohmann::json& j, Flag& f);
void to_json(nlohmann::json& j, const AuditFlags& f);
void from_json(const nlohmann::json& j, AuditFlags& f);
void to_json(nlohmann::json& j, const ReuseGroup& g);
void to_json(nlohmann::json& j, const TrendSeries& t);
nlohmann::json iou_to_json(const IouGrid& grid);

}  // namespace ppaudit
