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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppaudit/report.hpp"

namespace ppaudit {

// One row of an apps index (apps.json). Relative paths resolve against the
// index file's directory.
struct AppMetadata {
  std::string app_id;
  std::optional<std::string> developer;
  std::uint64_t downloads = 0;
  std::string policy;  // path or URL
  std::optional<std::filesystem::path> ds;
  std::optional<std::filesystem::path> manifest;
  std::optional<std::filesystem::path> api_refs;
  std::optional<std::filesystem::path> evidence;

  AuditRequest to_request() const;
};

std::vector<AppMetadata> load_app_index(const std::filesystem::path& path);

struct CorpusSummary {
  nlohmann::json json;       // full corpus report
  std::string iou_csv;       // 23 x 8 grid, "NA" for undefined cells
  std::string trend_csv;     // metric,rank,mean,std,band_low,band_high,samples
};

// Reuse groups, super-data-safety scores, mean scores (NA excluded), the
// purpose IoU grid and download-ranked trends. Reports are matched to the
// index by app id; apps without a report are listed as missing.
CorpusSummary summarize_corpus(std::span<const ComplianceReport> reports,
                               std::span<const AppMetadata> apps, int window = 50);

// Reports (*.json) in a directory, sorted by file name.
std::vector<ComplianceReport> load_reports_dir(const std::filesystem::path& dir);

}  // namespace ppaudit
