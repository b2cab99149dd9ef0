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

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppaudit/taxonomy.hpp"

namespace ppaudit {

struct ManifestInfo {
  std::string package_id;
  std::vector<std::string> permissions;  // sorted, unique

  bool operator==(const ManifestInfo&) const = default;
};

enum class EvidenceSource { kManifest, kApi };
std::string_view to_string(EvidenceSource source);

struct EvidenceEntry {
  EvidenceSource source = EvidenceSource::kManifest;
  std::string detail;  // permission, or "signature -> permission" for API refs

  auto operator<=>(const EvidenceEntry&) const = default;
};

struct EvidenceSet {
  std::set<DataItemId> items;
  std::map<DataItemId, std::vector<EvidenceEntry>> provenance;
  std::vector<std::string> unmapped_permissions;  // sorted, unique

  bool operator==(const EvidenceSet&) const = default;
};

// Decoded (textual) AndroidManifest.xml. Throws InputError on malformed XML
// or a missing package attribute.
ManifestInfo parse_manifest(std::string_view xml_text);

// Known signatures mapped to permissions; unknown ones ignored. Sorted, unique.
std::vector<std::string> map_api_refs(std::span<const std::string> method_refs,
                                      const std::map<std::string, std::string>& api_permission_map);

EvidenceSet permissions_to_items(std::span<const std::string> permissions,
                                 const std::map<std::string, DataItemId>& permission_item_map,
                                 EvidenceSource source = EvidenceSource::kManifest);

// Manifest permissions plus API-implied ones, with per-source provenance.
EvidenceSet build_evidence(const ManifestInfo& manifest, std::span<const std::string> method_refs,
                           const Taxonomy& taxonomy);

EvidenceSet merge_evidence(const EvidenceSet& a, const EvidenceSet& b);

void to_json(nlohmann::json& j, const ManifestInfo& m);
void to_json(nlohmann::json& j, const EvidenceSet& e);
void from_json(const nlohmann::json& j, EvidenceSet& e);

inline constexpr std::string_view kEvidenceSchema = "ppaudit.evidence/1";

// Reads an evidence JSON document written by to_json.
EvidenceSet load_evidence(const std::filesystem::path& path);

// A manifest path may hold XML or a JSON array of permission strings.
ManifestInfo load_manifest(const std::filesystem::path& path);
// A JSON array of signatures, or one signature per line.
std::vector<std::string> load_api_refs(const std::filesystem::path& path);

}  // namespace ppaudit
