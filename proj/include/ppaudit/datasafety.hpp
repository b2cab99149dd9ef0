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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppaudit/taxonomy.hpp"

namespace ppaudit {

// One tagged path through a Data Safety page.
struct DsRecord {
  std::string d_prac;
  std::string d_cata;
  std::string d_detl;
  std::string d_valu;

  bool operator==(const DsRecord&) const = default;
};

// Element classes marking each level of the page tree.
struct DsLayout {
  std::string section = "ds-section";
  std::string section_title = "ds-section-title";
  std::string category = "ds-category";
  std::string category_name = "ds-category-name";
  std::string detail = "ds-detail";
  std::string detail_label = "ds-detail-label";
  std::string detail_value = "ds-detail-value";
};

struct DsParseResult {
  std::vector<DsRecord> records;
  std::vector<std::string> warnings;
};

enum class DsPractice { kCollected, kShared, kSecurity };

// Case-insensitive reading of a d_prac value.
std::optional<DsPractice> ds_practice_from_label(std::string_view d_prac);

using BinaryGrid = std::array<std::array<std::uint8_t, kPurposeCount>, kDataItemCount>;

struct DsProvenance {
  DsPractice practice = DsPractice::kCollected;
  DataItemId item;
  PurposeId purpose;
  int record_index = 0;

  bool operator==(const DsProvenance&) const = default;
};

struct DsSecurity {
  std::optional<bool> deletion_requestable;
  std::optional<bool> encrypted_in_transit;

  bool operator==(const DsSecurity&) const = default;
};

struct DsDeclaration {
  BinaryGrid collect{};
  BinaryGrid share{};
  DsSecurity security;
  std::vector<std::string> unmapped_labels;
  std::vector<DsRecord> records;
  std::vector<DsProvenance> provenance;

  bool operator==(const DsDeclaration&) const = default;
};

inline constexpr std::string_view kDsSchema = "ppaudit.ds/1";

std::vector<DsRecord> sanitize_ds_html(std::string_view html, const DsLayout& layout,
                                       std::vector<std::string>* warnings);
DsParseResult sanitize_ds_html(std::string_view html, const DsLayout& layout = {});

// Purpose labels inside one d_valu string; whole Google labels are matched
// before comma splitting. Unresolved pieces go to `unmapped`.
std::vector<PurposeId> parse_ds_purposes(std::string_view d_valu, const Taxonomy& taxonomy,
                                         std::vector<std::string>* unmapped);

DsDeclaration normalize_ds(std::span<const DsRecord> records, const Taxonomy& taxonomy);

// "<d_prac> ...\n<d_cata> ...\n<d_detl> ...\n<d_valu> ...\n" per record.
std::string to_tagged_text(std::span<const DsRecord> records);

// Set bits as (item, purpose) pairs, row-major.
std::vector<std::pair<int, int>> set_bits(const BinaryGrid& grid);

void to_json(nlohmann::json& j, const DsRecord& r);
void from_json(const nlohmann::json& j, DsRecord& r);
void to_json(nlohmann::json& j, const DsDeclaration& d);
void from_json(const nlohmann::json& j, DsDeclaration& d);

// Accepts a normalized JSON declaration or a saved HTML page.
DsDeclaration load_ds_declaration(const std::filesystem::path& path, const Taxonomy& taxonomy,
                                  std::vector<std::string>* warnings = nullptr,
                                  const DsLayout& layout = {});

}  // namespace ppaudit
