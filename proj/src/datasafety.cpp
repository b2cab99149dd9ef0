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

#include "ppaudit/datasafety.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ppaudit/errors.hpp"
#include "ppaudit/html.hpp"
#include "ppaudit/text.hpp"

namespace ppaudit {

namespace {

struct PurposeAlias {
  std::string_view label;  // case-folded Google label
  PurposeId purpose;
};

// Longest first so multi-comma labels win over their fragments.
constexpr std::array<PurposeAlias, 9> kPurposeAliases = {{
    {"fraud prevention, security, and compliance", purposes::kFraudPrevention},
    {"fraud prevention, security and compliance", purposes::kFraudPrevention},
    {"developer communications", purposes::kDeveloperCommunication},
    {"advertising or marketing", purposes::kAdvertising},
    {"account management", purposes::kAccountManagement},
    {"app functionality", purposes::kAppFunctionality},
    {"personalization", purposes::kPersonalization},
    {"analytics", purposes::kAnalytics},
    {"other", purposes::kOther},
}};

std::string_view practice_name(DsPractice p) {
  switch (p) {
    case DsPractice::kCollected:
      return "collected";
    case DsPractice::kShared:
      return "shared";
    case DsPractice::kSecurity:
      return "security";
  }
  return "collected";
}

DsPractice practice_from_name(std::string_view s) {
  if (s == "collected") return DsPractice::kCollected;
  if (s == "shared") return DsPractice::kShared;
  if (s == "security") return DsPractice::kSecurity;
  throw InputError("unknown DS practice '" + std::string(s) + "'");
}

bool is_negative_value(std::string_view folded) {
  return folded == "no" || folded == "false" || folded.starts_with("no ") ||
         folded.find("not ") != std::string_view::npos;
}

nlohmann::json grid_to_json(const BinaryGrid& g) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : g) {
    nlohmann::json r = nlohmann::json::array();
    for (auto v : row) r.push_back(static_cast<int>(v));
    rows.push_back(std::move(r));
  }
  return rows;
}

BinaryGrid grid_from_json(const nlohmann::json& j) {
  BinaryGrid g{};
  if (!j.is_array() || j.size() != kDataItemCount) {
    throw InputError("DS grid must have 23 rows");
  }
  for (int r = 0; r < kDataItemCount; ++r) {
    if (!j[r].is_array() || j[r].size() != kPurposeCount) {
      throw InputError("DS grid rows must have 8 columns");
    }
    for (int c = 0; c < kPurposeCount; ++c) {
      const int v = j[r][c].get<int>();
      if (v != 0 && v != 1) throw InputError("DS grid entries must be 0 or 1");
      g[r][c] = static_cast<std::uint8_t>(v);
    }
  }
  return g;
}

nlohmann::json optional_bool(const std::optional<bool>& b) {
  return b ? nlohmann::json(*b) : nlohmann::json();
}

std::optional<bool> optional_bool_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<bool>();
}

}  // namespace

std::optional<DsPractice> ds_practice_from_label(std::string_view d_prac) {
  const std::string f = text::normalize_keyword(d_prac);
  if (f.find("security") != std::string::npos) return DsPractice::kSecurity;
  if (f.find("shared") != std::string::npos || f.find("sharing") != std::string::npos) {
    return DsPractice::kShared;
  }
  if (f.find("collect") != std::string::npos) return DsPractice::kCollected;
  return std::nullopt;
}

std::vector<DsRecord> sanitize_ds_html(std::string_view html_text, const DsLayout& layout,
                                       std::vector<std::string>* warnings) {
  const html::Document doc = html::Document::parse(html_text);
  std::vector<DsRecord> out;
  const auto sections = doc.root().find_by_class(layout.section);
  for (const html::Node* section : sections) {
    const html::Node* title = section->first_by_class(layout.section_title);
    const std::string prac = title ? title->inner_text() : "";
    if (prac.empty()) {
      if (warnings) warnings->push_back("DS section without a title skipped");
      continue;
    }
    for (const html::Node* category : section->find_by_class(layout.category)) {
      const html::Node* name = category->first_by_class(layout.category_name);
      const std::string cata = name ? name->inner_text() : "";
      if (cata.empty()) {
        if (warnings) warnings->push_back("DS category without a name under '" + prac + "'");
        continue;
      }
      const auto details = category->find_by_class(layout.detail);
      if (details.empty()) {
        // Flag-style entries (security practices) carry no detail rows.
        out.push_back({prac, cata, cata, "declared"});
        continue;
      }
      for (const html::Node* detail : details) {
        const html::Node* label = detail->first_by_class(layout.detail_label);
        const html::Node* value = detail->first_by_class(layout.detail_value);
        DsRecord r{prac, cata, label ? label->inner_text() : "",
                   value ? value->inner_text() : ""};
        if (r.d_detl.empty() || r.d_valu.empty()) {
          if (warnings) warnings->push_back("incomplete DS detail under '" + cata + "'");
          continue;
        }
        out.push_back(std::move(r));
      }
    }
  }
  if (sections.empty() && warnings) {
    warnings->push_back("unrecognized layout: no Data Safety sections found");
  }
  return out;
}

DsParseResult sanitize_ds_html(std::string_view html_text, const DsLayout& layout) {
  DsParseResult result;
  result.records = sanitize_ds_html(html_text, layout, &result.warnings);
  return result;
}

std::vector<PurposeId> parse_ds_purposes(std::string_view d_valu, const Taxonomy& taxonomy,
                                         std::vector<std::string>* unmapped) {
  const std::string s = text::normalize_keyword(d_valu);
  std::vector<PurposeId> out;
  std::size_t pos = 0;
  auto push = [&](PurposeId p) {
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  };
  while (pos < s.size()) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == ',')) ++pos;
    if (pos >= s.size()) break;
    bool matched = false;
    for (const auto& alias : kPurposeAliases) {
      const std::size_t end = pos + alias.label.size();
      if (s.compare(pos, alias.label.size(), alias.label) == 0 &&
          (end == s.size() || s[end] == ',')) {
        push(alias.purpose);
        pos = end;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    const std::string piece(text::trim(std::string_view(s).substr(pos, comma - pos)));
    if (auto p = taxonomy.purpose_from_keyword(piece)) {
      push(*p);
    } else if (unmapped) {
      unmapped->push_back("purpose:" + piece);
    }
    pos = comma;
  }
  return out;
}

DsDeclaration normalize_ds(std::span<const DsRecord> records, const Taxonomy& taxonomy) {
  DsDeclaration d;
  d.records.assign(records.begin(), records.end());
  auto note_unmapped = [&](std::string label) {
    if (std::find(d.unmapped_labels.begin(), d.unmapped_labels.end(), label) ==
        d.unmapped_labels.end()) {
      d.unmapped_labels.push_back(std::move(label));
    }
  };
  // Categories seen without any purpose detail get the "other" column.
  std::vector<std::pair<DsPractice, DataItemId>> needs_purpose;
  std::vector<std::pair<DsPractice, DataItemId>> has_purpose;
  std::vector<int> first_record;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const DsRecord& r = records[i];
    const auto practice = ds_practice_from_label(r.d_prac);
    if (!practice) {
      note_unmapped("practice:" + r.d_prac);
      continue;
    }
    if (*practice == DsPractice::kSecurity) {
      const std::string cat = text::normalize_keyword(r.d_cata);
      const std::string val = text::normalize_keyword(r.d_valu);
      const bool negated = is_negative_value(val) || cat.find("not ") != std::string::npos ||
                           cat.find("cannot") != std::string::npos ||
                           cat.find("n't ") != std::string::npos ||
                           cat.find("n\u2019t ") != std::string::npos;
      if (cat.find("encrypt") != std::string::npos) {
        d.security.encrypted_in_transit = !negated;
      } else if (cat.find("delet") != std::string::npos) {
        d.security.deletion_requestable = !negated;
      } else {
        note_unmapped("security:" + r.d_cata);
      }
      continue;
    }
    const auto item = taxonomy.ds_category(r.d_cata);
    if (!item) {
      note_unmapped("category:" + r.d_cata);
      continue;
    }
    BinaryGrid& grid = *practice == DsPractice::kShared ? d.share : d.collect;
    const auto key = std::make_pair(*practice, *item);
    const std::string detl = text::normalize_keyword(r.d_detl);
    if (detl.find("purpose") == std::string::npos) {
      if (std::find(needs_purpose.begin(), needs_purpose.end(), key) == needs_purpose.end()) {
        needs_purpose.push_back(key);
        first_record.push_back(static_cast<int>(i));
      }
      continue;
    }
    std::vector<std::string> unmapped;
    const auto purposes = parse_ds_purposes(r.d_valu, taxonomy, &unmapped);
    for (auto& u : unmapped) note_unmapped(std::move(u));
    if (!purposes.empty()) has_purpose.push_back(key);
    for (PurposeId p : purposes) {
      grid[item->index][p.index] = 1;
      d.provenance.push_back({*practice, *item, p, static_cast<int>(i)});
    }
  }
  for (std::size_t k = 0; k < needs_purpose.size(); ++k) {
    const auto& key = needs_purpose[k];
    if (std::find(has_purpose.begin(), has_purpose.end(), key) != has_purpose.end()) continue;
    BinaryGrid& grid = key.first == DsPractice::kShared ? d.share : d.collect;
    grid[key.second.index][purposes::kOther.index] = 1;
    d.provenance.push_back({key.first, key.second, purposes::kOther, first_record[k]});
  }
  std::stable_sort(d.provenance.begin(), d.provenance.end(),
                   [](const DsProvenance& a, const DsProvenance& b) {
                     return a.record_index < b.record_index;
                   });
  return d;
}

std::string to_tagged_text(std::span<const DsRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += "<d_prac> " + r.d_prac + "\n";
    out += "<d_cata> " + r.d_cata + "\n";
    out += "<d_detl> " + r.d_detl + "\n";
    out += "<d_valu> " + r.d_valu + "\n";
  }
  return out;
}

std::vector<std::pair<int, int>> set_bits(const BinaryGrid& grid) {
  std::vector<std::pair<int, int>> out;
  for (int r = 0; r < kDataItemCount; ++r) {
    for (int c = 0; c < kPurposeCount; ++c) {
      if (grid[r][c]) out.emplace_back(r, c);
    }
  }
  return out;
}

void to_json(nlohmann::json& j, const DsRecord& r) {
  j = nlohmann::json{
      {"d_prac", r.d_prac}, {"d_cata", r.d_cata}, {"d_detl", r.d_detl}, {"d_valu", r.d_valu}};
}

void from_json(const nlohmann::json& j, DsRecord& r) {
  r.d_prac = j.at("d_prac").get<std::string>();
  r.d_cata = j.at("d_cata").get<std::string>();
  r.d_detl = j.at("d_detl").get<std::string>();
  r.d_valu = j.at("d_valu").get<std::string>();
}

void to_json(nlohmann::json& j, const DsDeclaration& d) {
  nlohmann::json prov = nlohmann::json::array();
  for (const auto& p : d.provenance) {
    prov.push_back({{"practice", practice_name(p.practice)},
                    {"data_item", p.item.index},
                    {"purpose", p.purpose.index},
                    {"record", p.record_index}});
  }
  j = nlohmann::json{
      {"schema", kDsSchema},
      {"collect", grid_to_json(d.collect)},
      {"share", grid_to_json(d.share)},
      {"security",
       {{"deletion_requestable", optional_bool(d.security.deletion_requestable)},
        {"encrypted_in_transit", optional_bool(d.security.encrypted_in_transit)}}},
      {"unmapped_labels", d.unmapped_labels},
      {"records", d.records},
      {"provenance", std::move(prov)}};
}

void from_json(const nlohmann::json& j, DsDeclaration& d) {
  const std::string schema = j.value("schema", "");
  if (schema != kDsSchema) {
    throw InputError("DS declaration schema mismatch: expected " + std::string(kDsSchema) +
                     ", found '" + schema + "'");
  }
  d.collect = grid_from_json(j.at("collect"));
  d.share = grid_from_json(j.at("share"));
  const auto& sec = j.at("security");
  d.security.deletion_requestable = optional_bool_from(sec, "deletion_requestable");
  d.security.encrypted_in_transit = optional_bool_from(sec, "encrypted_in_transit");
  d.unmapped_labels = j.value("unmapped_labels", std::vector<std::string>{});
  d.records = j.value("records", std::vector<DsRecord>{});
  d.provenance.clear();
  for (const auto& p : j.value("provenance", nlohmann::json::array())) {
    DsProvenance v;
    v.practice = practice_from_name(p.at("practice").get<std::string>());
    v.item = DataItemId{p.at("data_item").get<int>()};
    v.purpose = PurposeId{p.at("purpose").get<int>()};
    v.record_index = p.at("record").get<int>();
    d.provenance.push_back(v);
  }
}

DsDeclaration load_ds_declaration(const std::filesystem::path& path, const Taxonomy& taxonomy,
                                  std::vector<std::string>* warnings, const DsLayout& layout) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open DS input " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();
  const std::string_view trimmed = text::trim(content);
  if (trimmed.starts_with("{")) {
    const auto j = nlohmann::json::parse(content, nullptr, false);
    if (j.is_discarded()) throw InputError("DS input is not valid JSON: " + path.string());
    try {
      return j.get<DsDeclaration>();
    } catch (const nlohmann::json::exception& e) {
      throw InputError("DS input " + path.string() + ": " + e.what());
    }
  }
  const auto records = sanitize_ds_html(content, layout, warnings);
  return normalize_ds(records, taxonomy);
}

}  // namespace ppaudit
