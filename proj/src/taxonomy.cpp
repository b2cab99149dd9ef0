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

#include "ppaudit/taxonomy.hpp"

#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "bundled_data.hpp"
#include "ppaudit/errors.hpp"
#include "ppaudit/text.hpp"

namespace ppaudit {

bool is_compliance_relevant(DataItemId item, bool include_generic) {
  if (item.index >= 0 && item.index <= 20) return true;
  return include_generic && item == items::kGenericInformation;
}

bool is_permission_name(std::string_view permission) {
  static const std::regex kShape(
      R"(^[a-z][a-z0-9_]*(\.[A-Za-z0-9_]+)*\.[A-Z][A-Z0-9_]*$)");
  return std::regex_match(permission.begin(), permission.end(), kShape);
}

namespace {

std::vector<std::string> read_vocabulary(const nlohmann::json& doc,
                                         const char* key, std::size_t size) {
  if (!doc.contains(key) || !doc.at(key).is_array()) {
    throw InputError(std::string("taxonomy: missing array '") + key + "'");
  }
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& entry : doc.at(key)) {
    if (!entry.is_string()) {
      throw InputError(std::string("taxonomy: non-string entry in '") + key +
                       "'");
    }
    auto value = entry.get<std::string>();
    if (!seen.insert(text::normalize_keyword(value)).second) {
      throw InputError(std::string("taxonomy: duplicate entry '") + value +
                       "' in '" + key + "'");
    }
    out.push_back(std::move(value));
  }
  if (out.size() != size) {
    std::ostringstream msg;
    msg << "taxonomy: '" << key << "' must have " << size << " entries, found "
        << out.size();
    throw InputError(msg.str());
  }
  return out;
}

std::map<std::string, DataItemId> read_item_map(const nlohmann::json& doc,
                                                const char* key, int max_index,
                                                bool fold_keys) {
  std::map<std::string, DataItemId> out;
  if (!doc.contains(key)) return out;
  if (!doc.at(key).is_object()) {
    throw InputError(std::string("taxonomy: '") + key + "' must be an object");
  }
  for (const auto& [label, value] : doc.at(key).items()) {
    if (!value.is_number_integer()) {
      throw InputError("taxonomy: '" + label + "' needs an integer item index");
    }
    const int index = value.get<int>();
    if (index < 0 || index > max_index) {
      throw InputError("taxonomy: '" + label + "' maps to item " +
                       std::to_string(index) + ", allowed 0.." +
                       std::to_string(max_index));
    }
    auto k = fold_keys ? text::normalize_keyword(label) : label;
    if (!out.emplace(std::move(k), DataItemId{index}).second) {
      throw InputError("taxonomy: duplicate key '" + label + "' in " + key);
    }
  }
  return out;
}

}  // namespace

Taxonomy Taxonomy::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InputError("taxonomy: document must be an object");
  Taxonomy t;
  t.version_ = doc.value("version", std::string("unversioned"));
  t.data_items_ = read_vocabulary(doc, "data_items", kDataItemCount);
  t.purposes_ = read_vocabulary(doc, "purposes", kPurposeCount);
  t.practice_classes_ =
      read_vocabulary(doc, "practice_classes", kPracticeClassCount);
  t.ds_category_map_ = read_item_map(doc, "ds_category_map", 21, true);
  t.permission_item_map_ = read_item_map(doc, "permission_item_map", 20, false);
  for (const auto& [perm, item] : t.permission_item_map_) {
    if (!is_permission_name(perm)) {
      throw InputError("taxonomy: '" + perm + "' is not a permission name");
    }
  }
  if (doc.contains("api_permission_map")) {
    for (const auto& [sig, perm] : doc.at("api_permission_map").items()) {
      if (!perm.is_string() || !is_permission_name(perm.get<std::string>())) {
        throw InputError("taxonomy: api '" + sig + "' needs a permission name");
      }
      t.api_permission_map_.emplace(sig, perm.get<std::string>());
    }
  }

  for (int i = 0; i < kDataItemCount; ++i) {
    t.item_lookup_.emplace(text::normalize_keyword(t.data_items_[i]),
                           DataItemId{i});
  }
  t.item_lookup_.emplace(text::normalize_keyword(kNotApplicableKeyword),
                         items::kNegative);
  for (int i = 0; i < kPurposeCount; ++i) {
    t.purpose_lookup_.emplace(text::normalize_keyword(t.purposes_[i]),
                              PurposeId{i});
  }
  for (int i = 0; i < kPracticeClassCount; ++i) {
    t.class_lookup_.emplace(text::normalize_keyword(t.practice_classes_[i]),
                            PracticeClass{i});
  }
  return t;
}

Taxonomy Taxonomy::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("taxonomy: cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("taxonomy: " + path.string() + ": " + e.what());
  }
}

const Taxonomy& Taxonomy::bundled() {
  static const Taxonomy kBundled =
      from_json(nlohmann::json::parse(bundled::taxonomy_json()));
  return kBundled;
}

nlohmann::json Taxonomy::to_json() const {
  nlohmann::json doc;
  doc["version"] = version_;
  doc["data_items"] = data_items_;
  doc["purposes"] = purposes_;
  doc["practice_classes"] = practice_classes_;
  auto& ds = doc["ds_category_map"] = nlohmann::json::object();
  for (const auto& [k, v] : ds_category_map_) ds[k] = v.index;
  auto& perms = doc["permission_item_map"] = nlohmann::json::object();
  for (const auto& [k, v] : permission_item_map_) perms[k] = v.index;
  doc["api_permission_map"] = api_permission_map_;
  return doc;
}

const std::string& Taxonomy::keyword(DataItemId id) const {
  if (id.index < 0 || id.index >= kDataItemCount) {
    throw ContractViolation("data item index out of range: " +
                            std::to_string(id.index));
  }
  return data_items_[id.index];
}

const std::string& Taxonomy::keyword(PurposeId id) const {
  if (id.index < 0 || id.index >= kPurposeCount) {
    throw ContractViolation("purpose index out of range: " +
                            std::to_string(id.index));
  }
  return purposes_[id.index];
}

const std::string& Taxonomy::label(PracticeClass id) const {
  if (id.index < 0 || id.index >= kPracticeClassCount) {
    throw ContractViolation("practice class index out of range: " +
                            std::to_string(id.index));
  }
  return practice_classes_[id.index];
}

std::optional<DataItemId> Taxonomy::data_item_from_keyword(
    std::string_view text) const {
  auto it = item_lookup_.find(text::normalize_keyword(text));
  if (it == item_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<PurposeId> Taxonomy::purpose_from_keyword(
    std::string_view text) const {
  auto it = purpose_lookup_.find(text::normalize_keyword(text));
  if (it == purpose_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<PracticeClass> Taxonomy::practice_class_from_label(
    std::string_view text) const {
  auto it = class_lookup_.find(text::normalize_keyword(text));
  if (it == class_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<DataItemId> Taxonomy::ds_category(std::string_view label) const {
  auto it = ds_category_map_.find(text::normalize_keyword(label));
  if (it == ds_category_map_.end()) return std::nullopt;
  return it->second;
}

std::optional<DataItemId> Taxonomy::permission_item(
    std::string_view permission) const {
  auto it = permission_item_map_.find(std::string(text::trim(permission)));
  if (it == permission_item_map_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> Taxonomy::api_permission(
    std::string_view signature) const {
  auto it = api_permission_map_.find(std::string(text::trim(signature)));
  if (it == api_permission_map_.end()) return std::nullopt;
  return it->second;
}

}  // namespace ppaudit
