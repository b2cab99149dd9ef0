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

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace ppaudit {

inline constexpr int kDataItemCount = 23;
inline constexpr int kPurposeCount = 8;
inline constexpr int kPracticeClassCount = 12;

// Row of a practice matrix. 0..20 are concrete items, 21 is "generic
// information" and 22 is the "negative" sentinel used to filter noise.
struct DataItemId {
  int index = 0;
  auto operator<=>(const DataItemId&) const = default;
};

// Column of a practice matrix, 0..7.
struct PurposeId {
  int index = 0;
  auto operator<=>(const PurposeId&) const = default;
};

// Paragraph-level practice category, c0..c11.
struct PracticeClass {
  int index = 0;
  auto operator<=>(const PracticeClass&) const = default;
};

namespace items {
inline constexpr DataItemId kName{0};
inline constexpr DataItemId kEmail{1};
inline constexpr DataItemId kUserAccount{2};
inline constexpr DataItemId kAddress{3};
inline constexpr DataItemId kPhone{4};
inline constexpr DataItemId kFinancial{8};
inline constexpr DataItemId kLocation{9};
inline constexpr DataItemId kBrowsingHistory{10};
inline constexpr DataItemId kMessages{11};
inline constexpr DataItemId kPhotosVideos{12};
inline constexpr DataItemId kContacts{15};
inline constexpr DataItemId kCalendar{16};
inline constexpr DataItemId kAppActivity{17};
inline constexpr DataItemId kDeviceIdentifier{18};
inline constexpr DataItemId kOtherPersonal{20};
inline constexpr DataItemId kGenericInformation{21};
inline constexpr DataItemId kNegative{22};
}  // namespace items

namespace purposes {
inline constexpr PurposeId kAnalytics{0};
inline constexpr PurposeId kDeveloperCommunication{1};
inline constexpr PurposeId kFraudPrevention{2};
inline constexpr PurposeId kAdvertising{3};
inline constexpr PurposeId kPersonalization{4};
inline constexpr PurposeId kAccountManagement{5};
inline constexpr PurposeId kAppFunctionality{6};
inline constexpr PurposeId kOther{7};
}  // namespace purposes

namespace classes {
inline constexpr PracticeClass kFirstPartyCollection{0};
inline constexpr PracticeClass kThirdPartySharing{1};
inline constexpr PracticeClass kUserChoice{2};
inline constexpr PracticeClass kUserAccess{3};
inline constexpr PracticeClass kIntroductory{4};
inline constexpr PracticeClass kPolicyChange{5};
inline constexpr PracticeClass kDataSecurity{6};
inline constexpr PracticeClass kSpecificAudiences{7};
inline constexpr PracticeClass kNotCovered{8};
inline constexpr PracticeClass kDataRetention{9};
inline constexpr PracticeClass kPrivacyContact{10};
inline constexpr PracticeClass kDoNotTrack{11};
}  // namespace classes

// Items 0..20 take part in compliance sets. Generic information (21) is
// excluded unless `include_generic` is set; negative (22) never is.
bool is_compliance_relevant(DataItemId item, bool include_generic = false);

inline constexpr std::string_view kNotApplicableKeyword = "N/A";

// The shared vocabularies plus the label maps bridging Google Data Safety
// categories and Android permissions into them. Immutable after load.
class Taxonomy {
 public:
  static Taxonomy from_json(const nlohmann::json& doc);
  static Taxonomy load_file(const std::filesystem::path& path);
  // Built from data/taxonomy.json at compile time.
  static const Taxonomy& bundled();

  nlohmann::json to_json() const;

  const std::string& version() const { return version_; }

  const std::string& keyword(DataItemId id) const;
  const std::string& keyword(PurposeId id) const;
  const std::string& label(PracticeClass id) const;

  std::span<const std::string> data_item_keywords() const { return data_items_; }
  std::span<const std::string> purpose_keywords() const { return purposes_; }
  std::span<const std::string> practice_class_labels() const {
    return practice_classes_;
  }

  // Normalized exact match; "N/A" resolves to the negative item.
  std::optional<DataItemId> data_item_from_keyword(std::string_view text) const;
  std::optional<PurposeId> purpose_from_keyword(std::string_view text) const;
  std::optional<PracticeClass> practice_class_from_label(
      std::string_view text) const;

  std::optional<DataItemId> ds_category(std::string_view label) const;
  std::optional<DataItemId> permission_item(std::string_view permission) const;
  std::optional<std::string> api_permission(std::string_view signature) const;

  const std::map<std::string, DataItemId>& ds_category_map() const {
    return ds_category_map_;
  }
  const std::map<std::string, DataItemId>& permission_item_map() const {
    return permission_item_map_;
  }
  const std::map<std::string, std::string>& api_permission_map() const {
    return api_permission_map_;
  }

 private:
  std::string version_;
  std::vector<std::string> data_items_;
  std::vector<std::string> purposes_;
  std::vector<std::string> practice_classes_;
  std::map<std::string, DataItemId> ds_category_map_;
  std::map<std::string, DataItemId> permission_item_map_;
  std::map<std::string, std::string> api_permission_map_;

  std::map<std::string, DataItemId, std::less<>> item_lookup_;
  std::map<std::string, PurposeId, std::less<>> purpose_lookup_;
  std::map<std::string, PracticeClass, std::less<>> class_lookup_;
};

// True for android.permission.X or a vendor-prefixed dotted name ending in an
// upper-case constant (com.android.vending.BILLING).
bool is_permission_name(std::string_view permission);

}  // namespace ppaudit
