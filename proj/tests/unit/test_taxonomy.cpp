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

#include <gtest/gtest.h>

#include <set>

#include "ppaudit/errors.hpp"
#include "ppaudit/taxonomy.hpp"
#include "ppaudit/text.hpp"

namespace ppaudit {
namespace {

const Taxonomy& tax() { return Taxonomy::bundled(); }

TEST(Taxonomy, DataItemOrder) {
  const std::vector<std::string> want = {
      "name", "email", "user account", "address", "phone", "race/ethnicity",
      "political/religious", "gender", "financial", "location",
      "search and browsing history", "sms/messages/call log", "photos/videos",
      "audio/music", "health/fitness", "contacts", "calendar",
      "app performance/app activity", "device identifier", "files/documents",
      "other personal", "generic information"};
  const auto kws = tax().data_item_keywords();
  ASSERT_EQ(kws.size(), 23u);
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(kws[i], want[i]) << i;
  EXPECT_EQ(std::set<std::string>(kws.begin(), kws.end()).size(), 23u);
  EXPECT_EQ(tax().data_item_from_keyword("N/A"), items::kNegative);
}

TEST(Taxonomy, PurposeOrder) {
  const std::vector<std::string> want = {
      "analytics", "developer communication", "fraud prevention/security", "advertising",
      "personalization", "account management", "app functionality", "other"};
  const auto kws = tax().purpose_keywords();
  ASSERT_EQ(kws.size(), 8u);
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(kws[i], want[i]);
}

TEST(Taxonomy, PracticeClasses) {
  const auto labels = tax().practice_class_labels();
  ASSERT_EQ(labels.size(), 12u);
  EXPECT_EQ(labels.front(), "First Party Collection / Use");
  EXPECT_EQ(labels.back(), "Do Not Track");
}

TEST(Taxonomy, KeywordRoundTrip) {
  for (int i = 0; i < kDataItemCount; ++i) {
    EXPECT_EQ(tax().data_item_from_keyword(tax().keyword(DataItemId{i})), DataItemId{i});
  }
  for (int k = 0; k < kPurposeCount; ++k) {
    EXPECT_EQ(tax().purpose_from_keyword(tax().keyword(PurposeId{k})), PurposeId{k});
  }
  for (int c = 0; c < kPracticeClassCount; ++c) {
    EXPECT_EQ(tax().practice_class_from_label(tax().label(PracticeClass{c})), PracticeClass{c});
  }
  EXPECT_EQ(tax().data_item_from_keyword("  Device   IDENTIFIER "), items::kDeviceIdentifier);
  EXPECT_FALSE(tax().data_item_from_keyword("cookies"));
}

TEST(Taxonomy, DsCategoryMapTargetsConcreteOrGeneric) {
  ASSERT_FALSE(tax().ds_category_map().empty());
  for (const auto& [label, item] : tax().ds_category_map()) {
    EXPECT_GE(item.index, 0) << label;
    EXPECT_LE(item.index, 21) << label;
  }
  EXPECT_EQ(tax().ds_category("Device or other IDs"), items::kDeviceIdentifier);
  EXPECT_FALSE(tax().ds_category("Completely unknown label"));
}

TEST(Taxonomy, PermissionMapShapeAndRange) {
  ASSERT_FALSE(tax().permission_item_map().empty());
  for (const auto& [perm, item] : tax().permission_item_map()) {
    EXPECT_TRUE(is_permission_name(perm)) << perm;
    EXPECT_GE(item.index, 0);
    EXPECT_LE(item.index, 20) << perm;
  }
  for (const auto& [sig, perm] : tax().api_permission_map()) {
    EXPECT_TRUE(tax().permission_item(perm).has_value()) << sig << " -> " << perm;
  }
}

TEST(Taxonomy, PermissionNameShape) {
  EXPECT_TRUE(is_permission_name("android.permission.CAMERA"));
  EXPECT_TRUE(is_permission_name("com.android.vending.BILLING"));
  EXPECT_FALSE(is_permission_name("CAMERA"));
  EXPECT_FALSE(is_permission_name("android.permission.camera"));
}

TEST(Taxonomy, JsonRoundTripIsLossless) {
  const auto j = tax().to_json();
  const Taxonomy back = Taxonomy::from_json(j);
  EXPECT_EQ(back.to_json(), j);
  EXPECT_EQ(back.ds_category_map(), tax().ds_category_map());
  EXPECT_EQ(back.permission_item_map(), tax().permission_item_map());
  EXPECT_EQ(back.api_permission_map(), tax().api_permission_map());
}

TEST(Taxonomy, RejectsMalformedDocuments) {
  auto j = tax().to_json();
  j["purposes"].erase(j["purposes"].begin());
  EXPECT_THROW(Taxonomy::from_json(j), InputError);

  auto dup = tax().to_json();
  dup["data_items"][1] = dup["data_items"][0];
  EXPECT_THROW(Taxonomy::from_json(dup), InputError);

  auto neg = tax().to_json();
  neg["ds_category_map"]["bogus"] = 22;
  EXPECT_THROW(Taxonomy::from_json(neg), InputError);
}

TEST(Taxonomy, ComplianceRelevance) {
  EXPECT_TRUE(is_compliance_relevant(items::kName));
  EXPECT_TRUE(is_compliance_relevant(items::kOtherPersonal));
  EXPECT_FALSE(is_compliance_relevant(items::kGenericInformation));
  EXPECT_TRUE(is_compliance_relevant(items::kGenericInformation, true));
  EXPECT_FALSE(is_compliance_relevant(items::kNegative, true));
}

}  // namespace
}  // namespace ppaudit
