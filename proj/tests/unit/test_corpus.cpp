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

#include <cmath>
#include <random>

#include "ppaudit/corpus.hpp"
#include "ppaudit/errors.hpp"

namespace ppaudit {
namespace {

BinaryGrid random_grid(std::mt19937& rng, int density) {
  BinaryGrid g{};
  for (int j = 0; j < kDataItemCount; ++j) {
    for (int k = 0; k < kPurposeCount; ++k) g[j][k] = rng() % density == 0;
  }
  return g;
}

TEST(Reuse, SameContentDifferentUrls) {
  const std::vector<AppEntry> apps = {{"b.app", "h1", "https://x/a", 10},
                                      {"a.app", "h1", "https://y/b", 10},
                                      {"c.app", "h2", "https://x/a", 99}};
  const auto r = detect_reuse(apps);
  ASSERT_EQ(r.by_content.size(), 2u);
  EXPECT_EQ(r.by_content[0].key, "h1");
  EXPECT_EQ(r.by_content[0].member_app_ids, (std::vector<std::string>{"a.app", "b.app"}));
  EXPECT_EQ(r.by_content[0].representative_app, "a.app");
  EXPECT_EQ(r.by_content[1].member_app_ids, std::vector<std::string>{"c.app"});
  ASSERT_EQ(r.by_url.size(), 2u);
  EXPECT_EQ(r.by_url[0].key, "https://x/a");
  EXPECT_EQ(r.by_url[0].representative_app, "c.app");
}

TEST(Reuse, AllDistinctAreSingletons) {
  const std::vector<AppEntry> apps = {{"a", "1", "u1", 1}, {"b", "2", "u2", 2}, {"c", "3", "u3", 3}};
  const auto r = detect_reuse(apps);
  ASSERT_EQ(r.by_content.size(), 3u);
  for (const auto& g : r.by_content) EXPECT_EQ(g.member_app_ids.size(), 1u);
}

TEST(SuperDs, IdentityOrAndEmpty) {
  DsDeclaration a;
  a.collect[9][0] = 1;
  a.unmapped_labels = {"category:x"};
  const std::vector<DsDeclaration> one = {a};
  const auto same = super_data_safety(one);
  EXPECT_EQ(same.collect, a.collect);
  EXPECT_EQ(same.share, a.share);

  DsDeclaration b;
  b.collect[18][3] = 1;
  b.unmapped_labels = {"category:y"};
  const std::vector<DsDeclaration> two = {a, b};
  const auto u = super_data_safety(two);
  EXPECT_EQ(u.collect[9][0], 1);
  EXPECT_EQ(u.collect[18][3], 1);
  EXPECT_EQ(u.unmapped_labels, (std::vector<std::string>{"category:x", "category:y"}));
  EXPECT_THROW(super_data_safety({}), ContractViolation);
}

TEST(SuperDs, MonotoneOverRandomGroups) {
  std::mt19937 rng(31337);
  for (int g = 0; g < 200; ++g) {
    const int members = 2 + static_cast<int>(rng() % 9);
    std::vector<DsDeclaration> decls(members);
    for (auto& d : decls) {
      d.collect = random_grid(rng, 6);
      d.share = random_grid(rng, 8);
    }
    PracticeMatrix pp;
    const BinaryGrid ppg = random_grid(rng, 5);
    for (int j = 0; j < kDataItemCount; ++j) {
      for (int k = 0; k < kPurposeCount; ++k) pp.counts[j][k] = ppg[j][k];
    }
    const auto super = super_data_safety(decls);
    const Ratio s = ds_compliance(item_set(pp), item_set(super.collect));
    for (const auto& d : decls) {
      const Ratio m = ds_compliance(item_set(pp), item_set(d.collect));
      if (m) EXPECT_GE(*s, *m);
    }
  }
}

TEST(Iou, HandCountedAndTrivialCases) {
  // Four pairs with item 9 on both sides; purpose 0 states (T,T), (T,F), (F,T), (F,F).
  std::vector<IouInput> pairs(4);
  const bool pp_bits[4] = {true, true, false, false};
  const bool ds_bits[4] = {true, false, true, false};
  for (int i = 0; i < 4; ++i) {
    pairs[i].pp.counts[9][7] = 1;
    pairs[i].ds[9][7] = 1;
    pairs[i].pp.counts[9][0] = pp_bits[i];
    pairs[i].ds[9][0] = ds_bits[i];
  }
  const auto grid = corpus_purpose_iou(pairs);
  EXPECT_EQ(grid[9][0], 1.0 / 3.0);
  EXPECT_EQ(grid[9][7], 1.0);
  EXPECT_FALSE(grid[9][3]);
  EXPECT_FALSE(grid[1][0]);

  std::vector<IouInput> agree(2);
  for (auto& p : agree) {
    p.pp.counts[1][5] = 2;
    p.ds[1][5] = 1;
  }
  EXPECT_EQ(corpus_purpose_iou(agree)[1][5], 1.0);
}

TEST(Iou, ItemMustBeOnBothSides) {
  std::vector<IouInput> pairs(1);
  pairs[0].pp.counts[9][0] = 1;
  pairs[0].ds[4][0] = 1;
  const auto grid = corpus_purpose_iou(pairs);
  for (const auto& row : grid) for (const auto& c : row) EXPECT_FALSE(c);
}

TEST(Iou, RangeAndSwapSymmetry) {
  std::mt19937 rng(8);
  std::vector<IouInput> pairs(30), swapped(30);
  for (int i = 0; i < 30; ++i) {
    const BinaryGrid a = random_grid(rng, 3);
    const BinaryGrid b = random_grid(rng, 3);
    for (int j = 0; j < kDataItemCount; ++j) {
      for (int k = 0; k < kPurposeCount; ++k) {
        pairs[i].pp.counts[j][k] = a[j][k] * (1 + static_cast<int>(rng() % 3));
        swapped[i].pp.counts[j][k] = b[j][k];
      }
    }
    pairs[i].ds = b;
    swapped[i].ds = a;
  }
  const auto g1 = corpus_purpose_iou(pairs);
  const auto g2 = corpus_purpose_iou(swapped);
  for (int j = 0; j < kDataItemCount; ++j) {
    for (int k = 0; k < kPurposeCount; ++k) {
      EXPECT_EQ(g1[j][k], g2[j][k]);
      if (g1[j][k]) {
        EXPECT_GE(*g1[j][k], 0.0);
        EXPECT_LE(*g1[j][k], 1.0);
      }
    }
  }
}

TEST(Trend, ConstantInputIsFlat) {
  const std::vector<Ratio> scores(120, 0.4);
  const auto t = moving_average_trend(scores, 50);
  ASSERT_EQ(t.points.size(), 120u);
  for (const auto& p : t.points) {
    EXPECT_EQ(p.mean, 0.4);
    EXPECT_EQ(p.std, 0.0);
    EXPECT_EQ(p.band_low(), p.band_high());
  }
}

TEST(Trend, ShortSeriesUsesWholeSample) {
  const std::vector<Ratio> scores = {0.0, 1.0, std::nullopt, 0.5};
  const auto t = moving_average_trend(scores, 50);
  for (const auto& p : t.points) {
    EXPECT_DOUBLE_EQ(*p.mean, 0.5);
    EXPECT_EQ(p.samples, 3);
  }
  const std::vector<Ratio> all_na(3, std::nullopt);
  for (const auto& p : moving_average_trend(all_na, 50).points) EXPECT_FALSE(p.mean);
}

TEST(Trend, MatchesSlidingWindowOracle) {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 400);
    const int window = 1 + static_cast<int>(rng() % 60);
    std::vector<Ratio> scores(n);
    for (auto& s : scores) s = rng() % 10 == 0 ? Ratio() : Ratio(u(rng));
    const auto t = moving_average_trend(scores, window);
    ASSERT_EQ(static_cast<int>(t.points.size()), n);
    for (int i = 0; i < n; ++i) {
      const int lo = std::max(0, i - window / 2);
      const int hi = std::min(n - 1, i + (window - window / 2) - 1);
      double sum = 0;
      int cnt = 0;
      for (int k = lo; k <= hi; ++k) {
        if (scores[k]) {
          sum += *scores[k];
          ++cnt;
        }
      }
      ASSERT_EQ(t.points[i].samples, cnt);
      if (cnt == 0) {
        EXPECT_FALSE(t.points[i].mean);
        continue;
      }
      const double mean = sum / cnt;
      double ss = 0;
      for (int k = lo; k <= hi; ++k) {
        if (scores[k]) ss += (*scores[k] - mean) * (*scores[k] - mean);
      }
      EXPECT_NEAR(*t.points[i].mean, mean, 1e-12);
      EXPECT_NEAR(t.points[i].std, std::sqrt(ss / cnt), 1e-12);
    }
  }
}

AuditInputs base_inputs() {
  AuditInputs in;
  in.redirect_chain = {"https://a.example/p"};
  in.plain_text = std::string(1000, 'x');
  in.practice_units = 3;
  return in;
}

TEST(Flags, Redirected) {
  auto in = base_inputs();
  in.redirect_chain = {"u1", "u2", "u3"};
  const auto f = audit_flags(in);
  EXPECT_TRUE(f.redirected.value);
  EXPECT_FALSE(f.redirected.evidence.empty());
  EXPECT_FALSE(audit_flags(base_inputs()).redirected.value);
}

TEST(Flags, PlaceholderHelloWorld) {
  auto in = base_inputs();
  in.plain_text = "Hello World!";
  in.practice_units = 0;
  EXPECT_TRUE(audit_flags(in).placeholder_content.value);
  auto zero = base_inputs();
  zero.practice_units = 0;
  EXPECT_TRUE(audit_flags(zero).placeholder_content.value);
  auto not_analyzed = base_inputs();
  not_analyzed.practice_units.reset();
  EXPECT_FALSE(audit_flags(not_analyzed).placeholder_content.value);
}

TEST(Flags, NameMismatch) {
  auto in = base_inputs();
  in.developer_name = "FARM STUDIO";
  in.contact_texts = {"Questions? Write to Brightleaf Interactive Ltd, 4 Orchard Row."};
  EXPECT_TRUE(audit_flags(in).name_mismatch.value);
  in.contact_texts = {"Questions? Write to Farm Studio, 4 Orchard Row."};
  EXPECT_FALSE(audit_flags(in).name_mismatch.value);
  in.contact_texts.clear();
  EXPECT_FALSE(audit_flags(in).name_mismatch.value);
}

TEST(Flags, AdmissionDerived) {
  auto in = base_inputs();
  in.admission_reasons = {AdmissionReason::kEmpty, AdmissionReason::kNonEnglish};
  const auto f = audit_flags(in);
  EXPECT_TRUE(f.empty_policy.value);
  EXPECT_TRUE(f.non_english.value);
  nlohmann::json j = f;
  EXPECT_EQ(j.get<AuditFlags>(), f);
}

}  // namespace
}  // namespace ppaudit
