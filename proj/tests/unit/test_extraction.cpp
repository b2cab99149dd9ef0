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

#include <random>
#include <sstream>

#include "fake_backend.hpp"
#include "ppaudit/errors.hpp"
#include "ppaudit/extraction.hpp"
#include "ppaudit/rule_backend.hpp"
#include "test_support.hpp"

namespace ppaudit {
namespace {

const Taxonomy& tax() { return Taxonomy::bundled(); }
const RuleLexicon& lex() { return RuleLexicon::bundled(); }

std::vector<ParagraphUnit> make_units(const std::vector<std::string>& texts) {
  std::vector<ParagraphUnit> out;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    ParagraphUnit u;
    u.unit_id = static_cast<int>(i);
    u.text = texts[i];
    u.char_len = texts[i].size();
    u.begin_offset = offset;
    offset += texts[i].size();
    out.push_back(u);
  }
  return out;
}

DecodedTuple tuple(int unit, PracticeKind kind, std::string data, std::string purpose) {
  DecodedTuple t;
  t.unit_id = unit;
  t.kind = kind;
  t.tuple.data = std::move(data);
  t.tuple.purpose = std::move(purpose);
  return t;
}

TEST(SplitItems, CommasConjunctionsBullets) {
  EXPECT_EQ(split_items("your name, email address and phone number"),
            (std::vector<std::string>{"your name", "email address", "phone number"}));
  EXPECT_EQ(split_items("location; contacts or calendar, etc."),
            (std::vector<std::string>{"location", "contacts", "calendar", "etc."}));
  EXPECT_EQ(split_items("\xE2\x80\xA2 device IDs"), std::vector<std::string>{"device IDs"});
  EXPECT_TRUE(split_items("  ").empty());
}

TEST(ClassifyPolicy, ThreeUnitFixture) {
  RuleBackend rb(tax(), lex());
  const auto units = make_units({"Welcome to Acme. This notice explains how our games work.",
                                 "We collect your email address to create your account.",
                                 "Contact privacy@example.com with questions."});
  const auto c = classify_policy(units, rb, tax(), &lex());
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].practice_class, classes::kIntroductory);
  EXPECT_EQ(c[1].practice_class, classes::kFirstPartyCollection);
  EXPECT_EQ(c[2].practice_class, classes::kPrivacyContact);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(c[i].unit_id, static_cast<int>(i));
    EXPECT_NE(units[i].text.find(c[i].rationale), std::string::npos);
  }
}

TEST(ClassifyPolicy, FailedUnitIsUnclassified) {
  testing::ScriptedBackend flaky([](const BackendRequest& r, int) -> std::string {
    if (r.payload.at("text").get<std::string>().starts_with("BOOM")) {
      throw BackendError("down");
    }
    return "Matching category = 'Data Security'\nReasoning = ''";
  });
  const auto units = make_units({"we encrypt", "BOOM", "we protect"});
  const auto c = classify_policy(units, flaky, tax(), &lex(), 2);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].practice_class, classes::kDataSecurity);
  EXPECT_FALSE(c[1].practice_class);
  EXPECT_FALSE(c[1].error.empty());
  EXPECT_EQ(c[2].practice_class, classes::kDataSecurity);
}

TEST(ClassifyPolicy, ConcurrencyDoesNotChangeOutput) {
  RuleBackend rb(tax(), lex());
  std::vector<std::string> texts;
  for (int i = 0; i < 40; ++i) {
    texts.push_back(i % 3 ? "We share your location with partners number " + std::to_string(i)
                          : "We keep your data for " + std::to_string(i) + " days.");
  }
  const auto units = make_units(texts);
  nlohmann::json a = classify_policy(units, rb, tax(), &lex(), 1);
  nlohmann::json b = classify_policy(units, rb, tax(), &lex(), 4);
  EXPECT_EQ(a, b);
}

TEST(DecodePolicy, OnlyCollectionAndSharingUnits) {
  RuleBackend rb(tax(), lex());
  const auto units = make_units({"We collect your email address to send receipts.",
                                 "We collect nothing else; this policy may change.",
                                 "We share device identifiers with ad partners."});
  std::vector<ClassifiedParagraph> cls(3);
  for (int i = 0; i < 3; ++i) cls[i].unit_id = i;
  cls[0].practice_class = classes::kFirstPartyCollection;
  cls[1].practice_class = classes::kPolicyChange;
  cls[2].practice_class = classes::kThirdPartySharing;
  const auto out = decode_policy(units, cls, rb, tax());
  ASSERT_EQ(out.tuples.size(), 2u);
  EXPECT_EQ(out.tuples[0].unit_id, 0);
  EXPECT_EQ(out.tuples[0].kind, PracticeKind::kCollect);
  EXPECT_EQ(out.tuples[1].unit_id, 2);
  EXPECT_EQ(out.tuples[1].kind, PracticeKind::kShare);
  EXPECT_EQ(out.tuples[1].tuple.processing, "share");
}

TEST(DecodePolicy, ParseErrorsRetriedThenSkipped) {
  testing::ScriptedBackend junk([](const BackendRequest&, int) { return "not json"; });
  testing::DeadBackend dead;
  const auto units = make_units({"We collect email."});
  std::vector<ClassifiedParagraph> cls(1);
  cls[0].practice_class = classes::kFirstPartyCollection;
  const auto skipped = decode_policy(units, cls, junk, tax());
  EXPECT_EQ(junk.calls(), 2);
  EXPECT_EQ(skipped.skipped_units, std::vector<int>{0});
  EXPECT_TRUE(skipped.tuples.empty());
  const auto failed = decode_policy(units, cls, dead, tax());
  EXPECT_EQ(failed.failed_units, std::vector<int>{0});
}

TEST(ValidateBatch, Verdicts) {
  const std::vector<std::string> ok = {"location", "N/A"};
  EXPECT_EQ(validate_batch(ok, 2, VocabularyKind::kDataItems, tax()).verdict, Verdict::kOk);
  const auto short_batch = validate_batch(ok, 3, VocabularyKind::kDataItems, tax());
  EXPECT_EQ(short_batch.verdict, Verdict::kCountMismatch);
  EXPECT_EQ(short_batch.offending_indices, (std::vector<int>{0, 1, 2}));
  const std::vector<std::string> halluc = {"location", "cookies"};
  const auto h = validate_batch(halluc, 2, VocabularyKind::kDataItems, tax());
  EXPECT_EQ(h.verdict, Verdict::kHallucination);
  EXPECT_EQ(h.offending_indices, std::vector<int>{1});
}

TEST(MapAndValidate, CountMismatchReroutesWholeBatch) {
  testing::ScriptedBackend short_mapper([](const BackendRequest& r, int) {
    if (r.task == Task::kMapItems) return std::string("['location', 'email', 'name', 'phone']");
    return std::string("['other']");
  });
  RuleBackend verifier(tax(), lex());
  const std::vector<DecodedTuple> tuples = {
      tuple(0, PracticeKind::kCollect, "GPS, email, your name, phone number, zzqx", "")};
  const auto out = map_and_validate(tuples, short_mapper, verifier, tax());
  ASSERT_EQ(out.validations.size(), 1u);
  EXPECT_EQ(out.validations[0].verdict, Verdict::kCountMismatch);
  EXPECT_EQ(out.counters.via_verifier, 5);
  EXPECT_EQ(out.counters.via_decoder, 0);
  for (const auto& m : out.practices) {
    EXPECT_EQ(m.item_origin, MappingOrigin::kVerifier);
    EXPECT_EQ(m.purpose, purposes::kOther);
  }
}

TEST(MapAndValidate, HallucinationReroutesOnlyThatIndex) {
  testing::ScriptedBackend mapper([](const BackendRequest& r, int) {
    if (r.task == Task::kMapItems) return std::string("['location', 'cookies', 'N/A']");
    return std::string("['advertising']");
  });
  RuleBackend verifier(tax(), lex());
  const std::vector<DecodedTuple> tuples = {
      tuple(4, PracticeKind::kShare, "GPS, tracking cookies, etc.", "to serve ads")};
  const auto out = map_and_validate(tuples, mapper, verifier, tax());
  ASSERT_EQ(out.validations.size(), 2u);
  EXPECT_EQ(out.validations[0].verdict, Verdict::kHallucination);
  EXPECT_EQ(out.validations[0].offending_indices, std::vector<int>{1});
  EXPECT_EQ(out.counters.decoded_items, 3);
  EXPECT_EQ(out.counters.negatives, 1);
  EXPECT_EQ(out.counters.via_decoder, 1);
  EXPECT_EQ(out.counters.via_verifier, 1);
  ASSERT_EQ(out.practices.size(), 2u);
  EXPECT_EQ(out.practices[0].data_item, items::kLocation);
  EXPECT_EQ(out.practices[0].purpose, purposes::kAdvertising);
  EXPECT_EQ(out.practices[1].item_origin, MappingOrigin::kVerifier);
  for (const auto& m : out.practices) {
    EXPECT_NE(m.data_item, items::kNegative);
    EXPECT_EQ(m.kind, PracticeKind::kShare);
  }
}

TEST(MapAndValidate, BatchesOfTwentyAndConservation) {
  RuleBackend rb(tax(), lex());
  std::string data;
  for (int i = 0; i < 45; ++i) data += (i ? ", " : "") + std::string(i % 5 ? "email" : "etc.");
  const std::vector<DecodedTuple> tuples = {tuple(0, PracticeKind::kCollect, data, "")};
  const auto out = map_and_validate(tuples, rb, rb, tax());
  ASSERT_EQ(out.validations.size(), 3u);
  EXPECT_EQ(out.validations[0].batch_size, 20);
  EXPECT_EQ(out.validations[2].batch_size, 5);
  const auto& c = out.counters;
  EXPECT_EQ(c.decoded_items, c.via_decoder + c.via_verifier + c.negatives + c.truncated);
  EXPECT_EQ(c.negatives, 9);
}

TEST(MapAndValidate, PracticeCapTruncates) {
  RuleBackend rb(tax(), lex());
  const std::vector<DecodedTuple> tuples = {
      tuple(0, PracticeKind::kCollect, "email, name, phone, location", "")};
  ExtractionOptions opt;
  opt.max_practices = 2;
  const auto out = map_and_validate(tuples, rb, rb, tax(), opt);
  EXPECT_EQ(out.practices.size(), 2u);
  EXPECT_EQ(out.counters.truncated, 2);
  EXPECT_FALSE(out.warnings.empty());
  opt.batch_size = 21;
  EXPECT_THROW(map_and_validate(tuples, rb, rb, tax(), opt), ContractViolation);
}

TEST(Matrices, CountingSemantics) {
  const auto [c0, s0] = build_matrices({});
  EXPECT_EQ(c0.total(), 0);
  EXPECT_EQ(s0.total(), 0);

  std::vector<MappedPractice> mapped(3);
  mapped[0].data_item = items::kLocation;
  mapped[0].purpose = purposes::kAdvertising;
  mapped[1] = mapped[0];
  mapped[2].kind = PracticeKind::kShare;
  mapped[2].data_item = items::kEmail;
  mapped[2].purpose = purposes::kOther;
  const auto [collect, share] = build_matrices(mapped);
  EXPECT_EQ(collect.counts[9][3], 2);
  EXPECT_EQ(collect.total(), 2);
  EXPECT_EQ(share.counts[1][7], 1);
  EXPECT_EQ(share.total(), 1);
}

TEST(Matrices, TotalsMatchPracticeCounts) {
  RuleBackend rb(tax(), lex());
  const std::vector<DecodedTuple> tuples = {
      tuple(0, PracticeKind::kCollect, "email, device ID, etc.", "analytics"),
      tuple(1, PracticeKind::kShare, "location and contacts", "advertising"),
      tuple(2, PracticeKind::kCollect, "crash logs", "")};
  const auto out = map_and_validate(tuples, rb, rb, tax());
  const auto [collect, share] = build_matrices(out.practices);
  int nc = 0, ns = 0;
  for (const auto& m : out.practices) (m.kind == PracticeKind::kCollect ? nc : ns)++;
  EXPECT_EQ(collect.total(), nc);
  EXPECT_EQ(share.total(), ns);
  EXPECT_EQ(collect.total() + share.total(), out.counters.via_decoder + out.counters.via_verifier);
}

TEST(VerifierCorpus, DecoderOriginOnly) {
  std::vector<MappingRecord> records;
  for (int i = 0; i < 10; ++i) {
    records.push_back({"text " + std::to_string(i), "email", Task::kMapItems,
                       MappingOrigin::kDecoder});
  }
  for (int i = 0; i < 3; ++i) {
    records.push_back({"v" + std::to_string(i), "other", Task::kMapPurposes,
                       MappingOrigin::kVerifier});
  }
  std::ostringstream out;
  EXPECT_EQ(export_verifier_corpus(records, "pid", out), 10u);
  std::istringstream in(out.str());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("text"), records[n].text);
    EXPECT_EQ(j.at("keyword"), records[n].keyword);
    EXPECT_EQ(j.at("task"), "map_items");
    EXPECT_EQ(j.at("policy_id"), "pid");
    ++n;
  }
  EXPECT_EQ(n, 10);
}

TEST(VerifierCorpus, EmptyInputCreatesEmptyFile) {
  const auto path = std::filesystem::temp_directory_path() / "ppaudit_empty_corpus.jsonl";
  std::filesystem::remove(path);
  EXPECT_EQ(export_verifier_corpus({}, "pid", path), 0u);
  ASSERT_TRUE(std::filesystem::exists(path));
  EXPECT_EQ(std::filesystem::file_size(path), 0u);
}

TEST(VerifierCorpus, RecordJsonRoundTrip) {
  const MappingRecord r{"GPS \"fix\"", "location", Task::kMapItems, MappingOrigin::kDecoder};
  nlohmann::json j = r;
  EXPECT_EQ(j.get<MappingRecord>(), r);
}

TEST(Profile, SingleUnitMidpoint) {
  auto units = make_units({std::string(100, 'x')});
  units[0].begin_offset = 300;
  std::vector<ClassifiedParagraph> cls(1);
  cls[0].practice_class = classes::kDataSecurity;
  const auto p = completeness_profile(units, cls, 1000, 10);
  ASSERT_EQ(p.size(), 10u);
  EXPECT_EQ(p[3][6], 1);
  int total = 0;
  for (const auto& bin : p) for (int v : bin) total += v;
  EXPECT_EQ(total, 1);
}

TEST(Profile, ConservationWithUnclassified) {
  std::vector<std::string> texts(37, std::string(50, 'y'));
  const auto units = make_units(texts);
  std::vector<ClassifiedParagraph> cls(units.size());
  for (std::size_t i = 0; i < cls.size(); ++i) {
    if (i % 4) cls[i].practice_class = PracticeClass{static_cast<int>(i % 12)};
  }
  const auto p = completeness_profile(units, cls, 37 * 50, 100);
  int total = 0, unclassified = 0;
  for (const auto& bin : p) {
    for (int v : bin) total += v;
    unclassified += bin[kPracticeClassCount];
  }
  EXPECT_EQ(total, 37);
  EXPECT_EQ(unclassified, 10);
  EXPECT_THROW(completeness_profile(units, {}, 10), ContractViolation);
}

TEST(ExtractionJson, RoundTrips) {
  PracticeMatrix m;
  m.kind = PracticeKind::kShare;
  m.counts[18][3] = 4;
  nlohmann::json mj = m;
  EXPECT_EQ(mj.get<PracticeMatrix>(), m);

  ClassifiedParagraph c;
  c.unit_id = 2;
  c.error = "timeout";
  nlohmann::json cj = c;
  EXPECT_EQ(nlohmann::json(cj.get<ClassifiedParagraph>()), cj);

  MappingCounters k{5, 2, 1, 1, 1};
  nlohmann::json kj = k;
  EXPECT_EQ(nlohmann::json(kj.get<MappingCounters>()), kj);
}

}  // namespace
}  // namespace ppaudit
