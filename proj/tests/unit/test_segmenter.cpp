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

#include "fake_backend.hpp"
#include "ppaudit/errors.hpp"
#include "ppaudit/rule_backend.hpp"
#include "ppaudit/segmenter.hpp"
#include "ppaudit/text.hpp"

namespace ppaudit {
namespace {

const Taxonomy& tax() { return Taxonomy::bundled(); }

std::string para(std::size_t n, char c = 'a') { return std::string(n, c); }

Section body_section(std::string body) {
  Section s;
  s.body = std::move(body);
  return s;
}

TEST(Merge, HandTracedExample) {
  const std::string body =
      para(100) + "\n" + para(200, 'b') + "\n" + para(300, 'c') + "\n" + para(600, 'd') + "\n";
  const auto units = merge_paragraphs(body_section(body), 0);
  ASSERT_EQ(units.size(), 2u);
  EXPECT_EQ(units[0].text, para(100) + "\n" + para(200, 'b') + "\n" + para(300, 'c') + "\n");
  EXPECT_EQ(units[1].text, para(600, 'd') + "\n");
  EXPECT_EQ(units[1].char_len, 600u);
}

TEST(Merge, ShortTailKeptAndBlankLinesJoin) {
  const std::string body = para(600) + "\n\n" + para(10, 'z') + "\n\n\n";
  const auto units = merge_paragraphs(body_section(body), 3, 512, 7);
  ASSERT_EQ(units.size(), 2u);
  EXPECT_EQ(units[0].unit_id, 7);
  EXPECT_EQ(units[1].unit_id, 8);
  EXPECT_EQ(units[1].section_index, 3);
  EXPECT_EQ(units[1].char_len, 10u);
  EXPECT_EQ(units[0].text + units[1].text, body);
}

TEST(Merge, CountsCodePointsNotBytes) {
  std::string body;
  for (int i = 0; i < 300; ++i) body += "\xC3\xA9";  // 300 code points, 600 bytes
  body += "\n" + para(100) + "\n";
  const auto units = merge_paragraphs(body_section(body), 0);
  ASSERT_EQ(units.size(), 1u);
  EXPECT_EQ(units[0].char_len, 401u);
}

TEST(Merge, BlankSectionHasNoUnits) {
  EXPECT_TRUE(merge_paragraphs(body_section("\n  \n"), 0).empty());
}

TEST(Headings, VerifyKeepsOnlyVerbatimLines) {
  const std::string text = "Intro\nWhat We Collect\nbody\n  Sharing  \nWhat We Collect\n";
  const std::vector<std::string> cand = {"Sharing", "Made Up", "What We Collect",
                                         "What We Collect"};
  const auto hs = verify_headings(text, cand);
  ASSERT_EQ(hs.size(), 3u);
  EXPECT_EQ(hs[0], (Heading{1, "What We Collect"}));
  EXPECT_EQ(hs[1], (Heading{3, "Sharing"}));
  EXPECT_EQ(hs[2], (Heading{4, "What We Collect"}));
}

TEST(Headings, TrialSelection) {
  const std::vector<TrialStats> t = {{10, 5}, {12, 5}, {9, 1}, {12, 4}};
  EXPECT_EQ(select_trial(t), 2u);
  const std::vector<TrialStats> tie = {{10, 5}, {6, 1}, {5, 0}};
  EXPECT_EQ(select_trial(tie), 0u);
  const std::vector<std::size_t> lens = {2, 4, 4, 4, 5, 5, 7, 9};
  const auto s = length_stats(lens);
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_DOUBLE_EQ(s.std, 2.0);
}

TEST(Headings, BestTrialWins) {
  const std::string text = "Intro\nA\n" + para(40) + "\nB\n" + para(40) + "\nC\n" + para(4) + "\n";
  // Trial 1 proposes nothing real; trial 3 splits off a 4-char section.
  testing::ScriptedBackend backend([](const BackendRequest&, int call) {
    static const char* answers[] = {"[\"Nope\"]", "[\"A\", \"B\"]", "[\"A\", \"B\", \"C\"]"};
    return std::string(answers[call % 3]);
  });
  const auto hs = extract_headings(text, backend, tax(), 3);
  EXPECT_EQ(hs.trial_id, 2);
  ASSERT_EQ(hs.headings.size(), 2u);
  EXPECT_EQ(hs.headings[1].text, "B");
}

TEST(Headings, AllTrialsFailing) {
  testing::DeadBackend dead;
  try {
    extract_headings("Intro\nbody\n", dead, tax(), 2);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "segment");
    EXPECT_EQ(e.kind(), StageError::Kind::kBackend);
  }
}

TEST(Headings, RuleBackendDeterministic) {
  RuleBackend rb(tax(), RuleLexicon::bundled());
  const std::string text =
      "Privacy Policy\nLast updated today.\n\nInformation We Collect\nWe collect your email.\n\n"
      "How We Share Information\nWe share data with partners.\n\nContact Us\nWrite to us.\n";
  const auto a = extract_headings(text, rb, tax());
  const auto b = extract_headings(text, rb, tax());
  EXPECT_EQ(nlohmann::json(a), nlohmann::json(b));
  EXPECT_GE(a.headings.size(), 2u);
}

TEST(Sections, RejectsUnorderedHeadings) {
  const std::vector<Heading> bad = {{2, "b"}, {1, "a"}};
  EXPECT_THROW(split_sections("a\nb\nc\n", bad), ContractViolation);
  const std::vector<Heading> out_of_range = {{9, "z"}};
  EXPECT_THROW(split_sections("a\n", out_of_range), ContractViolation);
}

// Random documents: headings picked from the generated lines, CRLF and blank
// lines mixed in.
struct RandomDoc {
  std::string text;
  std::vector<std::string> heading_candidates;
};

RandomDoc random_doc(std::mt19937& rng) {
  std::uniform_int_distribution<int> nlines(0, 60);
  std::uniform_int_distribution<int> len(0, 700);
  std::uniform_int_distribution<int> pick(0, 9);
  RandomDoc d;
  const int n = nlines(rng);
  for (int i = 0; i < n; ++i) {
    const int kind = pick(rng);
    std::string line;
    if (kind == 0) {
      line = "   ";
    } else if (kind == 1) {
      line = "Heading " + std::to_string(i);
      d.heading_candidates.push_back(line);
    } else {
      const int l = len(rng);
      for (int k = 0; k < l; ++k) line.push_back(static_cast<char>('a' + (k * 7 + i) % 26));
      if (kind == 2) line += " \xE2\x80\x94 \xC3\xA9t\xC3\xA9";
    }
    d.text += line;
    if (i + 1 < n || pick(rng) < 5) d.text += pick(rng) == 0 ? "\r\n" : "\n";
  }
  if (pick(rng) == 0) d.heading_candidates.push_back("Not In Text");
  return d;
}

TEST(Partition, RandomDocumentsReconstruct) {
  std::mt19937 rng(20260101);
  for (int trial = 0; trial < 100; ++trial) {
    const RandomDoc d = random_doc(rng);
    const auto headings = verify_headings(d.text, d.heading_candidates);
    for (std::size_t i = 1; i < headings.size(); ++i) {
      ASSERT_LT(headings[i - 1].line_index, headings[i].line_index);
    }
    const auto sections = split_sections(d.text, headings);
    std::string rebuilt;
    for (const auto& s : sections) {
      EXPECT_EQ(s.begin_offset, rebuilt.size());
      rebuilt += s.heading_line + s.body;
    }
    ASSERT_EQ(rebuilt, d.text) << "trial " << trial;

    const auto units = segment_units(sections);
    for (std::size_t si = 0; si < sections.size(); ++si) {
      std::string joined;
      std::vector<const ParagraphUnit*> mine;
      for (const auto& u : units) {
        if (u.section_index == static_cast<int>(si)) mine.push_back(&u);
      }
      for (std::size_t k = 0; k < mine.size(); ++k) {
        joined += mine[k]->text;
        EXPECT_EQ(d.text.substr(mine[k]->begin_offset, mine[k]->text.size()), mine[k]->text);
        if (k + 1 < mine.size()) EXPECT_GE(mine[k]->char_len, kDefaultMinUnitLength);
      }
      if (!mine.empty()) EXPECT_EQ(joined, sections[si].body);
    }
    for (std::size_t i = 0; i < units.size(); ++i) EXPECT_EQ(units[i].unit_id, static_cast<int>(i));
  }
}

TEST(Partition, NoHeadingsGivesOnePreamble) {
  const auto sections = split_sections("just text\nmore\n", {});
  ASSERT_EQ(sections.size(), 1u);
  EXPECT_FALSE(sections[0].heading);
  EXPECT_EQ(sections[0].body, "just text\nmore\n");
}

TEST(SegmenterJson, UnitRoundTrip) {
  ParagraphUnit u{3, 1, "text\n", 4, 99};
  nlohmann::json j = u;
  EXPECT_EQ(nlohmann::json(j.get<ParagraphUnit>()), j);
  HeadingSet h{{{1, "A"}}, 2, 10.5, 1.25};
  nlohmann::json hj = h;
  EXPECT_EQ(nlohmann::json(hj.get<HeadingSet>()), hj);
}

}  // namespace
}  // namespace ppaudit
