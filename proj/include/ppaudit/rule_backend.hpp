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
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppaudit/lm_backend.hpp"
#include "ppaudit/taxonomy.hpp"

namespace ppaudit {

// Trigger phrases, synonym tables and verb lists driving the deterministic
// backend. Every phrase is stored normalized and maps to exactly one id
// within its table; loading fails otherwise.
class RuleLexicon {
 public:
  struct Trigger {
    std::string phrase;
    PracticeClass practice_class;
    int weight = 1;  // word count of the phrase
  };

  struct ClassMatch {
    PracticeClass practice_class = classes::kIntroductory;
    std::string rationale;
    int score = 0;
  };

  static RuleLexicon from_json(const nlohmann::json& doc, const Taxonomy& taxonomy);
  static RuleLexicon load_file(const std::filesystem::path& path,
                               const Taxonomy& taxonomy);
  // data/lexicon.json resolved against Taxonomy::bundled().
  static const RuleLexicon& bundled();

  const std::vector<Trigger>& class_triggers() const { return triggers_; }
  const std::map<std::string, DataItemId>& item_synonyms() const { return item_synonyms_; }
  const std::map<std::string, PurposeId>& purpose_synonyms() const {
    return purpose_synonyms_;
  }

  // Highest weighted trigger score wins, lower class index on ties. No match
  // gives Introductory / Generic with an empty rationale.
  ClassMatch classify(std::string_view text) const;

  // First sentence containing a trigger of `cls`, cut at the first clause
  // connector after the trigger. Always a verbatim slice of `text`.
  std::string trigger_excerpt(std::string_view text, PracticeClass cls) const;

  // Pattern-based five-element extraction, at most one tuple per sentence.
  std::vector<PracticeTuple> decode(std::string_view text) const;

  // Exact keyword, exact synonym, longest contained synonym, token overlap,
  // then the generic fallback.
  DataItemId resolve_item(std::string_view item, const Taxonomy& taxonomy) const;
  PurposeId resolve_purpose(std::string_view purpose, const Taxonomy& taxonomy) const;

  // Lines that look like primary section headings.
  std::vector<std::string> propose_headings(std::string_view text) const;

 private:
  std::vector<Trigger> triggers_;
  std::map<std::string, DataItemId> item_synonyms_;
  std::map<std::string, PurposeId> purpose_synonyms_;
  std::vector<std::string> collect_verbs_;
  std::vector<std::string> share_verbs_;
};

// Deterministic offline backend answering every task from a RuleLexicon, in
// the same output grammars the remote prompts ask for.
class RuleBackend : public Backend {
 public:
  RuleBackend(const Taxonomy& taxonomy, const RuleLexicon& lexicon)
      : taxonomy_(taxonomy), lexicon_(lexicon) {}

  std::string id() const override { return "rule"; }
  std::string complete(const BackendRequest& request) override;

  const RuleLexicon& lexicon() const { return lexicon_; }

 private:
  const Taxonomy& taxonomy_;
  const RuleLexicon& lexicon_;
};

}  // namespace ppaudit
