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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppaudit/lm_backend.hpp"
#include "ppaudit/segmenter.hpp"
#include "ppaudit/taxonomy.hpp"

namespace ppaudit {

class RuleLexicon;

enum class PracticeKind { kCollect, kShare };
std::string_view to_string(PracticeKind kind);

enum class MappingOrigin { kDecoder, kVerifier };
std::string_view to_string(MappingOrigin origin);

struct ClassifiedParagraph {
  int unit_id = 0;
  std::optional<PracticeClass> practice_class;  // empty = unclassified
  std::string rationale;
  bool rationale_repaired = false;
  std::string error;  // set when unclassified
};

struct DecodedTuple {
  int unit_id = 0;
  PracticeKind kind = PracticeKind::kCollect;
  PracticeTuple tuple;
};

struct DecodeOutcome {
  std::vector<DecodedTuple> tuples;  // unit order, then tuple order
  std::vector<int> skipped_units;    // parse error twice
  std::vector<int> failed_units;     // transport error twice
};

struct MappedPractice {
  int unit_id = 0;
  int tuple_index = 0;  // into DecodeOutcome::tuples
  PracticeKind kind = PracticeKind::kCollect;
  std::string item_text;
  DataItemId data_item;
  PurposeId purpose;
  MappingOrigin item_origin = MappingOrigin::kDecoder;
};

enum class Verdict { kOk, kCountMismatch, kHallucination };
std::string_view to_string(Verdict verdict);

struct MappingValidation {
  int batch_id = 0;
  VocabularyKind vocabulary = VocabularyKind::kDataItems;
  int batch_size = 0;
  Verdict verdict = Verdict::kOk;
  std::vector<int> offending_indices;
};

// One mapped phrase, kept for the verifier training corpus.
struct MappingRecord {
  std::string text;
  std::string keyword;
  Task task = Task::kMapItems;
  MappingOrigin origin = MappingOrigin::kDecoder;

  bool operator==(const MappingRecord&) const = default;
};

struct MappingCounters {
  int decoded_items = 0;
  int via_decoder = 0;   // kept, mapped by the batch backend
  int via_verifier = 0;  // kept, corrected by the verifier
  int negatives = 0;     // filtered N/A
  int truncated = 0;     // dropped by the practice cap
};

struct MappingOutcome {
  std::vector<MappedPractice> practices;
  std::vector<MappingValidation> validations;
  std::vector<MappingRecord> records;
  MappingCounters counters;
  std::vector<std::string> warnings;
};

struct PracticeMatrix {
  PracticeKind kind = PracticeKind::kCollect;
  std::array<std::array<int, kPurposeCount>, kDataItemCount> counts{};

  int total() const;
  bool operator==(const PracticeMatrix&) const = default;
};

void to_json(nlohmann::json& j, const PracticeMatrix& m);
void from_json(const nlohmann::json& j, PracticeMatrix& m);

struct ExtractionOptions {
  std::size_t batch_size = kMaxMappingBatch;
  std::size_t max_practices = 2000;
  int concurrency = 1;
};

// Blocks of items inside a decoded data field: split on commas, semicolons
// and " and " / " or ", with bullets and leading conjunctions removed.
std::vector<std::string> split_items(std::string_view data);

std::vector<ClassifiedParagraph> classify_policy(std::span<const ParagraphUnit> units,
                                                 Backend& backend, const Taxonomy& taxonomy,
                                                 const RuleLexicon* lexicon,
                                                 int concurrency = 1);

DecodeOutcome decode_policy(std::span<const ParagraphUnit> units,
                            std::span<const ClassifiedParagraph> classified,
                            Backend& backend, const Taxonomy& taxonomy,
                            int concurrency = 1);

// Validates one batch answer against its input size and vocabulary.
MappingValidation validate_batch(std::span<const std::string> outputs, std::size_t input_size,
                                 VocabularyKind vocabulary, const Taxonomy& taxonomy,
                                 int batch_id = 0);

MappingOutcome map_and_validate(std::span<const DecodedTuple> tuples, Backend& mapper,
                                Backend& verifier, const Taxonomy& taxonomy,
                                const ExtractionOptions& options = {});

// {collect, share}
std::pair<PracticeMatrix, PracticeMatrix> build_matrices(
    std::span<const MappedPractice> mapped);

// JSON Lines {text, keyword, task, policy_id}; decoder-origin records only.
std::size_t export_verifier_corpus(std::span<const MappingRecord> records,
                                   std::string_view policy_id, std::ostream& out);
std::size_t export_verifier_corpus(std::span<const MappingRecord> records,
                                   std::string_view policy_id,
                                   const std::filesystem::path& path);

// Per-bin counts of units by class, 12 classes plus a final unclassified slot,
// bucketed by each unit's midpoint relative to the document length.
inline constexpr int kProfileSlots = kPracticeClassCount + 1;
using ProfileBin = std::array<int, kProfileSlots>;
std::vector<ProfileBin> completeness_profile(std::span<const ParagraphUnit> units,
                                             std::span<const ClassifiedParagraph> classified,
                                             std::size_t document_bytes, int bins = 100);

void to_json(nlohmann::json& j, const ClassifiedParagraph& c);
void from_json(const nlohmann::json& j, ClassifiedParagraph& c);
void to_json(nlohmann::json& j, const DecodedTuple& t);
void from_json(const nlohmann::json& j, DecodedTuple& t);
void to_json(nlohmann::json& j, const MappedPractice& m);
void from_json(const nlohmann::json& j, MappedPractice& m);
void to_json(nlohmann::json& j, const MappingValidation& v);
void from_json(const nlohmann::json& j, MappingValidation& v);
void to_json(nlohmann::json& j, const MappingRecord& r);
void from_json(const nlohmann::json& j, MappingRecord& r);
void to_json(nlohmann::json& j, const MappingCounters& c);
void from_json(const nlohmann::json& j, MappingCounters& c);

}  // namespace ppaudit
