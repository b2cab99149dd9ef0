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

#include "ppaudit/extraction.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <set>

#include "ppaudit/errors.hpp"
#include "ppaudit/parallel.hpp"
#include "ppaudit/rule_backend.hpp"
#include "ppaudit/text.hpp"

namespace ppaudit {

std::string_view to_string(PracticeKind kind) {
  return kind == PracticeKind::kCollect ? "collect" : "share";
}

std::string_view to_string(MappingOrigin origin) {
  return origin == MappingOrigin::kDecoder ? "decoder" : "verifier";
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kOk:
      return "ok";
    case Verdict::kCountMismatch:
      return "count_mismatch";
    case Verdict::kHallucination:
      return "hallucination";
  }
  return "ok";
}

namespace {

PracticeKind kind_from_string(std::string_view s) {
  if (s == "collect") return PracticeKind::kCollect;
  if (s == "share") return PracticeKind::kShare;
  throw InputError("unknown practice kind '" + std::string(s) + "'");
}

MappingOrigin origin_from_string(std::string_view s) {
  if (s == "decoder") return MappingOrigin::kDecoder;
  if (s == "verifier") return MappingOrigin::kVerifier;
  throw InputError("unknown mapping origin '" + std::string(s) + "'");
}

Verdict verdict_from_string(std::string_view s) {
  if (s == "ok") return Verdict::kOk;
  if (s == "count_mismatch") return Verdict::kCountMismatch;
  if (s == "hallucination") return Verdict::kHallucination;
  throw InputError("unknown verdict '" + std::string(s) + "'");
}

std::string_view vocabulary_name(VocabularyKind v) {
  return v == VocabularyKind::kDataItems ? "items" : "purposes";
}

VocabularyKind vocabulary_from_string(std::string_view s) {
  if (s == "items") return VocabularyKind::kDataItems;
  if (s == "purposes") return VocabularyKind::kPurposes;
  throw InputError("unknown vocabulary '" + std::string(s) + "'");
}

std::string canonical_keyword(std::string_view keyword, VocabularyKind kind,
                              const Taxonomy& taxonomy) {
  if (kind == VocabularyKind::kPurposes) {
    return taxonomy.keyword(*taxonomy.purpose_from_keyword(keyword));
  }
  const DataItemId id = *taxonomy.data_item_from_keyword(keyword);
  return id == items::kNegative ? std::string(kNotApplicableKeyword) : taxonomy.keyword(id);
}

}  // namespace

int PracticeMatrix::total() const {
  int sum = 0;
  for (const auto& row : counts) {
    for (int c : row) sum += c;
  }
  return sum;
}

std::vector<std::string> split_items(std::string_view data) {
  std::vector<std::string> out;
  std::vector<std::string> coarse;
  {
    std::string cur;
    for (char c : data) {
      if (c == ',' || c == ';' || c == '\n') {
        coarse.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    coarse.push_back(cur);
  }
  static const std::vector<std::string> kJoiners = {" and ", " or ", " & ", " and/or "};
  for (const std::string& part : coarse) {
    std::vector<std::string> pieces{part};
    for (const auto& joiner : kJoiners) {
      std::vector<std::string> next;
      for (const auto& p : pieces) {
        const std::string folded = text::case_fold(p);
        std::size_t start = 0;
        for (std::size_t pos = folded.find(joiner); pos != std::string::npos;
             pos = folded.find(joiner, start)) {
          next.push_back(p.substr(start, pos - start));
          start = pos + joiner.size();
        }
        next.push_back(p.substr(start));
      }
      pieces = std::move(next);
    }
    for (const auto& p : pieces) {
      std::string_view s = text::trim(p);
      for (bool changed = true; changed;) {
        changed = false;
        for (std::string_view lead : {"-", "*", "•", "·", "▪", "and ", "or ", "And ", "Or "}) {
          if (s.starts_with(lead)) {
            s = text::trim(s.substr(lead.size()));
            changed = true;
          }
        }
      }
      while (!s.empty() && (s.back() == ':' || s.back() == ' ')) s.remove_suffix(1);
      if (!s.empty()) out.emplace_back(s);
    }
  }
  return out;
}

std::vector<ClassifiedParagraph> classify_policy(std::span<const ParagraphUnit> units,
                                                 Backend& backend, const Taxonomy& taxonomy,
                                                 const RuleLexicon* lexicon, int concurrency) {
  std::vector<ClassifiedParagraph> out(units.size());
  parallel_for(units.size(), concurrency, [&](std::size_t i) {
    ClassifiedParagraph& c = out[i];
    c.unit_id = units[i].unit_id;
    for (int attempt = 0; attempt < 2; ++attempt) {
      try {
        const Classification r = classify_paragraph(backend, units[i].text, taxonomy, lexicon);
        c.practice_class = r.practice_class;
        c.rationale = r.rationale;
        c.rationale_repaired = r.rationale_repaired;
        c.error.clear();
        return;
      } catch (const BackendError& e) {
        c.error = e.what();
      }
    }
  });
  return out;
}

DecodeOutcome decode_policy(std::span<const ParagraphUnit> units,
                            std::span<const ClassifiedParagraph> classified,
                            Backend& backend, const Taxonomy& taxonomy, int concurrency) {
  if (units.size() != classified.size()) {
    throw ContractViolation("decode_policy: units and classifications differ in length");
  }
  struct PerUnit {
    std::vector<PracticeTuple> tuples;
    bool skipped = false;
    bool failed = false;
  };
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto& cls = classified[i].practice_class;
    if (cls && (*cls == classes::kFirstPartyCollection || *cls == classes::kThirdPartySharing)) {
      selected.push_back(i);
    }
  }
  std::vector<PerUnit> results(selected.size());
  parallel_for(selected.size(), concurrency, [&](std::size_t k) {
    const ParagraphUnit& unit = units[selected[k]];
    PerUnit& r = results[k];
    bool transport_error = false;
    bool parse_error = false;
    for (int attempt = 0; attempt < 2; ++attempt) {
      try {
        DecodeResult d = decode_elements(backend, unit.text, taxonomy);
        if (!d.parse_error) {
          r.tuples = std::move(d.tuples);
          return;
        }
        parse_error = true;
        transport_error = false;
      } catch (const BackendError&) {
        transport_error = true;
      }
    }
    r.failed = transport_error;
    r.skipped = !transport_error && parse_error;
  });

  DecodeOutcome out;
  for (std::size_t k = 0; k < selected.size(); ++k) {
    const std::size_t i = selected[k];
    const PracticeKind kind = *classified[i].practice_class == classes::kThirdPartySharing
                                  ? PracticeKind::kShare
                                  : PracticeKind::kCollect;
    if (results[k].failed) out.failed_units.push_back(units[i].unit_id);
    if (results[k].skipped) out.skipped_units.push_back(units[i].unit_id);
    for (auto& t : results[k].tuples) out.tuples.push_back({units[i].unit_id, kind, std::move(t)});
  }
  return out;
}

MappingValidation validate_batch(std::span<const std::string> outputs, std::size_t input_size,
                                 VocabularyKind vocabulary, const Taxonomy& taxonomy,
                                 int batch_id) {
  MappingValidation v;
  v.batch_id = batch_id;
  v.vocabulary = vocabulary;
  v.batch_size = static_cast<int>(input_size);
  if (outputs.size() != input_size) {
    v.verdict = Verdict::kCountMismatch;
    for (std::size_t i = 0; i < input_size; ++i) v.offending_indices.push_back(static_cast<int>(i));
    return v;
  }
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (!in_vocabulary(outputs[i], vocabulary, taxonomy)) {
      v.offending_indices.push_back(static_cast<int>(i));
    }
  }
  if (!v.offending_indices.empty()) v.verdict = Verdict::kHallucination;
  return v;
}

MappingOutcome map_and_validate(std::span<const DecodedTuple> tuples, Backend& mapper,
                                Backend& verifier, const Taxonomy& taxonomy,
                                const ExtractionOptions& options) {
  if (options.batch_size < 1 || options.batch_size > kMaxMappingBatch) {
    throw ContractViolation("map_and_validate: batch size must be 1..20");
  }
  MappingOutcome out;
  int batch_id = 0;

  auto map_all = [&](const std::vector<std::string>& texts, VocabularyKind kind) {
    std::vector<std::string> keywords(texts.size());
    const Task task = kind == VocabularyKind::kDataItems ? Task::kMapItems : Task::kMapPurposes;
    std::vector<MappingOrigin> origins(texts.size(), MappingOrigin::kDecoder);
    for (std::size_t start = 0; start < texts.size(); start += options.batch_size) {
      const std::size_t n = std::min(options.batch_size, texts.size() - start);
      const std::span<const std::string> batch(texts.data() + start, n);
      std::vector<std::string> answers;
      try {
        answers = map_keywords_batch(mapper, batch, kind, taxonomy);
      } catch (const BackendError&) {
        answers.clear();  // treated as an arity failure
      }
      MappingValidation v = validate_batch(answers, n, kind, taxonomy, batch_id++);
      std::vector<bool> bad(n, false);
      for (int idx : v.offending_indices) bad[static_cast<std::size_t>(idx)] = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (bad[i]) {
          keywords[start + i] = verify_keyword(verifier, batch[i], kind, taxonomy);
          origins[start + i] = MappingOrigin::kVerifier;
        } else {
          keywords[start + i] = canonical_keyword(answers[i], kind, taxonomy);
        }
        out.records.push_back({batch[i], keywords[start + i], task, origins[start + i]});
      }
      out.validations.push_back(std::move(v));
    }
    return std::make_pair(std::move(keywords), std::move(origins));
  };

  struct ItemRef {
    std::size_t tuple_index;
    std::string text;
  };
  std::vector<ItemRef> item_refs;
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    for (auto& s : split_items(tuples[t].tuple.data)) item_refs.push_back({t, std::move(s)});
  }
  std::vector<std::string> item_texts;
  item_texts.reserve(item_refs.size());
  for (const auto& r : item_refs) item_texts.push_back(r.text);

  std::vector<std::size_t> purpose_tuples;
  std::vector<std::string> purpose_texts;
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    const std::string_view p = text::trim(tuples[t].tuple.purpose);
    if (p.empty()) continue;
    purpose_tuples.push_back(t);
    purpose_texts.emplace_back(p);
  }

  const auto [item_keywords, item_origins] = map_all(item_texts, VocabularyKind::kDataItems);
  const auto [purpose_keywords, purpose_origins] =
      map_all(purpose_texts, VocabularyKind::kPurposes);

  std::vector<PurposeId> tuple_purpose(tuples.size(), purposes::kOther);
  for (std::size_t k = 0; k < purpose_tuples.size(); ++k) {
    tuple_purpose[purpose_tuples[k]] = *taxonomy.purpose_from_keyword(purpose_keywords[k]);
  }

  out.counters.decoded_items = static_cast<int>(item_refs.size());
  for (std::size_t k = 0; k < item_refs.size(); ++k) {
    const DataItemId item = *taxonomy.data_item_from_keyword(item_keywords[k]);
    if (item == items::kNegative) {
      ++out.counters.negatives;
      continue;
    }
    if (out.practices.size() >= options.max_practices) {
      ++out.counters.truncated;
      continue;
    }
    const DecodedTuple& src = tuples[item_refs[k].tuple_index];
    MappedPractice m;
    m.unit_id = src.unit_id;
    m.tuple_index = static_cast<int>(item_refs[k].tuple_index);
    m.kind = src.kind;
    m.item_text = item_refs[k].text;
    m.data_item = item;
    m.purpose = tuple_purpose[item_refs[k].tuple_index];
    m.item_origin = item_origins[k];
    out.practices.push_back(std::move(m));
    if (item_origins[k] == MappingOrigin::kDecoder) {
      ++out.counters.via_decoder;
    } else {
      ++out.counters.via_verifier;
    }
  }
  if (out.counters.truncated > 0) {
    out.warnings.push_back("practice cap of " + std::to_string(options.max_practices) +
                           " reached; " + std::to_string(out.counters.truncated) +
                           " mapped items dropped");
  }
  return out;
}

std::pair<PracticeMatrix, PracticeMatrix> build_matrices(std::span<const MappedPractice> mapped) {
  PracticeMatrix collect;
  PracticeMatrix share;
  collect.kind = PracticeKind::kCollect;
  share.kind = PracticeKind::kShare;
  for (const auto& m : mapped) {
    if (m.data_item == items::kNegative) continue;
    PracticeMatrix& target = m.kind == PracticeKind::kCollect ? collect : share;
    ++target.counts[m.data_item.index][m.purpose.index];
  }
  return {collect, share};
}

std::size_t export_verifier_corpus(std::span<const MappingRecord> records,
                                   std::string_view policy_id, std::ostream& out) {
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.origin != MappingOrigin::kDecoder) continue;
    out << nlohmann::json{{"text", r.text},
                          {"keyword", r.keyword},
                          {"task", to_string(r.task)},
                          {"policy_id", policy_id}}
               .dump()
        << '\n';
    ++n;
  }
  return n;
}

std::size_t export_verifier_corpus(std::span<const MappingRecord> records,
                                   std::string_view policy_id,
                                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  const std::size_t n = export_verifier_corpus(records, policy_id, out);
  out.flush();
  if (!out) throw InputError("write failed: " + path.string());
  return n;
}

std::vector<ProfileBin> completeness_profile(std::span<const ParagraphUnit> units,
                                             std::span<const ClassifiedParagraph> classified,
                                             std::size_t document_bytes, int bins) {
  if (bins < 1) throw ContractViolation("completeness_profile: bins must be >= 1");
  if (units.size() != classified.size()) {
    throw ContractViolation("completeness_profile: units and classifications differ in length");
  }
  std::vector<ProfileBin> out(static_cast<std::size_t>(bins), ProfileBin{});
  for (std::size_t i = 0; i < units.size(); ++i) {
    int bin = 0;
    if (document_bytes > 0) {
      const double mid = static_cast<double>(units[i].begin_offset) +
                         static_cast<double>(units[i].text.size()) / 2.0;
      bin = static_cast<int>(mid / static_cast<double>(document_bytes) * bins);
      bin = std::clamp(bin, 0, bins - 1);
    }
    const auto& cls = classified[i].practice_class;
    const int slot = cls ? cls->index : kPracticeClassCount;
    ++out[static_cast<std::size_t>(bin)][static_cast<std::size_t>(slot)];
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

void to_json(nlohmann::json& j, const PracticeMatrix& m) {
  j = nlohmann::json{{"kind", to_string(m.kind)}, {"counts", m.counts}};
}

void from_json(const nlohmann::json& j, PracticeMatrix& m) {
  m.kind = kind_from_string(j.at("kind").get<std::string>());
  const auto& rows = j.at("counts");
  if (!rows.is_array() || rows.size() != kDataItemCount) {
    throw InputError("practice matrix must have 23 rows");
  }
  for (int r = 0; r < kDataItemCount; ++r) {
    const auto& row = rows.at(r);
    if (!row.is_array() || row.size() != kPurposeCount) {
      throw InputError("practice matrix rows must have 8 columns");
    }
    for (int c = 0; c < kPurposeCount; ++c) {
      const int v = row.at(c).get<int>();
      if (v < 0) throw InputError("practice matrix counts must be non-negative");
      m.counts[r][c] = v;
    }
  }
}

void to_json(nlohmann::json& j, const ClassifiedParagraph& c) {
  j = nlohmann::json{
      {"unit_id", c.unit_id},
      {"class", c.practice_class ? nlohmann::json(c.practice_class->index) : nlohmann::json()},
      {"rationale", c.rationale},
      {"rationale_repaired", c.rationale_repaired}};
  if (!c.error.empty()) j["error"] = c.error;
}

void from_json(const nlohmann::json& j, ClassifiedParagraph& c) {
  c.unit_id = j.at("unit_id").get<int>();
  c.practice_class.reset();
  if (!j.at("class").is_null()) c.practice_class = PracticeClass{j.at("class").get<int>()};
  c.rationale = j.at("rationale").get<std::string>();
  c.rationale_repaired = j.value("rationale_repaired", false);
  c.error = j.value("error", "");
}

void to_json(nlohmann::json& j, const DecodedTuple& t) {
  j = nlohmann::json{{"unit_id", t.unit_id}, {"kind", to_string(t.kind)}, {"tuple", t.tuple}};
}

void from_json(const nlohmann::json& j, DecodedTuple& t) {
  t.unit_id = j.at("unit_id").get<int>();
  t.kind = kind_from_string(j.at("kind").get<std::string>());
  t.tuple = j.at("tuple").get<PracticeTuple>();
}

void to_json(nlohmann::json& j, const MappedPractice& m) {
  j = nlohmann::json{{"unit_id", m.unit_id},
                     {"tuple_index", m.tuple_index},
                     {"kind", to_string(m.kind)},
                     {"item_text", m.item_text},
                     {"data_item", m.data_item.index},
                     {"purpose", m.purpose.index},
                     {"origin", to_string(m.item_origin)}};
}

void from_json(const nlohmann::json& j, MappedPractice& m) {
  m.unit_id = j.at("unit_id").get<int>();
  m.tuple_index = j.at("tuple_index").get<int>();
  m.kind = kind_from_string(j.at("kind").get<std::string>());
  m.item_text = j.at("item_text").get<std::string>();
  m.data_item = DataItemId{j.at("data_item").get<int>()};
  m.purpose = PurposeId{j.at("purpose").get<int>()};
  m.item_origin = origin_from_string(j.at("origin").get<std::string>());
  if (m.data_item.index < 0 || m.data_item.index >= kDataItemCount || m.purpose.index < 0 ||
      m.purpose.index >= kPurposeCount) {
    throw InputError("mapped practice id out of range");
  }
}

void to_json(nlohmann::json& j, const MappingValidation& v) {
  j = nlohmann::json{{"batch_id", v.batch_id},
                     {"vocabulary", vocabulary_name(v.vocabulary)},
                     {"batch_size", v.batch_size},
                     {"verdict", to_string(v.verdict)},
                     {"offending_indices", v.offending_indices}};
}

void from_json(const nlohmann::json& j, MappingValidation& v) {
  v.batch_id = j.at("batch_id").get<int>();
  v.vocabulary = vocabulary_from_string(j.at("vocabulary").get<std::string>());
  v.batch_size = j.at("batch_size").get<int>();
  v.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  v.offending_indices = j.at("offending_indices").get<std::vector<int>>();
}

void to_json(nlohmann::json& j, const MappingRecord& r) {
  j = nlohmann::json{{"text", r.text},
                     {"keyword", r.keyword},
                     {"task", to_string(r.task)},
                     {"origin", to_string(r.origin)}};
}

void from_json(const nlohmann::json& j, MappingRecord& r) {
  r.text = j.at("text").get<std::string>();
  r.keyword = j.at("keyword").get<std::string>();
  const auto task = task_from_string(j.at("task").get<std::string>());
  if (!task) throw InputError("unknown task in mapping record");
  r.task = *task;
  r.origin = origin_from_string(j.value("origin", "decoder"));
}

void to_json(nlohmann::json& j, const MappingCounters& c) {
  j = nlohmann::json{{"decoded_items", c.decoded_items},
                     {"via_decoder", c.via_decoder},
                     {"via_verifier", c.via_verifier},
                     {"negatives", c.negatives},
                     {"truncated", c.truncated}};
}

void from_json(const nlohmann::json& j, MappingCounters& c) {
  c.decoded_items = j.at("decoded_items").get<int>();
  c.via_decoder = j.at("via_decoder").get<int>();
  c.via_verifier = j.at("via_verifier").get<int>();
  c.negatives = j.at("negatives").get<int>();
  c.truncated = j.at("truncated").get<int>();
}

}  // namespace ppaudit
