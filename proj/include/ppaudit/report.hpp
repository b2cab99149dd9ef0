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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppaudit/corpus.hpp"
#include "ppaudit/datasafety.hpp"
#include "ppaudit/evidence.hpp"
#include "ppaudit/extraction.hpp"
#include "ppaudit/ingest.hpp"
#include "ppaudit/lm_backend.hpp"
#include "ppaudit/metrics.hpp"
#include "ppaudit/remote_backend.hpp"
#include "ppaudit/rule_backend.hpp"
#include "ppaudit/segmenter.hpp"
#include "ppaudit/taxonomy.hpp"

namespace ppaudit {

inline constexpr std::string_view kReportSchema = "ppaudit.report/1";
inline constexpr std::string_view kToolVersion = "0.3.0";

struct RunConfig {
  std::string backend = "rule";   // rule | remote
  std::string verifier = "rule";  // rule | remote
  bool rule_fallback = true;      // remote failures fall back to the rule backend
  RemoteConfig remote;

  std::size_t min_unit_len = kDefaultMinUnitLength;
  std::size_t batch_size = kMaxMappingBatch;
  int trials = 3;
  double min_english_confidence = 0.3;
  std::size_t max_text_bytes = 51200;
  std::size_t placeholder_chars = 400;
  std::size_t max_practices = 2000;
  int profile_bins = 100;
  bool include_generic = false;
  std::string taxonomy_path;  // empty = bundled
  std::string lexicon_path;   // empty = bundled
  FetchLimits fetch;

  // Execution only; excluded from the digest.
  int concurrency = 1;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

// SHA-256 of the configuration JSON without execution-only fields
// (concurrency, remote.max_in_flight).
std::string config_digest(const RunConfig& config);

RunConfig load_run_config(const std::filesystem::path& path);

// Taxonomy, lexicon and backends resolved from a RunConfig.
class Toolkit {
 public:
  explicit Toolkit(const RunConfig& config);
  ~Toolkit();
  Toolkit(const Toolkit&) = delete;
  Toolkit& operator=(const Toolkit&) = delete;

  const Taxonomy& taxonomy() const { return *taxonomy_; }
  const RuleLexicon& lexicon() const { return *lexicon_; }
  Backend& backend() { return *backend_; }
  Backend& verifier() { return *verifier_; }

 private:
  const Taxonomy* taxonomy_ = nullptr;
  const RuleLexicon* lexicon_ = nullptr;
  std::unique_ptr<Taxonomy> owned_taxonomy_;
  std::unique_ptr<RuleLexicon> owned_lexicon_;
  std::unique_ptr<Backend> rule_;
  std::unique_ptr<Backend> remote_;
  std::unique_ptr<Backend> fallback_;
  Backend* backend_ = nullptr;
  Backend* verifier_ = nullptr;
};

struct AuditRequest {
  std::string app_id;
  std::string policy_source;  // file path or http(s) URL
  std::optional<std::filesystem::path> ds_source;
  std::optional<std::filesystem::path> manifest;
  std::optional<std::filesystem::path> api_refs;
  std::optional<std::filesystem::path> evidence;  // prebuilt evidence JSON
  std::optional<std::string> developer_name;
};

struct Annotations {
  std::vector<int> unclassified_units;
  std::vector<int> skipped_decodes;
  std::vector<int> failed_decodes;
  int verifier_corrections = 0;
  int repaired_rationales = 0;
  std::vector<std::string> warnings;
};

struct AdmissionSummary {
  bool admitted = false;
  std::vector<AdmissionReason> reasons;
  std::string language = "und";
  double language_confidence = 0.0;
  std::size_t text_bytes = 0;
  std::vector<std::string> redirect_chain;
};

struct ComplianceReport {
  std::string schema = std::string(kReportSchema);
  std::string tool_version = std::string(kToolVersion);
  std::string config_digest;
  nlohmann::json taxonomy;  // version plus the keyword lists used for rendering
  std::string app_id;
  std::string policy_id;
  std::string source_url;
  std::optional<std::string> developer_name;

  AdmissionSummary admission;
  bool policy_analyzed = false;
  HeadingSet headings;
  std::vector<ParagraphUnit> units;
  std::vector<ClassifiedParagraph> classified;
  std::vector<DecodedTuple> tuples;
  std::vector<MappedPractice> practices;
  std::vector<MappingValidation> validations;
  std::vector<MappingRecord> mapping_records;
  MappingCounters counters;
  std::vector<ProfileBin> completeness;

  PracticeMatrix pp_collect{PracticeKind::kCollect, {}};
  PracticeMatrix pp_share{PracticeKind::kShare, {}};
  std::optional<DsDeclaration> ds;
  std::optional<EvidenceSet> evidence;

  bool include_generic = false;
  ComplianceScores scores;
  std::vector<PurposeAgreementRow> purpose_agreement;
  AuditFlags flags;
  Annotations annotations;
};

void to_json(nlohmann::json& j, const ComplianceReport& r);
void from_json(const nlohmann::json& j, ComplianceReport& r);

// Stable, indented serialization used for report files.
std::string serialize_report(const ComplianceReport& report);
ComplianceReport parse_report(std::string_view json_text);
ComplianceReport load_report(const std::filesystem::path& path);

// Runs the pipeline on a policy document already in memory.
ComplianceReport audit_document(const PolicyDocument& doc,
                                const std::vector<std::string>& redirect_chain,
                                const AuditRequest& request, const RunConfig& config,
                                Toolkit& toolkit);

// Reads or fetches the policy, then audit_document. Unreadable inputs throw
// StageError naming the stage.
ComplianceReport run_app_audit(const AuditRequest& request, const RunConfig& config,
                               Toolkit& toolkit);

struct BatchResult {
  std::string app_id;
  std::optional<ComplianceReport> report;
  std::string error;  // stage-attributed message when report is empty
  int exit_code = 0;
};

// One audit per request on up to `threads` workers; results keep input order.
std::vector<BatchResult> run_batch(std::span<const AuditRequest> requests,
                                   const RunConfig& config, Toolkit& toolkit, int threads);

// Scores and purpose table recomputed from the matrices and sets embedded in
// the report.
ComplianceScores recompute_scores(const ComplianceReport& report);
std::vector<PurposeAgreementRow> recompute_purpose_table(const ComplianceReport& report);

// Maps an exception to the CLI exit code convention (1 input, 2 backend,
// 3 invariant).
int exit_code_for(const std::exception& e);

// Static HTML view of a report JSON document. Throws InputError on a schema
// version mismatch.
std::string render_html(const nlohmann::json& report_json);

}  // namespace ppaudit
