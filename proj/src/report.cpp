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

#include "ppaudit/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "bundled_data.hpp"
#include "ppaudit/errors.hpp"
#include "ppaudit/parallel.hpp"
#include "ppaudit/text.hpp"

namespace ppaudit {

namespace {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_url(std::string_view s) { return s.starts_with("http://") || s.starts_with("https://"); }

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const InputError& e) {
    throw StageError(stage, StageError::Kind::kInput, e.what());
  } catch (const BackendError& e) {
    throw StageError(stage, StageError::Kind::kBackend, e.what());
  } catch (const ContractViolation& e) {
    throw StageError(stage, StageError::Kind::kInvariant, e.what());
  } catch (const nlohmann::json::exception& e) {
    throw StageError(stage, StageError::Kind::kInput, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    throw StageError(stage, StageError::Kind::kInput, e.what());
  }
}

nlohmann::json taxonomy_summary(const Taxonomy& t) {
  auto list = [](std::span<const std::string> s) {
    return std::vector<std::string>(s.begin(), s.end());
  };
  return {{"version", t.version()},
          {"data_items", list(t.data_item_keywords())},
          {"purposes", list(t.purpose_keywords())},
          {"classes", list(t.practice_class_labels())}};
}

bool is_practice_unit(const ClassifiedParagraph& c) {
  return c.practice_class && (*c.practice_class == classes::kFirstPartyCollection ||
                              *c.practice_class == classes::kThirdPartySharing);
}

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json();
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = nlohmann::json{{"backend", c.backend},
                     {"verifier", c.verifier},
                     {"rule_fallback", c.rule_fallback},
                     {"remote", c.remote},
                     {"min_unit_len", c.min_unit_len},
                     {"batch_size", c.batch_size},
                     {"trials", c.trials},
                     {"min_english_confidence", c.min_english_confidence},
                     {"max_text_bytes", c.max_text_bytes},
                     {"placeholder_chars", c.placeholder_chars},
                     {"max_practices", c.max_practices},
                     {"profile_bins", c.profile_bins},
                     {"include_generic", c.include_generic},
                     {"taxonomy_path", c.taxonomy_path},
                     {"lexicon_path", c.lexicon_path},
                     {"fetch",
                      {{"max_redirects", c.fetch.max_redirects},
                       {"max_bytes", c.fetch.max_bytes},
                       {"timeout_ms", c.fetch.timeout.count()}}},
                     {"concurrency", c.concurrency}};
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  if (!j.is_object()) throw InputError("run config must be a JSON object");
  c.backend = j.value("backend", c.backend);
  c.verifier = j.value("verifier", c.verifier);
  c.rule_fallback = j.value("rule_fallback", c.rule_fallback);
  if (j.contains("remote")) c.remote = j.at("remote").get<RemoteConfig>();
  c.min_unit_len = j.value("min_unit_len", c.min_unit_len);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.trials = j.value("trials", c.trials);
  c.min_english_confidence = j.value("min_english_confidence", c.min_english_confidence);
  c.max_text_bytes = j.value("max_text_bytes", c.max_text_bytes);
  c.placeholder_chars = j.value("placeholder_chars", c.placeholder_chars);
  c.max_practices = j.value("max_practices", c.max_practices);
  c.profile_bins = j.value("profile_bins", c.profile_bins);
  c.include_generic = j.value("include_generic", c.include_generic);
  c.taxonomy_path = j.value("taxonomy_path", c.taxonomy_path);
  c.lexicon_path = j.value("lexicon_path", c.lexicon_path);
  if (j.contains("fetch")) {
    const auto& f = j.at("fetch");
    c.fetch.max_redirects = f.value("max_redirects", c.fetch.max_redirects);
    c.fetch.max_bytes = f.value("max_bytes", c.fetch.max_bytes);
    c.fetch.timeout = std::chrono::milliseconds(
        f.value("timeout_ms", static_cast<long>(c.fetch.timeout.count())));
  }
  c.concurrency = j.value("concurrency", c.concurrency);

  if (c.batch_size < 1 || c.batch_size > kMaxMappingBatch) {
    throw InputError("batch_size must be in 1..20");
  }
  if (c.trials < 1) throw InputError("trials must be >= 1");
  if (c.profile_bins < 1) throw InputError("profile_bins must be >= 1");
  if (c.concurrency < 1) throw InputError("concurrency must be >= 1");
}

std::string config_digest(const RunConfig& config) {
  nlohmann::json j = config;
  j.erase("concurrency");
  j["remote"].erase("max_in_flight");
  return text::sha256_hex(j.dump());
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const auto j = nlohmann::json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw InputError("config is not valid JSON: " + path.string());
  try {
    return j.get<RunConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config " + path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Toolkit

Toolkit::Toolkit(const RunConfig& config) {
  if (config.taxonomy_path.empty()) {
    taxonomy_ = &Taxonomy::bundled();
  } else {
    owned_taxonomy_ = std::make_unique<Taxonomy>(Taxonomy::load_file(config.taxonomy_path));
    taxonomy_ = owned_taxonomy_.get();
  }
  if (!config.lexicon_path.empty()) {
    owned_lexicon_ =
        std::make_unique<RuleLexicon>(RuleLexicon::load_file(config.lexicon_path, *taxonomy_));
    lexicon_ = owned_lexicon_.get();
  } else if (owned_taxonomy_) {
    const auto doc = nlohmann::json::parse(bundled::lexicon_json());
    owned_lexicon_ = std::make_unique<RuleLexicon>(RuleLexicon::from_json(doc, *taxonomy_));
    lexicon_ = owned_lexicon_.get();
  } else {
    lexicon_ = &RuleLexicon::bundled();
  }

  rule_ = std::make_unique<RuleBackend>(*taxonomy_, *lexicon_);
  auto remote_chain = [&]() -> Backend* {
    if (!remote_) {
      remote_ = std::make_unique<RemoteBackend>(config.remote, *taxonomy_);
      if (config.rule_fallback) fallback_ = std::make_unique<FallbackBackend>(*remote_, *rule_);
    }
    return fallback_ ? fallback_.get() : remote_.get();
  };
  auto pick = [&](const std::string& name, const char* role) -> Backend* {
    if (name == "rule") return rule_.get();
    if (name == "remote") return remote_chain();
    throw InputError(std::string("unknown ") + role + " backend '" + name + "'");
  };
  backend_ = pick(config.backend, "extraction");
  verifier_ = pick(config.verifier, "verifier");
}

Toolkit::~Toolkit() = default;

// ---------------------------------------------------------------------------
// Report JSON

void to_json(nlohmann::json& j, const ComplianceReport& r) {
  nlohmann::json reasons = nlohmann::json::array();
  for (auto reason : r.admission.reasons) reasons.push_back(to_string(reason));
  nlohmann::json completeness = nlohmann::json::array();
  for (const auto& bin : r.completeness) completeness.push_back(bin);

  j = nlohmann::json{
      {"schema", r.schema},
      {"tool_version", r.tool_version},
      {"config_digest", r.config_digest},
      {"taxonomy", r.taxonomy},
      {"app_id", r.app_id},
      {"policy_id", r.policy_id},
      {"source_url", r.source_url},
      {"developer_name", optional_json(r.developer_name)},
      {"admission",
       {{"admitted", r.admission.admitted},
        {"reasons", std::move(reasons)},
        {"language", r.admission.language},
        {"language_confidence", r.admission.language_confidence},
        {"text_bytes", r.admission.text_bytes},
        {"redirect_chain", r.admission.redirect_chain}}},
      {"policy_analyzed", r.policy_analyzed},
      {"headings", r.headings},
      {"units", r.units},
      {"classified", r.classified},
      {"tuples", r.tuples},
      {"practices", r.practices},
      {"validations", r.validations},
      {"mapping_records", r.mapping_records},
      {"counters", r.counters},
      {"completeness", std::move(completeness)},
      {"matrices", {{"pp_collect", r.pp_collect}, {"pp_share", r.pp_share}}},
      {"ds", optional_json(r.ds)},
      {"evidence", optional_json(r.evidence)},
      {"include_generic", r.include_generic},
      {"scores", r.scores},
      {"purpose_agreement", r.purpose_agreement},
      {"flags", r.flags},
      {"annotations",
       {{"unclassified_units", r.annotations.unclassified_units},
        {"skipped_decodes", r.annotations.skipped_decodes},
        {"failed_decodes", r.annotations.failed_decodes},
        {"verifier_corrections", r.annotations.verifier_corrections},
        {"repaired_rationales", r.annotations.repaired_rationales},
        {"warnings", r.annotations.warnings}}}};
}

void from_json(const nlohmann::json& j, ComplianceReport& r) {
  const std::string schema = j.value("schema", "");
  if (schema != kReportSchema) {
    throw InputError("report schema mismatch: expected " + std::string(kReportSchema) +
                     ", found '" + schema + "'");
  }
  r = ComplianceReport{};
  r.tool_version = j.at("tool_version").get<std::string>();
  r.config_digest = j.at("config_digest").get<std::string>();
  r.taxonomy = j.at("taxonomy");
  r.app_id = j.at("app_id").get<std::string>();
  r.policy_id = j.at("policy_id").get<std::string>();
  r.source_url = j.at("source_url").get<std::string>();
  if (!j.at("developer_name").is_null()) r.developer_name = j.at("developer_name").get<std::string>();

  const auto& a = j.at("admission");
  r.admission.admitted = a.at("admitted").get<bool>();
  for (const auto& s : a.at("reasons")) {
    const auto reason = admission_reason_from_string(s.get<std::string>());
    if (!reason) throw InputError("unknown admission reason " + s.dump());
    r.admission.reasons.push_back(*reason);
  }
  r.admission.language = a.at("language").get<std::string>();
  r.admission.language_confidence = a.at("language_confidence").get<double>();
  r.admission.text_bytes = a.at("text_bytes").get<std::size_t>();
  r.admission.redirect_chain = a.at("redirect_chain").get<std::vector<std::string>>();

  r.policy_analyzed = j.at("policy_analyzed").get<bool>();
  r.headings = j.at("headings").get<HeadingSet>();
  r.units = j.at("units").get<std::vector<ParagraphUnit>>();
  r.classified = j.at("classified").get<std::vector<ClassifiedParagraph>>();
  r.tuples = j.at("tuples").get<std::vector<DecodedTuple>>();
  r.practices = j.at("practices").get<std::vector<MappedPractice>>();
  r.validations = j.at("validations").get<std::vector<MappingValidation>>();
  r.mapping_records = j.at("mapping_records").get<std::vector<MappingRecord>>();
  r.counters = j.at("counters").get<MappingCounters>();
  r.completeness = j.at("completeness").get<std::vector<ProfileBin>>();
  r.pp_collect = j.at("matrices").at("pp_collect").get<PracticeMatrix>();
  r.pp_share = j.at("matrices").at("pp_share").get<PracticeMatrix>();
  if (!j.at("ds").is_null()) r.ds = j.at("ds").get<DsDeclaration>();
  if (!j.at("evidence").is_null()) r.evidence = j.at("evidence").get<EvidenceSet>();
  r.include_generic = j.at("include_generic").get<bool>();
  r.scores = j.at("scores").get<ComplianceScores>();
  r.purpose_agreement = j.at("purpose_agreement").get<std::vector<PurposeAgreementRow>>();
  r.flags = j.at("flags").get<AuditFlags>();

  const auto& n = j.at("annotations");
  r.annotations.unclassified_units = n.at("unclassified_units").get<std::vector<int>>();
  r.annotations.skipped_decodes = n.at("skipped_decodes").get<std::vector<int>>();
  r.annotations.failed_decodes = n.at("failed_decodes").get<std::vector<int>>();
  r.annotations.verifier_corrections = n.at("verifier_corrections").get<int>();
  r.annotations.repaired_rationales = n.at("repaired_rationales").get<int>();
  r.annotations.warnings = n.at("warnings").get<std::vector<std::string>>();
}

std::string serialize_report(const ComplianceReport& report) {
  return nlohmann::json(report).dump(2) + "\n";
}

ComplianceReport parse_report(std::string_view json_text) {
  const auto j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded()) throw InputError("report is not valid JSON");
  try {
    return j.get<ComplianceReport>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed report: ") + e.what());
  }
}

ComplianceReport load_report(const std::filesystem::path& path) {
  try {
    return parse_report(read_text_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Pipeline

ComplianceScores recompute_scores(const ComplianceReport& report) {
  const bool pp = report.policy_analyzed;
  return compute_scores(pp ? &report.pp_collect : nullptr, pp ? &report.pp_share : nullptr,
                        report.ds ? &*report.ds : nullptr,
                        report.evidence ? &*report.evidence : nullptr, report.include_generic);
}

std::vector<PurposeAgreementRow> recompute_purpose_table(const ComplianceReport& report) {
  if (!report.policy_analyzed || !report.ds) return {};
  return purpose_table(report.pp_collect, report.pp_share, *report.ds, report.include_generic);
}

ComplianceReport audit_document(const PolicyDocument& doc,
                                const std::vector<std::string>& redirect_chain,
                                const AuditRequest& request, const RunConfig& config,
                                Toolkit& toolkit) {
  const Taxonomy& taxonomy = toolkit.taxonomy();
  ComplianceReport r;
  r.config_digest = config_digest(config);
  r.taxonomy = taxonomy_summary(taxonomy);
  r.app_id = request.app_id;
  r.policy_id = doc.policy_id;
  r.source_url = doc.source_url;
  r.developer_name = request.developer_name;
  r.include_generic = config.include_generic;
  auto& notes = r.annotations.warnings;

  // Admission
  const AdmissionDecision admission =
      admit_policy(doc, {config.max_text_bytes, config.min_english_confidence});
  r.admission.admitted = admission.admitted;
  r.admission.reasons = admission.reasons;
  r.admission.language = doc.language.code;
  r.admission.language_confidence = doc.language.confidence;
  r.admission.text_bytes = doc.text_bytes;
  r.admission.redirect_chain = redirect_chain;

  // Segmentation and extraction
  if (admission.admitted) {
    const std::string& text = doc.plain_text;
    r.headings = in_stage("segment", [&] {
      return extract_headings(text, toolkit.backend(), taxonomy, config.trials);
    });
    r.units = in_stage("segment", [&] {
      const auto sections = split_sections(text, r.headings.headings);
      return segment_units(sections, config.min_unit_len);
    });
    in_stage("extract", [&] {
      r.classified = classify_policy(r.units, toolkit.backend(), taxonomy, &toolkit.lexicon(),
                                     config.concurrency);
      DecodeOutcome decoded =
          decode_policy(r.units, r.classified, toolkit.backend(), taxonomy, config.concurrency);
      r.tuples = std::move(decoded.tuples);
      r.annotations.skipped_decodes = std::move(decoded.skipped_units);
      r.annotations.failed_decodes = std::move(decoded.failed_units);

      ExtractionOptions options;
      options.batch_size = config.batch_size;
      options.max_practices = config.max_practices;
      options.concurrency = config.concurrency;
      MappingOutcome mapped =
          map_and_validate(r.tuples, toolkit.backend(), toolkit.verifier(), taxonomy, options);
      r.practices = std::move(mapped.practices);
      r.validations = std::move(mapped.validations);
      r.mapping_records = std::move(mapped.records);
      r.counters = mapped.counters;
      for (auto& w : mapped.warnings) notes.push_back(std::move(w));
      auto [collect, share] = build_matrices(r.practices);
      r.pp_collect = collect;
      r.pp_share = share;
      r.completeness =
          completeness_profile(r.units, r.classified, text.size(), config.profile_bins);
    });
    r.policy_analyzed = true;

    for (const auto& c : r.classified) {
      if (!c.practice_class) r.annotations.unclassified_units.push_back(c.unit_id);
      if (c.rationale_repaired) ++r.annotations.repaired_rationales;
    }
    r.annotations.verifier_corrections = r.counters.via_verifier;
    if (!r.annotations.unclassified_units.empty()) {
      notes.push_back(std::to_string(r.annotations.unclassified_units.size()) +
                      " unit(s) left unclassified after retries");
    }
    if (!r.annotations.skipped_decodes.empty() || !r.annotations.failed_decodes.empty()) {
      notes.push_back(std::to_string(r.annotations.skipped_decodes.size()) +
                      " decode(s) skipped on parse errors, " +
                      std::to_string(r.annotations.failed_decodes.size()) +
                      " failed on backend errors");
    }
  } else {
    std::vector<std::string> names;
    for (auto reason : admission.reasons) names.emplace_back(to_string(reason));
    notes.push_back("policy not admitted (" + text::join(names, ", ") +
                    "); policy-dependent scores are n/a");
  }

  // Data Safety
  if (request.ds_source) {
    r.ds = in_stage("ds-parse", [&] {
      std::vector<std::string> warnings;
      DsDeclaration d = load_ds_declaration(*request.ds_source, taxonomy, &warnings);
      for (auto& w : warnings) notes.push_back("data safety: " + w);
      return d;
    });
    if (!r.ds->unmapped_labels.empty()) {
      notes.push_back("data safety: " + std::to_string(r.ds->unmapped_labels.size()) +
                      " unmapped label(s)");
    }
  } else {
    notes.push_back("no data safety input; DS-dependent scores are n/a");
  }

  // APK evidence
  if (request.evidence) {
    r.evidence = in_stage("evidence", [&] { return load_evidence(*request.evidence); });
  } else if (request.manifest || request.api_refs) {
    r.evidence = in_stage("evidence", [&] {
      ManifestInfo manifest;
      if (request.manifest) manifest = load_manifest(*request.manifest);
      std::vector<std::string> refs;
      if (request.api_refs) refs = load_api_refs(*request.api_refs);
      return build_evidence(manifest, refs, taxonomy);
    });
  }
  if (r.evidence) {
    const bool api_backed = std::any_of(
        r.evidence->provenance.begin(), r.evidence->provenance.end(), [](const auto& kv) {
          return std::any_of(kv.second.begin(), kv.second.end(),
                             [](const EvidenceEntry& e) { return e.source == EvidenceSource::kApi; });
        });
    if (api_backed) {
      notes.push_back("evidence includes API-derived items from a curated signature map");
    }
  }

  // Scores
  r.scores = recompute_scores(r);
  r.purpose_agreement = recompute_purpose_table(r);

  // Flags
  AuditInputs flag_inputs;
  flag_inputs.redirect_chain = redirect_chain;
  if (!doc.fetch_failed) flag_inputs.plain_text = doc.plain_text;
  flag_inputs.admission_reasons = admission.reasons;
  flag_inputs.developer_name = request.developer_name;
  if (r.policy_analyzed) flag_inputs.practice_units = 0;
  for (std::size_t i = 0; i < r.classified.size(); ++i) {
    const auto& c = r.classified[i];
    if (is_practice_unit(c)) ++*flag_inputs.practice_units;
    if (c.practice_class == classes::kPrivacyContact) {
      flag_inputs.contact_texts.push_back(r.units.at(i).text);
    }
  }
  r.flags = audit_flags(flag_inputs, {config.placeholder_chars});
  return r;
}

ComplianceReport run_app_audit(const AuditRequest& request, const RunConfig& config,
                               Toolkit& toolkit) {
  if (request.policy_source.empty()) {
    throw StageError("ingest", StageError::Kind::kInput, "no policy source given");
  }
  PolicyDocument doc;
  std::vector<std::string> chain;
  if (is_url(request.policy_source)) {
    const FetchRecord record = fetch_policy(request.policy_source, config.fetch);
    doc = make_policy_document(record);
    chain = record.redirect_chain;
    if (!record.ok()) {
      // A failed download is an annotated outcome, not an unreadable input.
      ComplianceReport r = audit_document(doc, chain, request, config, toolkit);
      r.annotations.warnings.insert(r.annotations.warnings.begin(),
                                    "fetch failed: " + std::string(to_string(record.failure)) +
                                        " " + record.failure_detail);
      return r;
    }
  } else {
    std::string body = in_stage("ingest", [&] { return read_text_file(request.policy_source); });
    doc = make_policy_document(request.policy_source,
                               content_type_for_path(request.policy_source), std::move(body));
    chain = {request.policy_source};
  }
  return audit_document(doc, chain, request, config, toolkit);
}

int exit_code_for(const std::exception& e) {
  if (const auto* s = dynamic_cast<const StageError*>(&e)) {
    switch (s->kind()) {
      case StageError::Kind::kInput: return 1;
      case StageError::Kind::kBackend: return 2;
      case StageError::Kind::kInvariant: return 3;
    }
  }
  if (dynamic_cast<const InputError*>(&e)) return 1;
  if (dynamic_cast<const BackendError*>(&e)) return 2;
  if (dynamic_cast<const ContractViolation*>(&e)) return 3;
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return 1;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return 1;
  return 3;
}

std::vector<BatchResult> run_batch(std::span<const AuditRequest> requests,
                                   const RunConfig& config, Toolkit& toolkit, int threads) {
  std::vector<BatchResult> out(requests.size());
  // Parallelism is across apps; each app runs its own stages sequentially.
  RunConfig per_app = config;
  per_app.concurrency = 1;
  parallel_for(requests.size(), threads, [&](std::size_t i) {
    BatchResult& slot = out[i];
    slot.app_id = requests[i].app_id;
    try {
      slot.report = run_app_audit(requests[i], per_app, toolkit);
    } catch (const std::exception& e) {
      slot.error = e.what();
      slot.exit_code = exit_code_for(e);
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// HTML

namespace {

std::string esc(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt_ratio(const nlohmann::json& v) {
  if (v.is_null()) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", v.get<double>() * 100.0);
  return buf;
}

std::string label_at(const nlohmann::json& list, int i) {
  if (list.is_array() && i >= 0 && i < static_cast<int>(list.size())) {
    return list[i].get<std::string>();
  }
  return "#" + std::to_string(i);
}

// Background shade for a cell given its share of the matrix maximum.
std::string shade(double fraction) {
  const int level = static_cast<int>(fraction * 200.0 + 0.5);
  char buf[64];
  std::snprintf(buf, sizeof buf, "background:rgb(%d,%d,255)", 255 - level, 255 - level);
  return buf;
}

void render_grid(std::ostringstream& h, const std::string& title, const nlohmann::json& rows,
                 const nlohmann::json& items, const nlohmann::json& purposes) {
  int max_value = 0;
  for (const auto& row : rows) {
    for (const auto& cell : row) max_value = std::max(max_value, cell.get<int>());
  }
  h << "<table class=\"grid\"><caption>" << esc(title) << "</caption>\n<tr><th></th>";
  for (std::size_t k = 0; k < purposes.size(); ++k) h << "<th>" << esc(purposes[k].get<std::string>()) << "</th>";
  h << "</tr>\n";
  for (std::size_t j = 0; j < rows.size(); ++j) {
    h << "<tr><th>" << esc(label_at(items, static_cast<int>(j))) << "</th>";
    for (const auto& cell : rows[j]) {
      const int v = cell.get<int>();
      h << "<td style=\"" << shade(max_value > 0 ? static_cast<double>(v) / max_value : 0.0)
        << "\">" << v << "</td>";
    }
    h << "</tr>\n";
  }
  h << "</table>\n";
}

}  // namespace

std::string render_html(const nlohmann::json& j) {
  const std::string schema = j.is_object() ? j.value("schema", "") : "";
  if (schema != kReportSchema) {
    throw InputError("report schema mismatch: expected " + std::string(kReportSchema) +
                     ", found '" + schema + "'");
  }
  const auto& tax = j.at("taxonomy");
  const auto& items = tax.at("data_items");
  const auto& purposes = tax.at("purposes");
  const auto& classes_list = tax.at("classes");

  std::ostringstream h;
  const std::string app = j.at("app_id").get<std::string>();
  h << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>ppaudit report: "
    << esc(app) << "</title>\n<style>\n"
    << "body{font-family:sans-serif;margin:2em}table{border-collapse:collapse;margin:1em 0}"
    << "td,th{border:1px solid #bbb;padding:2px 6px;font-size:12px}caption{font-weight:bold}"
    << ".pair{display:flex;gap:2em;flex-wrap:wrap}.on{background:#c8e6c9}.off{background:#fff}"
    << ".flag-true{color:#b00020;font-weight:bold}\n</style>\n</head>\n<body>\n";

  h << "<h1>Compliance report: " << esc(app) << "</h1>\n<table>\n";
  auto meta = [&](const char* k, const std::string& v) {
    h << "<tr><th>" << k << "</th><td>" << esc(v) << "</td></tr>\n";
  };
  meta("Policy id", j.at("policy_id").get<std::string>());
  meta("Source", j.at("source_url").get<std::string>());
  if (!j.at("developer_name").is_null()) meta("Developer", j.at("developer_name").get<std::string>());
  meta("Tool version", j.at("tool_version").get<std::string>());
  meta("Config digest", j.at("config_digest").get<std::string>());
  meta("Taxonomy", tax.at("version").get<std::string>());
  meta("Policy analyzed", j.at("policy_analyzed").get<bool>() ? "yes" : "no");
  h << "</table>\n";

  h << "<h2>Scores</h2>\n<table>\n";
  const auto& s = j.at("scores");
  for (const char* key :
       {"pp_collect", "pp_share", "ds_collect", "ds_share", "evidence_vs_pp", "evidence_vs_ds"}) {
    h << "<tr><th>" << key << "</th><td>" << fmt_ratio(s.at(key)) << "</td></tr>\n";
  }
  h << "</table>\n";

  h << "<h2>Flags</h2>\n<table>\n";
  for (const auto& [name, flag] : j.at("flags").items()) {
    const bool v = flag.at("value").get<bool>();
    h << "<tr><th>" << esc(name) << "</th><td class=\"flag-" << (v ? "true" : "false") << "\">"
      << (v ? "yes" : "no") << "</td><td>" << esc(flag.at("evidence").get<std::string>())
      << "</td></tr>\n";
  }
  h << "</table>\n";

  const auto& m = j.at("matrices");
  const nlohmann::json empty_grid = [] {
    nlohmann::json g = nlohmann::json::array();
    for (int r = 0; r < kDataItemCount; ++r) g.push_back(std::vector<int>(kPurposeCount, 0));
    return g;
  }();
  const auto& ds = j.at("ds");
  for (const char* kind : {"collect", "share"}) {
    h << "<h2>Data " << kind << "ed: policy vs data safety</h2>\n<div class=\"pair\">\n";
    render_grid(h, std::string("Policy ") + kind, m.at(std::string("pp_") + kind).at("counts"),
                items, purposes);
    render_grid(h, std::string("Data safety ") + kind, ds.is_null() ? empty_grid : ds.at(kind),
                items, purposes);
    h << "</div>\n";
    if (ds.is_null()) h << "<p>No data safety input.</p>\n";
  }

  h << "<h2>Purpose agreement</h2>\n";
  const auto& pa = j.at("purpose_agreement");
  if (pa.empty()) {
    h << "<p>No data item is present on both sides.</p>\n";
  } else {
    h << "<table>\n<tr><th>kind</th><th>item</th>";
    for (const auto& p : purposes) h << "<th>" << esc(p.get<std::string>()) << "</th>";
    h << "</tr>\n";
    for (const auto& row : pa) {
      h << "<tr><td>" << esc(row.at("kind").get<std::string>()) << "</td><th>"
        << esc(label_at(items, row.at("data_item").get<int>())) << "</th>";
      for (const auto& pair : row.at("pairs")) {
        const bool a = pair.at(0).get<bool>();
        const bool b = pair.at(1).get<bool>();
        h << "<td class=\"" << (a == b ? (a ? "on" : "off") : "") << "\">" << (a ? "PP" : "-")
          << "/" << (b ? "DS" : "-") << "</td>";
      }
      h << "</tr>\n";
    }
    h << "</table>\n";
  }

  h << "<h2>Findings</h2>\n";
  const auto& practices = j.at("practices");
  if (practices.empty()) {
    h << "<p>No practices extracted.</p>\n";
  } else {
    std::map<int, std::string> rationale;
    for (const auto& c : j.at("classified")) {
      rationale[c.at("unit_id").get<int>()] = c.at("rationale").get<std::string>();
    }
    h << "<table>\n<tr><th>unit</th><th>kind</th><th>text</th><th>item</th><th>purpose</th>"
         "<th>origin</th><th>excerpt</th></tr>\n";
    for (const auto& p : practices) {
      const int unit = p.at("unit_id").get<int>();
      h << "<tr><td>" << unit << "</td><td>" << esc(p.at("kind").get<std::string>())
        << "</td><td>" << esc(p.at("item_text").get<std::string>()) << "</td><td>"
        << esc(label_at(items, p.at("data_item").get<int>())) << "</td><td>"
        << esc(label_at(purposes, p.at("purpose").get<int>())) << "</td><td>"
        << esc(p.at("origin").get<std::string>()) << "</td><td>" << esc(rationale[unit])
        << "</td></tr>\n";
    }
    h << "</table>\n";
  }

  h << "<h2>Paragraph classes</h2>\n<table>\n<tr><th>unit</th><th>class</th><th>rationale</th></tr>\n";
  for (const auto& c : j.at("classified")) {
    const auto& cls = c.at("class");
    h << "<tr><td>" << c.at("unit_id").get<int>() << "</td><td>"
      << (cls.is_null() ? "unclassified" : esc(label_at(classes_list, cls.get<int>())))
      << "</td><td>" << esc(c.at("rationale").get<std::string>()) << "</td></tr>\n";
  }
  h << "</table>\n";

  if (!ds.is_null() && !ds.at("records").empty()) {
    h << "<h2>Data safety records</h2>\n<table>\n<tr><th>practice</th><th>category</th>"
         "<th>detail</th><th>value</th></tr>\n";
    for (const auto& rec : ds.at("records")) {
      h << "<tr><td>" << esc(rec.at("d_prac").get<std::string>()) << "</td><td>"
        << esc(rec.at("d_cata").get<std::string>()) << "</td><td>"
        << esc(rec.at("d_detl").get<std::string>()) << "</td><td>"
        << esc(rec.at("d_valu").get<std::string>()) << "</td></tr>\n";
    }
    h << "</table>\n";
  }

  const auto& ev = j.at("evidence");
  if (!ev.is_null()) {
    h << "<h2>APK evidence</h2>\n<table>\n<tr><th>item</th><th>source</th><th>detail</th></tr>\n";
    for (const auto& p : ev.at("provenance")) {
      h << "<tr><td>" << esc(label_at(items, p.at("data_item").get<int>())) << "</td><td>"
        << esc(p.at("source").get<std::string>()) << "</td><td>"
        << esc(p.at("detail").get<std::string>()) << "</td></tr>\n";
    }
    h << "</table>\n";
  }

  const auto& notes = j.at("annotations");
  h << "<h2>Pipeline notes</h2>\n<ul>\n";
  h << "<li>unclassified units: " << notes.at("unclassified_units").size() << "</li>\n";
  h << "<li>skipped decodes: " << notes.at("skipped_decodes").size() << "</li>\n";
  h << "<li>failed decodes: " << notes.at("failed_decodes").size() << "</li>\n";
  h << "<li>verifier corrections: " << notes.at("verifier_corrections").get<int>() << "</li>\n";
  for (const auto& w : notes.at("warnings")) h << "<li>" << esc(w.get<std::string>()) << "</li>\n";
  h << "</ul>\n</body>\n</html>\n";
  return h.str();
}

}  // namespace ppaudit
