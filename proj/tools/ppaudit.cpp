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

// ppaudit command-line entry points.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ppaudit/corpus_report.hpp"
#include "ppaudit/errors.hpp"
#include "ppaudit/report.hpp"

namespace fs = std::filesystem;
using namespace ppaudit;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
  if (!out) throw InputError("write failed: " + path.string());
}

// "30s", "500ms", "2m" or a bare number of seconds.
std::chrono::milliseconds parse_duration(const std::string& s) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw InputError("bad duration '" + s + "'");
  }
  const std::string unit = s.substr(pos);
  double ms = 0.0;
  if (unit.empty() || unit == "s") ms = value * 1000.0;
  else if (unit == "ms") ms = value;
  else if (unit == "m") ms = value * 60000.0;
  else throw InputError("bad duration unit in '" + s + "'");
  if (ms < 0) throw InputError("negative duration '" + s + "'");
  return std::chrono::milliseconds(static_cast<long long>(ms));
}

struct BackendOptions {
  std::string config_path;
  std::string backend;
  std::string verifier;
  std::string endpoint;
  std::string model;
  std::string api_key_env;
  bool no_fallback = false;
  int threads = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run configuration JSON");
    cmd->add_option("--backend", backend, "Extraction backend")->check(CLI::IsMember({"rule", "remote"}));
    cmd->add_option("--verifier", verifier, "Verifier backend")->check(CLI::IsMember({"rule", "remote"}));
    cmd->add_option("--endpoint", endpoint, "Chat-completions URL for the remote backend");
    cmd->add_option("--model", model, "Remote model name");
    cmd->add_option("--api-key-env", api_key_env, "Environment variable holding the API key");
    cmd->add_flag("--no-fallback", no_fallback, "Do not fall back to the rule backend");
  }

  RunConfig resolve() const {
    RunConfig c = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (!backend.empty()) c.backend = backend;
    if (!verifier.empty()) c.verifier = verifier;
    if (!endpoint.empty()) c.remote.endpoint = endpoint;
    if (!model.empty()) c.remote.model = model;
    if (!api_key_env.empty()) c.remote.api_key_env = api_key_env;
    if (no_fallback) c.rule_fallback = false;
    if (threads > 0) c.concurrency = threads;
    return c;
  }
};

nlohmann::json parse_json_file(const fs::path& path) {
  auto j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw InputError(path.string() + " is not valid JSON");
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ppaudit: privacy policy and data safety compliance audits"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  // fetch
  std::string fetch_url, fetch_out, fetch_timeout = "30s";
  int max_redirects = 10;
  auto* fetch = app.add_subcommand("fetch", "Download a policy and record the redirect chain");
  fetch->add_option("--url", fetch_url, "Policy URL")->required();
  fetch->add_option("--out", fetch_out, "Output directory")->required();
  fetch->add_option("--max-redirects", max_redirects, "Redirect hop limit");
  fetch->add_option("--timeout", fetch_timeout, "Per-request timeout, e.g. 30s");

  // segment
  std::string seg_in, seg_emit;
  int seg_trials = 0;
  std::size_t seg_min_len = 0;
  BackendOptions seg_backend;
  auto* segment = app.add_subcommand("segment", "Split a policy into sections and paragraph units");
  segment->add_option("--in", seg_in, "Policy text or HTML")->required();
  segment->add_option("--emit", seg_emit, "Output JSON (stdout if omitted)");
  segment->add_option("--trials", seg_trials, "Heading extraction trials");
  segment->add_option("--min-len", seg_min_len, "Minimum paragraph unit length");
  seg_backend.attach(segment);

  // analyze
  std::string an_policy, an_ds, an_manifest, an_api, an_evidence, an_app_id, an_developer;
  std::string an_out, an_html, an_batch, an_out_dir;
  BackendOptions an_backend;
  auto* analyze = app.add_subcommand("analyze", "Run the full audit for one app or a batch");
  analyze->add_option("--policy", an_policy, "Policy file or URL");
  analyze->add_option("--ds", an_ds, "Data safety page (HTML) or normalized JSON");
  analyze->add_option("--manifest", an_manifest, "Decoded AndroidManifest.xml or permission list");
  analyze->add_option("--api-refs", an_api, "API method references (JSON list or one per line)");
  analyze->add_option("--evidence", an_evidence, "Prebuilt evidence JSON");
  analyze->add_option("--app-id", an_app_id, "App identifier");
  analyze->add_option("--developer", an_developer, "Developer name from the store listing");
  analyze->add_option("--out", an_out, "Report JSON (stdout if omitted)");
  analyze->add_option("--html", an_html, "Also write a rendered HTML report");
  analyze->add_option("--batch", an_batch, "App index JSON for batch mode");
  analyze->add_option("--out-dir", an_out_dir, "Report directory for batch mode");
  analyze->add_option("--threads", an_backend.threads, "Worker threads")->check(CLI::Range(1, 256));
  an_backend.attach(analyze);

  // ds-parse
  std::string ds_in, ds_out, ds_tagged;
  auto* ds_parse = app.add_subcommand("ds-parse", "Sanitize and normalize a data safety page");
  ds_parse->add_option("--in", ds_in, "Saved data safety HTML")->required();
  ds_parse->add_option("--out", ds_out, "Normalized JSON (stdout if omitted)");
  ds_parse->add_option("--tagged", ds_tagged, "Write the tagged record dump");

  // evidence
  std::string ev_manifest, ev_api, ev_out;
  auto* evidence = app.add_subcommand("evidence", "Map manifest permissions and API references");
  evidence->add_option("--manifest", ev_manifest, "Decoded manifest XML or permission list");
  evidence->add_option("--api-refs", ev_api, "API method references");
  evidence->add_option("--out", ev_out, "Evidence JSON (stdout if omitted)");

  // score
  std::string sc_pp, sc_ds, sc_evidence, sc_out;
  bool sc_generic = false;
  auto* score = app.add_subcommand("score", "Score a report's policy matrices against a declaration");
  score->add_option("--pp", sc_pp, "Report JSON holding the policy matrices")->required();
  score->add_option("--ds", sc_ds, "Data safety HTML or normalized JSON");
  score->add_option("--evidence", sc_evidence, "Evidence JSON");
  score->add_option("--out", sc_out, "Scores JSON (stdout if omitted)");
  score->add_flag("--include-generic", sc_generic, "Count generic information as a data item");

  // corpus-report
  std::string cr_reports, cr_metadata, cr_out, cr_csv_dir;
  int cr_window = 50;
  auto* corpus = app.add_subcommand("corpus-report", "Aggregate per-app reports");
  corpus->add_option("--reports", cr_reports, "Directory of report JSON files")->required();
  corpus->add_option("--metadata", cr_metadata, "App index JSON")->required();
  corpus->add_option("--out", cr_out, "Corpus JSON")->required();
  corpus->add_option("--csv-dir", cr_csv_dir, "Directory for CSV exports (default: next to --out)");
  corpus->add_option("--window", cr_window, "Moving average window")->check(CLI::Range(1, 100000));

  // export-verifier-corpus
  std::vector<std::string> vc_reports;
  std::string vc_out;
  auto* export_vc = app.add_subcommand("export-verifier-corpus",
                                       "Write decoder-mapped phrases as verifier training data");
  export_vc->add_option("--reports", vc_reports, "Report files or directories")->required();
  export_vc->add_option("--out", vc_out, "JSON Lines output")->required();

  // render
  std::string rd_report, rd_out;
  auto* render = app.add_subcommand("render", "Render a report as static HTML");
  render->add_option("--report", rd_report, "Report JSON")->required();
  render->add_option("--out", rd_out, "HTML output (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  auto emit = [](const std::string& path, std::string_view content) {
    if (path.empty()) {
      std::cout << content;
    } else {
      write_file(path, content);
    }
  };

  try {
    if (*fetch) {
      FetchLimits limits;
      limits.max_redirects = max_redirects;
      limits.timeout = parse_duration(fetch_timeout);
      const FetchRecord record = fetch_policy(fetch_url, limits);
      const fs::path dir = fetch_out;
      write_file(dir / "fetch.json", nlohmann::json(record).dump(2) + "\n");
      if (!record.ok()) {
        std::cerr << "fetch failed: " << to_string(record.failure) << " "
                  << record.failure_detail << "\n";
        return 1;
      }
      write_file(dir / "policy.html", record.body);
      write_file(dir / "policy.txt", make_policy_document(record).plain_text);
      std::cout << "fetched " << record.redirect_chain.back() << " (" << record.redirect_chain.size()
                << " hop(s))\n";
      return 0;
    }

    if (*segment) {
      RunConfig config = seg_backend.resolve();
      if (seg_trials > 0) config.trials = seg_trials;
      if (seg_min_len > 0) config.min_unit_len = seg_min_len;
      Toolkit toolkit(config);
      const PolicyDocument doc =
          make_policy_document(seg_in, content_type_for_path(seg_in), read_file(seg_in));
      const HeadingSet headings =
          extract_headings(doc.plain_text, toolkit.backend(), toolkit.taxonomy(), config.trials);
      const auto sections = split_sections(doc.plain_text, headings.headings);
      const auto units = segment_units(sections, config.min_unit_len);
      const nlohmann::json out = {{"policy_id", doc.policy_id},
                                  {"headings", headings},
                                  {"sections", sections},
                                  {"units", units}};
      emit(seg_emit, out.dump(2) + "\n");
      return 0;
    }

    if (*analyze) {
      const RunConfig config = an_backend.resolve();
      Toolkit toolkit(config);
      if (!an_batch.empty()) {
        if (an_out_dir.empty()) throw InputError("--batch requires --out-dir");
        const auto index = load_app_index(an_batch);
        std::vector<AuditRequest> requests;
        for (const auto& m : index) requests.push_back(m.to_request());
        const auto results = run_batch(requests, config, toolkit, config.concurrency);
        int worst = 0;
        for (const auto& r : results) {
          if (r.report) {
            write_file(fs::path(an_out_dir) / (r.app_id + ".json"), serialize_report(*r.report));
          } else {
            std::cerr << r.app_id << ": " << r.error << "\n";
            worst = std::max(worst, r.exit_code);
          }
        }
        return worst;
      }
      if (an_policy.empty()) throw InputError("analyze needs --policy or --batch");
      AuditRequest req;
      req.app_id = an_app_id.empty() ? fs::path(an_policy).stem().string() : an_app_id;
      req.policy_source = an_policy;
      if (!an_ds.empty()) req.ds_source = an_ds;
      if (!an_manifest.empty()) req.manifest = an_manifest;
      if (!an_api.empty()) req.api_refs = an_api;
      if (!an_evidence.empty()) req.evidence = an_evidence;
      if (!an_developer.empty()) req.developer_name = an_developer;
      const ComplianceReport report = run_app_audit(req, config, toolkit);
      emit(an_out, serialize_report(report));
      if (!an_html.empty()) write_file(an_html, render_html(nlohmann::json(report)));
      return 0;
    }

    if (*ds_parse) {
      const Taxonomy& taxonomy = Taxonomy::bundled();
      const DsParseResult parsed = sanitize_ds_html(read_file(ds_in));
      for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << "\n";
      const DsDeclaration decl = normalize_ds(parsed.records, taxonomy);
      if (!ds_tagged.empty()) write_file(ds_tagged, to_tagged_text(parsed.records));
      emit(ds_out, nlohmann::json(decl).dump(2) + "\n");
      return 0;
    }

    if (*evidence) {
      if (ev_manifest.empty() && ev_api.empty()) {
        throw InputError("evidence needs --manifest and/or --api-refs");
      }
      ManifestInfo manifest;
      if (!ev_manifest.empty()) manifest = load_manifest(ev_manifest);
      std::vector<std::string> refs;
      if (!ev_api.empty()) refs = load_api_refs(ev_api);
      const EvidenceSet ev = build_evidence(manifest, refs, Taxonomy::bundled());
      emit(ev_out, nlohmann::json(ev).dump(2) + "\n");
      return 0;
    }

    if (*score) {
      ComplianceReport report = load_report(sc_pp);
      if (!sc_ds.empty()) report.ds = load_ds_declaration(sc_ds, Taxonomy::bundled());
      if (!sc_evidence.empty()) report.evidence = load_evidence(sc_evidence);
      report.include_generic = sc_generic;
      const nlohmann::json out = {{"app_id", report.app_id},
                                  {"policy_id", report.policy_id},
                                  {"include_generic", sc_generic},
                                  {"scores", recompute_scores(report)},
                                  {"purpose_agreement", recompute_purpose_table(report)}};
      emit(sc_out, out.dump(2) + "\n");
      return 0;
    }

    if (*corpus) {
      const auto reports = load_reports_dir(cr_reports);
      const auto index = load_app_index(cr_metadata);
      const CorpusSummary summary = summarize_corpus(reports, index, cr_window);
      write_file(cr_out, summary.json.dump(2) + "\n");
      const fs::path csv_dir =
          cr_csv_dir.empty() ? fs::path(cr_out).parent_path() : fs::path(cr_csv_dir);
      write_file(csv_dir / "purpose_iou.csv", summary.iou_csv);
      write_file(csv_dir / "trends.csv", summary.trend_csv);
      return 0;
    }

    if (*export_vc) {
      std::vector<ComplianceReport> reports;
      for (const auto& p : vc_reports) {
        if (fs::is_directory(p)) {
          auto more = load_reports_dir(p);
          std::move(more.begin(), more.end(), std::back_inserter(reports));
        } else {
          reports.push_back(load_report(p));
        }
      }
      if (fs::path(vc_out).has_parent_path()) fs::create_directories(fs::path(vc_out).parent_path());
      std::ofstream out(vc_out, std::ios::binary);
      if (!out) throw InputError("cannot write " + vc_out);
      std::size_t n = 0;
      for (const auto& r : reports) n += export_verifier_corpus(r.mapping_records, r.policy_id, out);
      std::cerr << n << " record(s) exported\n";
      return 0;
    }

    if (*render) {
      emit(rd_out, render_html(parse_json_file(rd_report)));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}
