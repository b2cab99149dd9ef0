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

#include "fake_backend.hpp"
#include "ppaudit/corpus_report.hpp"
#include "ppaudit/errors.hpp"
#include "ppaudit/report.hpp"
#include "test_support.hpp"

namespace ppaudit {
namespace {

using testing::fixture;
using testing::slurp;

// Runs the fixture corpus from its own directory so recorded paths stay
// relative.
std::vector<BatchResult> run_corpus(int threads) {
  testing::ScopedCwd cwd(fixture("corpus"));
  const auto apps = load_app_index("apps.json");
  std::vector<AuditRequest> requests;
  for (const auto& a : apps) requests.push_back(a.to_request());
  RunConfig config;
  Toolkit toolkit(config);
  return run_batch(requests, config, toolkit, threads);
}

const std::vector<BatchResult>& corpus_results() {
  static const std::vector<BatchResult> results = run_corpus(1);
  return results;
}

const ComplianceReport& report_for(const std::string& app_id) {
  for (const auto& r : corpus_results()) {
    if (r.app_id == app_id) return *r.report;
  }
  throw std::runtime_error("no report for " + app_id);
}

void check_golden(const std::filesystem::path& path, const std::string& actual) {
  if (testing::update_goldens()) {
    testing::spit(path, actual);
    GTEST_SKIP() << "golden refreshed: " << path;
  }
  ASSERT_TRUE(std::filesystem::exists(path)) << "missing golden " << path;
  EXPECT_EQ(slurp(path), actual) << "golden drift in " << path.filename();
}

TEST(ReportGolden, CorpusReports) {
  ASSERT_EQ(corpus_results().size(), 10u);
  for (const auto& r : corpus_results()) {
    ASSERT_TRUE(r.report) << r.app_id << ": " << r.error;
    EXPECT_EQ(r.exit_code, 0);
    check_golden(fixture("golden/" + r.app_id + ".json"), serialize_report(*r.report));
  }
}

TEST(ReportGolden, AcmeHtml) {
  const std::string html = render_html(nlohmann::json(report_for("com.acme.puzzle")));
  check_golden(fixture("golden/com.acme.puzzle.html"), html);
}

TEST(ReportGolden, ThreadCountDoesNotChangeBytes) {
  const auto parallel = run_corpus(8);
  ASSERT_EQ(parallel.size(), corpus_results().size());
  for (std::size_t i = 0; i < parallel.size(); ++i) {
    EXPECT_EQ(serialize_report(*parallel[i].report),
              serialize_report(*corpus_results()[i].report))
        << parallel[i].app_id;
  }
}

TEST(Report, SparrowFixtureScoresZero) {
  const auto& r = report_for("com.sparrowpixel.game");
  EXPECT_EQ(r.scores.pp_collect, 0.0);
  EXPECT_EQ(r.scores.ds_collect, 0.0);
  const auto pp = item_set(r.pp_collect);
  EXPECT_EQ(pp, (ItemSet{items::kName, items::kUserAccount}));
  EXPECT_EQ(item_set(r.ds->collect), (ItemSet{items::kAppActivity, items::kDeviceIdentifier}));
}

TEST(Report, FlagsOnFixtures) {
  EXPECT_TRUE(report_for("com.farmstudio.tractor").flags.name_mismatch.value);
  EXPECT_FALSE(report_for("com.acme.puzzle").flags.name_mismatch.value);
  const auto& hello = report_for("com.hello.placeholder");
  EXPECT_TRUE(hello.flags.placeholder_content.value);
  EXPECT_FALSE(hello.policy_analyzed);
  EXPECT_FALSE(hello.scores.pp_collect);
  const auto& juego = report_for("com.juegos.aventura");
  EXPECT_TRUE(juego.flags.non_english.value);
  EXPECT_FALSE(juego.flags.placeholder_content.value);
}

TEST(Report, JsonRoundTripIsLossless) {
  for (const auto& r : corpus_results()) {
    const std::string once = serialize_report(*r.report);
    const ComplianceReport parsed = parse_report(once);
    EXPECT_EQ(serialize_report(parsed), once) << r.app_id;
  }
}

TEST(Report, ScoresRecomputeFromEmbeddedData) {
  for (const auto& r : corpus_results()) {
    const ComplianceReport parsed = parse_report(serialize_report(*r.report));
    EXPECT_EQ(recompute_scores(parsed), parsed.scores) << r.app_id;
    EXPECT_EQ(recompute_purpose_table(parsed), parsed.purpose_agreement) << r.app_id;
    const auto [c, s] = build_matrices(parsed.practices);
    EXPECT_EQ(c, parsed.pp_collect);
    EXPECT_EQ(s, parsed.pp_share);
    const auto& k = parsed.counters;
    EXPECT_EQ(k.decoded_items, k.via_decoder + k.via_verifier + k.negatives + k.truncated);
    for (const auto& cp : parsed.classified) {
      const auto& unit = parsed.units.at(static_cast<std::size_t>(cp.unit_id));
      EXPECT_NE(unit.text.find(cp.rationale), std::string::npos);
    }
  }
}

TEST(Report, NoSecretsInOutput) {
  RunConfig config;
  config.remote.endpoint = "http://127.0.0.1:9/v1";
  ::setenv("PPAUDIT_API_KEY", "sk-very-secret", 1);
  nlohmann::json j = config;
  ::unsetenv("PPAUDIT_API_KEY");
  EXPECT_EQ(j.dump().find("sk-very-secret"), std::string::npos);
}

TEST(Degradation, MissingDsGivesNaAndWarning) {
  testing::ScopedCwd cwd(fixture("corpus"));
  AuditRequest req;
  req.app_id = "com.acme.puzzle";
  req.policy_source = "policies/acme.html";
  RunConfig config;
  Toolkit toolkit(config);
  const auto r = run_app_audit(req, config, toolkit);
  EXPECT_TRUE(r.policy_analyzed);
  EXPECT_TRUE(r.scores.pp_collect == std::nullopt);
  EXPECT_TRUE(r.scores.ds_collect == std::nullopt);
  EXPECT_TRUE(r.scores.pp_share == std::nullopt);
  EXPECT_TRUE(r.scores.ds_share == std::nullopt);
  const auto& w = r.annotations.warnings;
  EXPECT_TRUE(std::any_of(w.begin(), w.end(), [](const std::string& s) {
    return s.find("no data safety input") != std::string::npos;
  }));
  EXPECT_GT(r.pp_collect.total(), 0);
}

TEST(Degradation, UnreachableRemoteWithoutFallback) {
  RunConfig config;
  config.backend = "remote";
  config.rule_fallback = false;
  config.remote.endpoint = "http://127.0.0.1:9/v1/chat/completions";
  config.remote.max_retries = 0;
  config.remote.timeout = std::chrono::seconds(1);
  Toolkit toolkit(config);
  AuditRequest req;
  req.app_id = "x";
  req.policy_source = fixture("corpus/policies/acme.html").string();
  try {
    run_app_audit(req, config, toolkit);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.kind(), StageError::Kind::kBackend);
    EXPECT_EQ(e.stage(), "segment");
    EXPECT_EQ(exit_code_for(e), 2);
  }
}

TEST(Degradation, UnreachableRemoteWithFallbackMatchesRule) {
  RunConfig remote;
  remote.backend = "remote";
  remote.verifier = "remote";
  remote.remote.endpoint = "http://127.0.0.1:9/v1/chat/completions";
  remote.remote.max_retries = 0;
  remote.remote.timeout = std::chrono::seconds(1);
  Toolkit remote_kit(remote);
  RunConfig rule;
  Toolkit rule_kit(rule);
  AuditRequest req;
  req.app_id = "x";
  req.policy_source = fixture("corpus/policies/tiny.html").string();
  const auto a = run_app_audit(req, remote, remote_kit);
  const auto b = run_app_audit(req, rule, rule_kit);
  EXPECT_EQ(nlohmann::json(a.pp_collect), nlohmann::json(b.pp_collect));
  EXPECT_EQ(nlohmann::json(a.classified), nlohmann::json(b.classified));
}

TEST(Degradation, UnreadableInputsNameTheStage) {
  RunConfig config;
  Toolkit toolkit(config);
  AuditRequest req;
  req.app_id = "x";
  req.policy_source = fixture("corpus/policies/nope.html").string();
  try {
    run_app_audit(req, config, toolkit);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "ingest");
    EXPECT_EQ(exit_code_for(e), 1);
  }
  req.policy_source = fixture("corpus/policies/acme.html").string();
  req.ds_source = fixture("corpus/ds/nope.html");
  try {
    run_app_audit(req, config, toolkit);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "ds-parse");
    EXPECT_EQ(exit_code_for(e), 1);
  }
  req.ds_source.reset();
  req.manifest = fixture("ds_a3.html");
  try {
    run_app_audit(req, config, toolkit);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "evidence");
  }
}

TEST(Degradation, BatchCarriesPerAppErrors) {
  RunConfig config;
  Toolkit toolkit(config);
  std::vector<AuditRequest> reqs(2);
  reqs[0].app_id = "ok";
  reqs[0].policy_source = fixture("corpus/policies/tiny.html").string();
  reqs[1].app_id = "bad";
  reqs[1].policy_source = fixture("corpus/policies/missing.html").string();
  const auto out = run_batch(reqs, config, toolkit, 2);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_TRUE(out[0].report);
  EXPECT_FALSE(out[1].report);
  EXPECT_EQ(out[1].exit_code, 1);
  EXPECT_NE(out[1].error.find("ingest"), std::string::npos);
}

TEST(Degradation, FailedFetchIsAnnotated) {
  RunConfig config;
  config.fetch.timeout = std::chrono::milliseconds(500);
  Toolkit toolkit(config);
  AuditRequest req;
  req.app_id = "x";
  req.policy_source = "http://127.0.0.1:9/privacy";
  const auto r = run_app_audit(req, config, toolkit);
  EXPECT_FALSE(r.policy_analyzed);
  EXPECT_FALSE(r.admission.admitted);
  EXPECT_FALSE(r.scores.pp_collect);
  EXPECT_TRUE(std::any_of(r.annotations.warnings.begin(), r.annotations.warnings.end(),
                          [](const std::string& s) { return s.starts_with("fetch failed"); }));
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code_for(InputError("x")), 1);
  EXPECT_EQ(exit_code_for(BackendError("x")), 2);
  EXPECT_EQ(exit_code_for(ContractViolation("x")), 3);
  EXPECT_EQ(exit_code_for(StageError("s", StageError::Kind::kInvariant, "x")), 3);
}

TEST(Render, NaCellsAndEmptyGrid) {
  const auto& quiet = report_for("com.lanterndeck.quietcards");
  const std::string html = render_html(nlohmann::json(quiet));
  EXPECT_NE(html.find("n/a"), std::string::npos);
  EXPECT_EQ(html.find("<script"), std::string::npos);
  EXPECT_EQ(render_html(nlohmann::json(quiet)), html);

  const auto& hello = report_for("com.hello.placeholder");
  const std::string h = render_html(nlohmann::json(hello));
  EXPECT_NE(h.find("n/a"), std::string::npos);
  EXPECT_EQ(h.find("0.00%"), std::string::npos);
}

TEST(Render, SchemaMismatchNamesVersions) {
  nlohmann::json j = report_for("com.acme.puzzle");
  j["schema"] = "ppaudit.report/0";
  try {
    render_html(j);
    FAIL();
  } catch (const InputError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("ppaudit.report/1"), std::string::npos);
    EXPECT_NE(msg.find("ppaudit.report/0"), std::string::npos);
  }
  EXPECT_THROW(parse_report(j.dump()), InputError);
}

TEST(Render, EscapesText) {
  nlohmann::json j = report_for("com.tinyrunner.dash");
  j["app_id"] = "<b>&evil</b>";
  const std::string html = render_html(j);
  EXPECT_EQ(html.find("<b>&evil</b>"), std::string::npos);
  EXPECT_NE(html.find("&lt;b&gt;&amp;evil&lt;/b&gt;"), std::string::npos);
}

TEST(Config, DigestIgnoresExecutionOnlyFields) {
  RunConfig a;
  RunConfig b = a;
  b.concurrency = 8;
  b.remote.max_in_flight = 32;
  EXPECT_EQ(config_digest(a), config_digest(b));
  b.trials = 5;
  EXPECT_NE(config_digest(a), config_digest(b));
  EXPECT_EQ(config_digest(a).size(), 64u);
}

TEST(Config, JsonRoundTripAndValidation) {
  RunConfig c;
  c.backend = "remote";
  c.remote.endpoint = "https://api.example/v1/chat/completions";
  c.include_generic = true;
  nlohmann::json j = c;
  EXPECT_EQ(nlohmann::json(j.get<RunConfig>()), j);
  j["batch_size"] = 21;
  EXPECT_THROW(j.get<RunConfig>(), InputError);
  RunConfig bad;
  bad.backend = "oracle";
  EXPECT_THROW(Toolkit{bad}, InputError);
}

TEST(CorpusSummary, GroupsScoresAndCsv) {
  std::vector<ComplianceReport> reports;
  for (const auto& r : corpus_results()) reports.push_back(*r.report);
  testing::ScopedCwd cwd(fixture("corpus"));
  const auto apps = load_app_index("apps.json");
  const auto s = summarize_corpus(reports, apps, 50);
  EXPECT_EQ(s.json.at("schema"), "ppaudit.corpus/1");
  EXPECT_TRUE(s.json.at("missing_reports").empty());

  bool found_acme = false;
  for (const auto& g : s.json.at("reuse").at("by_content")) {
    if (g.at("members").size() == 2) {
      EXPECT_EQ(g.at("representative"), "com.acme.puzzle");
      found_acme = true;
    }
  }
  EXPECT_TRUE(found_acme);

  // Mean of the per-app values, NA skipped.
  double sum = 0;
  int n = 0;
  for (const auto& r : reports) {
    if (r.scores.pp_collect) {
      sum += *r.scores.pp_collect;
      ++n;
    }
  }
  EXPECT_EQ(s.json.at("mean_scores").at("pp_collect").at("apps"), n);
  EXPECT_NEAR(s.json.at("mean_scores").at("pp_collect").at("mean").get<double>(), sum / n, 1e-12);

  EXPECT_EQ(std::count(s.iou_csv.begin(), s.iou_csv.end(), '\n'), 24);
  EXPECT_NE(s.iou_csv.find("NA"), std::string::npos);
  EXPECT_EQ(s.trend_csv.rfind("metric,rank,mean,std,band_low,band_high,samples\n", 0), 0u);
  EXPECT_EQ(s.json.at("flag_counts").at("name_mismatch"), 1);
}

TEST(CorpusSummary, SuperDsNeverLowersDsCompliance) {
  std::vector<ComplianceReport> reports;
  for (const auto& r : corpus_results()) reports.push_back(*r.report);
  const auto s = summarize_corpus(reports, {}, 50);
  for (const auto& row : s.json.at("super_data_safety")) {
    const auto& rep = report_for(row.at("representative"));
    const auto super_ds = row.at("scores").at("ds_collect");
    if (rep.scores.ds_collect && !super_ds.is_null()) {
      EXPECT_GE(super_ds.get<double>(), *rep.scores.ds_collect);
    }
  }
  EXPECT_EQ(s.json.at("missing_reports").size(), 0u);
}

TEST(CorpusSummary, DuplicateReportsRejected) {
  std::vector<ComplianceReport> reports = {report_for("com.acme.puzzle"),
                                           report_for("com.acme.puzzle")};
  EXPECT_THROW(summarize_corpus(reports, {}, 50), InputError);
}

}  // namespace
}  // namespace ppaudit
