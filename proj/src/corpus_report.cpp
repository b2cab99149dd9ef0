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

#include "ppaudit/corpus_report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "ppaudit/errors.hpp"

namespace ppaudit {

namespace {

std::optional<std::filesystem::path> resolve(const nlohmann::json& j, const char* key,
                                             const std::filesystem::path& base) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  std::filesystem::path p = j.at(key).get<std::string>();
  return p.is_absolute() ? p : base / p;
}

std::string csv_number(const Ratio& r) {
  if (!r) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *r);
  return buf;
}

struct MeanAcc {
  double sum = 0.0;
  int n = 0;
  void add(const Ratio& r) {
    if (r) {
      sum += *r;
      ++n;
    }
  }
  nlohmann::json to_json() const {
    return {{"mean", n ? nlohmann::json(sum / n) : nlohmann::json()}, {"apps", n}};
  }
};

const char* const kMetricNames[] = {"pp_collect", "pp_share", "ds_collect",
                                    "ds_share",   "evidence_vs_pp", "evidence_vs_ds"};

Ratio metric(const ComplianceScores& s, int i) {
  switch (i) {
    case 0: return s.pp_collect;
    case 1: return s.pp_share;
    case 2: return s.ds_collect;
    case 3: return s.ds_share;
    case 4: return s.evidence_vs_pp;
    default: return s.evidence_vs_ds;
  }
}

}  // namespace

AuditRequest AppMetadata::to_request() const {
  AuditRequest r;
  r.app_id = app_id;
  r.policy_source = policy;
  r.ds_source = ds;
  r.manifest = manifest;
  r.api_refs = api_refs;
  r.evidence = evidence;
  r.developer_name = developer;
  return r;
}

std::vector<AppMetadata> load_app_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read app index " + path.string());
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw InputError("app index is not valid JSON: " + path.string());
  const nlohmann::json& list = j.is_object() ? j.value("apps", nlohmann::json()) : j;
  if (!list.is_array()) throw InputError("app index must be a list or {\"apps\": [...]}");
  const std::filesystem::path base = path.parent_path();
  std::vector<AppMetadata> out;
  try {
    for (const auto& e : list) {
      AppMetadata m;
      m.app_id = e.at("app_id").get<std::string>();
      if (e.contains("developer") && !e.at("developer").is_null()) {
        m.developer = e.at("developer").get<std::string>();
      }
      m.downloads = e.value("downloads", std::uint64_t{0});
      const std::string policy = e.value("policy", "");
      if (policy.starts_with("http://") || policy.starts_with("https://") || policy.empty()) {
        m.policy = policy;
      } else {
        const std::filesystem::path p = policy;
        m.policy = (p.is_absolute() ? p : base / p).string();
      }
      m.ds = resolve(e, "ds", base);
      m.manifest = resolve(e, "manifest", base);
      m.api_refs = resolve(e, "api_refs", base);
      m.evidence = resolve(e, "evidence", base);
      out.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("app index " + path.string() + ": " + e.what());
  }
  return out;
}

std::vector<ComplianceReport> load_reports_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw InputError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<ComplianceReport> out;
  for (const auto& f : files) out.push_back(load_report(f));
  return out;
}

CorpusSummary summarize_corpus(std::span<const ComplianceReport> reports,
                               std::span<const AppMetadata> apps, int window) {
  std::map<std::string, const ComplianceReport*> by_app;
  for (const auto& r : reports) {
    if (!by_app.emplace(r.app_id, &r).second) {
      throw InputError("duplicate report for app " + r.app_id);
    }
  }
  std::map<std::string, const AppMetadata*> meta;
  for (const auto& a : apps) meta[a.app_id] = &a;

  nlohmann::json out;
  out["schema"] = "ppaudit.corpus/1";
  out["apps"] = static_cast<int>(reports.size());
  std::vector<std::string> missing;
  for (const auto& a : apps) {
    if (!by_app.contains(a.app_id)) missing.push_back(a.app_id);
  }
  out["missing_reports"] = missing;

  // Reuse
  std::vector<AppEntry> entries;
  for (const auto& [id, r] : by_app) {
    AppEntry e;
    e.app_id = id;
    e.policy_id = r->policy_analyzed ? r->policy_id : "";
    e.policy_url = r->admission.redirect_chain.empty() ? r->source_url
                                                       : r->admission.redirect_chain.front();
    if (auto it = meta.find(id); it != meta.end()) e.downloads = it->second->downloads;
    entries.push_back(std::move(e));
  }
  const ReuseReport reuse = detect_reuse(entries);
  out["reuse"] = {{"by_content", reuse.by_content}, {"by_url", reuse.by_url}};

  // Mean scores over per-app reports.
  std::array<MeanAcc, 6> means{};
  for (const auto& [id, r] : by_app) {
    for (int i = 0; i < 6; ++i) means[i].add(metric(r->scores, i));
  }
  nlohmann::json mean_json;
  for (int i = 0; i < 6; ++i) mean_json[kMetricNames[i]] = means[i].to_json();
  out["mean_scores"] = std::move(mean_json);

  // Super data safety per content group, scored against the representative's
  // policy.
  nlohmann::json super_rows = nlohmann::json::array();
  std::array<MeanAcc, 6> super_means{};
  std::vector<IouInput> iou_inputs;
  for (const auto& g : reuse.by_content) {
    const ComplianceReport& rep = *by_app.at(g.representative_app);
    std::vector<DsDeclaration> decls;
    for (const auto& member : g.member_app_ids) {
      const auto& r = *by_app.at(member);
      if (r.ds) decls.push_back(*r.ds);
    }
    if (decls.empty()) continue;
    const DsDeclaration super = super_data_safety(decls);
    const ComplianceScores s = compute_scores(&rep.pp_collect, &rep.pp_share, &super, nullptr,
                                              rep.include_generic);
    for (int i = 0; i < 4; ++i) super_means[i].add(metric(s, i));
    super_rows.push_back({{"policy_id", g.key},
                          {"representative", g.representative_app},
                          {"declarations", decls.size()},
                          {"scores", s}});
    iou_inputs.push_back({rep.pp_collect, super.collect});
    iou_inputs.push_back({rep.pp_share, super.share});
  }
  out["super_data_safety"] = std::move(super_rows);
  nlohmann::json super_mean_json;
  for (int i = 0; i < 4; ++i) super_mean_json[kMetricNames[i]] = super_means[i].to_json();
  out["super_mean_scores"] = std::move(super_mean_json);

  // Purpose IoU across (policy, super declaration) pairs, both practice kinds.
  const IouGrid iou = corpus_purpose_iou(iou_inputs);
  out["purpose_iou"] = iou_to_json(iou);

  // Trends by downloads, descending; ties by app id.
  std::vector<const ComplianceReport*> ranked;
  for (const auto& [id, r] : by_app) ranked.push_back(r);
  auto downloads = [&](const ComplianceReport* r) {
    auto it = meta.find(r->app_id);
    return it == meta.end() ? std::uint64_t{0} : it->second->downloads;
  };
  std::stable_sort(ranked.begin(), ranked.end(), [&](auto* a, auto* b) {
    return downloads(a) > downloads(b);
  });
  nlohmann::json trends;
  std::ostringstream trend_csv;
  trend_csv << "metric,rank,mean,std,band_low,band_high,samples\n";
  for (int i = 0; i < 4; ++i) {
    std::vector<Ratio> series;
    for (const auto* r : ranked) series.push_back(metric(r->scores, i));
    const TrendSeries t = moving_average_trend(series, window);
    trends[kMetricNames[i]] = t;
    for (const auto& p : t.points) {
      trend_csv << kMetricNames[i] << ',' << p.rank << ',' << csv_number(p.mean) << ','
                << csv_number(p.mean ? Ratio(p.std) : std::nullopt) << ','
                << csv_number(p.mean ? Ratio(p.band_low()) : std::nullopt) << ','
                << csv_number(p.mean ? Ratio(p.band_high()) : std::nullopt) << ',' << p.samples
                << '\n';
    }
  }
  out["trends"] = std::move(trends);

  // Flag tallies.
  nlohmann::json flags;
  for (const char* f : {"redirected", "placeholder_content", "name_mismatch", "empty_policy",
                        "non_english"}) {
    flags[f] = 0;
  }
  for (const auto& [id, r] : by_app) {
    const nlohmann::json fj = r->flags;
    for (auto& [name, v] : fj.items()) {
      if (v.at("value").get<bool>()) flags[name] = flags[name].get<int>() + 1;
    }
  }
  out["flag_counts"] = std::move(flags);

  CorpusSummary summary;
  std::ostringstream iou_csv;
  std::vector<std::string> item_names, purpose_names;
  if (!reports.empty() && reports.front().taxonomy.is_object()) {
    item_names = reports.front().taxonomy.at("data_items").get<std::vector<std::string>>();
    purpose_names = reports.front().taxonomy.at("purposes").get<std::vector<std::string>>();
  }
  auto name = [](const std::vector<std::string>& v, int i) {
    return i < static_cast<int>(v.size()) ? v[i] : std::to_string(i);
  };
  iou_csv << "data_item";
  for (int k = 0; k < kPurposeCount; ++k) iou_csv << ",\"" << name(purpose_names, k) << '"';
  iou_csv << '\n';
  for (int j = 0; j < kDataItemCount; ++j) {
    iou_csv << '"' << name(item_names, j) << '"';
    for (int k = 0; k < kPurposeCount; ++k) iou_csv << ',' << csv_number(iou[j][k]);
    iou_csv << '\n';
  }
  summary.json = std::move(out);
  summary.iou_csv = iou_csv.str();
  summary.trend_csv = trend_csv.str();
  return summary;
}

}  // namespace ppaudit
