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

#include "ppaudit/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include "ppaudit/errors.hpp"
#include "ppaudit/text.hpp"

namespace ppaudit {

namespace {

std::vector<ReuseGroup> group_by(std::span<const AppEntry> apps,
                                 std::string AppEntry::*key_field) {
  std::map<std::string, std::vector<const AppEntry*>> groups;
  for (const auto& app : apps) {
    const std::string& key = app.*key_field;
    if (key.empty()) continue;
    groups[key].push_back(&app);
  }
  std::vector<ReuseGroup> out;
  for (auto& [key, members] : groups) {
    ReuseGroup g;
    g.key = key;
    const AppEntry* rep = nullptr;
    for (const AppEntry* m : members) {
      g.member_app_ids.push_back(m->app_id);
      if (!rep || m->downloads > rep->downloads ||
          (m->downloads == rep->downloads && m->app_id < rep->app_id)) {
        rep = m;
      }
    }
    std::sort(g.member_app_ids.begin(), g.member_app_ids.end());
    g.representative_app = rep->app_id;
    out.push_back(std::move(g));
  }
  return out;
}

// Company-name filler that says nothing about identity.
bool is_generic_name_token(const std::string& t) {
  static const std::set<std::string, std::less<>> kGeneric = {
      "studio", "studios", "games", "game", "gaming", "mobile", "apps", "limited", "corp",
      "corporation", "company", "software", "entertainment", "interactive", "technologies",
      "technology", "team", "group", "media", "digital", "labs", "privacy", "policy", "contact",
      "email", "questions", "please", "this", "that", "with", "your", "about", "address",
      "support", "inc.", "gmbh", "l.l.c", "development", "developer", "publishing"};
  return kGeneric.contains(t);
}

std::set<std::string> proper_noun_tokens(std::string_view s) {
  std::set<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && !std::isalnum(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) ||
                            static_cast<unsigned char>(s[i]) >= 0x80)) {
      ++i;
    }
    if (i == start) continue;
    const std::string_view word = s.substr(start, i - start);
    if (!std::isupper(static_cast<unsigned char>(word[0]))) continue;
    const std::string folded = text::case_fold(word);
    if (folded.size() >= 4 && !is_generic_name_token(folded)) out.insert(folded);
  }
  return out;
}

}  // namespace

ReuseReport detect_reuse(std::span<const AppEntry> apps) {
  ReuseReport r;
  r.by_content = group_by(apps, &AppEntry::policy_id);
  r.by_url = group_by(apps, &AppEntry::policy_url);
  return r;
}

DsDeclaration super_data_safety(std::span<const DsDeclaration> declarations) {
  if (declarations.empty()) throw ContractViolation("super_data_safety: no declarations");
  DsDeclaration out;
  for (const auto& d : declarations) {
    for (int j = 0; j < kDataItemCount; ++j) {
      for (int k = 0; k < kPurposeCount; ++k) {
        out.collect[j][k] |= d.collect[j][k];
        out.share[j][k] |= d.share[j][k];
      }
    }
    auto merge_flag = [](std::optional<bool>& dst, const std::optional<bool>& src) {
      if (src) dst = dst.value_or(false) || *src;
    };
    merge_flag(out.security.deletion_requestable, d.security.deletion_requestable);
    merge_flag(out.security.encrypted_in_transit, d.security.encrypted_in_transit);
    out.unmapped_labels.insert(out.unmapped_labels.end(), d.unmapped_labels.begin(),
                               d.unmapped_labels.end());
    const int offset = static_cast<int>(out.records.size());
    out.records.insert(out.records.end(), d.records.begin(), d.records.end());
    for (DsProvenance p : d.provenance) {
      p.record_index += offset;
      out.provenance.push_back(p);
    }
  }
  return out;
}

IouGrid corpus_purpose_iou(std::span<const IouInput> pairs, bool include_generic) {
  std::array<std::array<int, kPurposeCount>, kDataItemCount> inter{};
  std::array<std::array<int, kPurposeCount>, kDataItemCount> uni{};
  for (const auto& pair : pairs) {
    const ItemSet a = item_set(pair.pp, include_generic);
    const ItemSet b = item_set(pair.ds, include_generic);
    for (const auto& j : a) {
      if (!b.contains(j)) continue;
      const PurposeRow row = purpose_agreement(pair.pp, pair.ds, j, include_generic);
      for (int k = 0; k < kPurposeCount; ++k) {
        if (row[k].in_pp && row[k].in_ds) ++inter[j.index][k];
        if (row[k].in_pp || row[k].in_ds) ++uni[j.index][k];
      }
    }
  }
  IouGrid out{};
  for (int j = 0; j < kDataItemCount; ++j) {
    for (int k = 0; k < kPurposeCount; ++k) {
      if (uni[j][k] > 0) out[j][k] = static_cast<double>(inter[j][k]) / uni[j][k];
    }
  }
  return out;
}

TrendSeries moving_average_trend(std::span<const Ratio> scores, int window) {
  if (window < 1) throw ContractViolation("moving_average_trend: window must be >= 1");
  TrendSeries series;
  series.window = window;
  const int n = static_cast<int>(scores.size());
  const int before = window / 2;
  const int after = window - before - 1;
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - before);
    const int hi = std::min(n - 1, i + after);
    // Sums are taken relative to the first valid score so a constant window
    // yields its value exactly.
    std::optional<double> ref;
    double shifted = 0.0;
    int count = 0;
    for (int k = lo; k <= hi; ++k) {
      if (scores[k]) {
        if (!ref) ref = *scores[k];
        shifted += *scores[k] - *ref;
        ++count;
      }
    }
    TrendPoint p;
    p.rank = i;
    p.samples = count;
    if (count > 0) {
      const double mean = *ref + shifted / count;
      double ss = 0.0;
      for (int k = lo; k <= hi; ++k) {
        if (scores[k]) ss += (*scores[k] - mean) * (*scores[k] - mean);
      }
      p.mean = mean;
      p.std = std::sqrt(ss / count);
    }
    series.points.push_back(p);
  }
  return series;
}

AuditFlags audit_flags(const AuditInputs& in, const AuditThresholds& thresholds) {
  AuditFlags f;
  f.redirected.value = in.redirect_chain.size() > 1;
  f.redirected.evidence = f.redirected.value
                              ? std::to_string(in.redirect_chain.size() - 1) + " redirect(s): " +
                                    text::join(in.redirect_chain, " -> ")
                              : "no redirects recorded";

  if (!in.plain_text) {
    f.placeholder_content.evidence = "no policy text retrieved";
  } else {
    const std::size_t chars = text::code_point_count(text::trim(*in.plain_text));
    const bool short_text = chars < thresholds.placeholder_chars;
    f.placeholder_content.value = short_text || in.practice_units == 0;
    f.placeholder_content.evidence =
        std::to_string(chars) + " characters, " +
        (in.practice_units ? std::to_string(*in.practice_units) + " collection/sharing units"
                           : std::string("units not analyzed"));
  }

  const std::set<std::string> contact_tokens = [&] {
    std::set<std::string> all;
    for (const auto& t : in.contact_texts) all.merge(proper_noun_tokens(t));
    return all;
  }();
  std::set<std::string> dev_tokens;
  if (in.developer_name) {
    for (auto& t : text::word_tokens(*in.developer_name)) {
      if (t.size() >= 4 && !is_generic_name_token(t)) dev_tokens.insert(t);
    }
  }
  if (dev_tokens.empty() || contact_tokens.empty()) {
    f.name_mismatch.evidence = !in.developer_name ? "developer name unknown"
                               : dev_tokens.empty() ? "developer name has no distinctive token"
                                                    : "no names found in contact sections";
  } else {
    std::vector<std::string> shared;
    for (const auto& t : dev_tokens) {
      if (contact_tokens.contains(t)) shared.push_back(t);
    }
    f.name_mismatch.value = shared.empty();
    f.name_mismatch.evidence =
        shared.empty()
            ? "developer tokens {" + text::join({dev_tokens.begin(), dev_tokens.end()}, ", ") +
                  "} absent from contact names {" +
                  text::join({contact_tokens.begin(), contact_tokens.end()}, ", ") + "}"
            : "shared token(s): " + text::join(shared, ", ");
  }

  auto has = [&](AdmissionReason r) {
    return std::find(in.admission_reasons.begin(), in.admission_reasons.end(), r) !=
           in.admission_reasons.end();
  };
  f.empty_policy.value = has(AdmissionReason::kEmpty);
  f.empty_policy.evidence = f.empty_policy.value ? "admission: empty" : "text present";
  f.non_english.value = has(AdmissionReason::kNonEnglish);
  f.non_english.evidence = f.non_english.value ? "admission: non_english" : "not flagged";
  return f;
}

void to_json(nlohmann::json& j, const Flag& f) {
  j = nlohmann::json{{"value", f.value}, {"evidence", f.evidence}};
}

void from_json(const nlohmann::json& j, Flag& f) {
  f.value = j.at("value").get<bool>();
  f.evidence = j.at("evidence").get<std::string>();
}

void to_json(nlohmann::json& j, const AuditFlags& f) {
  j = nlohmann::json{{"redirected", f.redirected},
                     {"placeholder_content", f.placeholder_content},
                     {"name_mismatch", f.name_mismatch},
                     {"empty_policy", f.empty_policy},
                     {"non_english", f.non_english}};
}

void from_json(const nlohmann::json& j, AuditFlags& f) {
  f.redirected = j.at("redirected").get<Flag>();
  f.placeholder_content = j.at("placeholder_content").get<Flag>();
  f.name_mismatch = j.at("name_mismatch").get<Flag>();
  f.empty_policy = j.at("empty_policy").get<Flag>();
  f.non_english = j.at("non_english").get<Flag>();
}

void to_json(nlohmann::json& j, const ReuseGroup& g) {
  j = nlohmann::json{
      {"key", g.key}, {"members", g.member_app_ids}, {"representative", g.representative_app}};
}

void to_json(nlohmann::json& j, const TrendSeries& t) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : t.points) {
    points.push_back({{"rank", p.rank},
                      {"mean", ratio_to_json(p.mean)},
                      {"std", p.std},
                      {"band_low", p.mean ? nlohmann::json(p.band_low()) : nlohmann::json()},
                      {"band_high", p.mean ? nlohmann::json(p.band_high()) : nlohmann::json()},
                      {"samples", p.samples}});
  }
  j = nlohmann::json{{"window", t.window}, {"points", std::move(points)}};
}

nlohmann::json iou_to_json(const IouGrid& grid) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : grid) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& cell : row) r.push_back(ratio_to_json(cell));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace ppaudit
