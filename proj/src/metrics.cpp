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

#include "ppaudit/metrics.hpp"

#include <algorithm>

#include "ppaudit/errors.hpp"

namespace ppaudit {

namespace {

std::size_t intersection_size(const ItemSet& a, const ItemSet& b) {
  std::size_t n = 0;
  for (const auto& x : a) n += b.count(x);
  return n;
}

Ratio ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ItemSet item_set(const PracticeMatrix& matrix, bool include_generic) {
  ItemSet out;
  for (int j = 0; j < kDataItemCount; ++j) {
    if (!is_compliance_relevant(DataItemId{j}, include_generic)) continue;
    const auto& row = matrix.counts[j];
    if (std::any_of(row.begin(), row.end(), [](int c) { return c > 0; })) {
      out.insert(DataItemId{j});
    }
  }
  return out;
}

ItemSet item_set(const BinaryGrid& grid, bool include_generic) {
  ItemSet out;
  for (int j = 0; j < kDataItemCount; ++j) {
    if (!is_compliance_relevant(DataItemId{j}, include_generic)) continue;
    const auto& row = grid[j];
    if (std::any_of(row.begin(), row.end(), [](auto c) { return c != 0; })) {
      out.insert(DataItemId{j});
    }
  }
  return out;
}

Ratio pp_compliance(const ItemSet& pp, const ItemSet& ds) {
  return ratio(intersection_size(pp, ds), ds.size());
}

Ratio ds_compliance(const ItemSet& pp, const ItemSet& ds) {
  return ratio(intersection_size(pp, ds), pp.size());
}

Ratio evidence_compliance(const ItemSet& evidence, const ItemSet& against) {
  return ratio(intersection_size(evidence, against), evidence.size());
}

PurposeRow purpose_agreement(const PracticeMatrix& pp, const BinaryGrid& ds, DataItemId j,
                             bool include_generic) {
  if (!item_set(pp, include_generic).contains(j) || !item_set(ds, include_generic).contains(j)) {
    throw ContractViolation("purpose_agreement: item " + std::to_string(j.index) +
                            " is not present in both PP and DS");
  }
  PurposeRow row{};
  for (int k = 0; k < kPurposeCount; ++k) {
    row[k].in_pp = pp.counts[j.index][k] > 0;
    row[k].in_ds = ds[j.index][k] != 0;
  }
  return row;
}

ComplianceScores compute_scores(const PracticeMatrix* pp_collect, const PracticeMatrix* pp_share,
                                const DsDeclaration* ds, const EvidenceSet* evidence,
                                bool include_generic) {
  ComplianceScores s;
  if (pp_collect && ds) {
    const ItemSet pp = item_set(*pp_collect, include_generic);
    const ItemSet d = item_set(ds->collect, include_generic);
    s.pp_collect = pp_compliance(pp, d);
    s.ds_collect = ds_compliance(pp, d);
  }
  if (pp_share && ds) {
    const ItemSet pp = item_set(*pp_share, include_generic);
    const ItemSet d = item_set(ds->share, include_generic);
    s.pp_share = pp_compliance(pp, d);
    s.ds_share = ds_compliance(pp, d);
  }
  if (evidence) {
    ItemSet ev;
    for (const auto& id : evidence->items) {
      if (is_compliance_relevant(id, include_generic)) ev.insert(id);
    }
    if (pp_collect && pp_share) {
      ItemSet against = item_set(*pp_collect, include_generic);
      against.merge(item_set(*pp_share, include_generic));
      s.evidence_vs_pp = evidence_compliance(ev, against);
    }
    if (ds) {
      ItemSet against = item_set(ds->collect, include_generic);
      against.merge(item_set(ds->share, include_generic));
      s.evidence_vs_ds = evidence_compliance(ev, against);
    }
  }
  return s;
}

std::vector<PurposeAgreementRow> purpose_table(const PracticeMatrix& pp_collect,
                                               const PracticeMatrix& pp_share,
                                               const DsDeclaration& ds, bool include_generic) {
  std::vector<PurposeAgreementRow> out;
  auto add = [&](PracticeKind kind, const PracticeMatrix& pp, const BinaryGrid& grid) {
    const ItemSet a = item_set(pp, include_generic);
    const ItemSet b = item_set(grid, include_generic);
    for (const auto& j : a) {
      if (!b.contains(j)) continue;
      out.push_back({kind, j, purpose_agreement(pp, grid, j, include_generic)});
    }
  };
  add(PracticeKind::kCollect, pp_collect, ds.collect);
  add(PracticeKind::kShare, pp_share, ds.share);
  return out;
}

nlohmann::json ratio_to_json(const Ratio& r) {
  return r ? nlohmann::json(*r) : nlohmann::json();
}

Ratio ratio_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  const double v = j.get<double>();
  if (v < 0.0 || v > 1.0) throw InputError("score outside [0,1]");
  return v;
}

void to_json(nlohmann::json& j, const ComplianceScores& s) {
  j = nlohmann::json{{"pp_collect", ratio_to_json(s.pp_collect)},
                     {"pp_share", ratio_to_json(s.pp_share)},
                     {"ds_collect", ratio_to_json(s.ds_collect)},
                     {"ds_share", ratio_to_json(s.ds_share)},
                     {"evidence_vs_pp", ratio_to_json(s.evidence_vs_pp)},
                     {"evidence_vs_ds", ratio_to_json(s.evidence_vs_ds)}};
}

void from_json(const nlohmann::json& j, ComplianceScores& s) {
  s.pp_collect = ratio_from_json(j.at("pp_collect"));
  s.pp_share = ratio_from_json(j.at("pp_share"));
  s.ds_collect = ratio_from_json(j.at("ds_collect"));
  s.ds_share = ratio_from_json(j.at("ds_share"));
  s.evidence_vs_pp = ratio_from_json(j.at("evidence_vs_pp"));
  s.evidence_vs_ds = ratio_from_json(j.at("evidence_vs_ds"));
}

void to_json(nlohmann::json& j, const PurposeAgreementRow& r) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : r.pairs) pairs.push_back({p.in_pp, p.in_ds});
  j = nlohmann::json{
      {"kind", to_string(r.kind)}, {"data_item", r.item.index}, {"pairs", std::move(pairs)}};
}

void from_json(const nlohmann::json& j, PurposeAgreementRow& r) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "collect" && kind != "share") throw InputError("unknown kind " + kind);
  r.kind = kind == "collect" ? PracticeKind::kCollect : PracticeKind::kShare;
  r.item = DataItemId{j.at("data_item").get<int>()};
  const auto& pairs = j.at("pairs");
  if (pairs.size() != kPurposeCount) throw InputError("purpose row must have 8 pairs");
  for (int k = 0; k < kPurposeCount; ++k) {
    r.pairs[k].in_pp = pairs[k].at(0).get<bool>();
    r.pairs[k].in_ds = pairs[k].at(1).get<bool>();
  }
}

}  // namespace ppaudit
