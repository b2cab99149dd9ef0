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
#include <optional>
#include <set>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppaudit/datasafety.hpp"
#include "ppaudit/evidence.hpp"
#include "ppaudit/extraction.hpp"
#include "ppaudit/taxonomy.hpp"

namespace ppaudit {

using ItemSet = std::set<DataItemId>;

// std::nullopt means not applicable (zero denominator).
using Ratio = std::optional<double>;

ItemSet item_set(const PracticeMatrix& matrix, bool include_generic = false);
ItemSet item_set(const BinaryGrid& grid, bool include_generic = false);

// |pp ∩ ds| / |ds|
Ratio pp_compliance(const ItemSet& pp, const ItemSet& ds);
// |pp ∩ ds| / |pp|
Ratio ds_compliance(const ItemSet& pp, const ItemSet& ds);
// |evidence ∩ against| / |evidence|
Ratio evidence_compliance(const ItemSet& evidence, const ItemSet& against);

struct PurposePair {
  bool in_pp = false;
  bool in_ds = false;

  bool operator==(const PurposePair&) const = default;
};
using PurposeRow = std::array<PurposePair, kPurposeCount>;

// Binarized purpose indicators for item j. Throws ContractViolation unless j
// is in both item sets.
PurposeRow purpose_agreement(const PracticeMatrix& pp, const BinaryGrid& ds, DataItemId j,
                             bool include_generic = false);

struct PurposeAgreementRow {
  PracticeKind kind = PracticeKind::kCollect;
  DataItemId item;
  PurposeRow pairs{};

  bool operator==(const PurposeAgreementRow&) const = default;
};

struct ComplianceScores {
  Ratio pp_collect;
  Ratio pp_share;
  Ratio ds_collect;
  Ratio ds_share;
  Ratio evidence_vs_pp;
  Ratio evidence_vs_ds;

  bool operator==(const ComplianceScores&) const = default;
};

// Any argument may be absent; dependent scores are then NA. Evidence is
// compared against the union of the collect and share item sets.
ComplianceScores compute_scores(const PracticeMatrix* pp_collect, const PracticeMatrix* pp_share,
                                const DsDeclaration* ds, const EvidenceSet* evidence,
                                bool include_generic = false);

std::vector<PurposeAgreementRow> purpose_table(const PracticeMatrix& pp_collect,
                                               const PracticeMatrix& pp_share,
                                               const DsDeclaration& ds,
                                               bool include_generic = false);

void to_json(nlohmann::json& j, const ComplianceScores& s);
void from_json(const nlohmann::json& j, ComplianceScores& s);
void to_json(nlohmann::json& j, const PurposeAgreementRow& r);
void from_json(const nlohmann::json& j, PurposeAgreementRow& r);

nlohmann::json ratio_to_json(const Ratio& r);
Ratio ratio_from_json(const nlohmann::json& j);

}  // namespace ppaudit
