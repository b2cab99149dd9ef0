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

#include "ppaudit/evidence.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "ppaudit/errors.hpp"
#include "ppaudit/text.hpp"

namespace ppaudit {

namespace pt = boost::property_tree;

namespace {

void sort_unique(std::vector<std::string>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Collects android:name of every uses-permission element below `node`.
void collect_permissions(const pt::ptree& node, std::vector<std::string>& out) {
  for (const auto& [tag, child] : node) {
    if (tag == "uses-permission" || tag == "uses-permission-sdk-23" ||
        tag == "uses-permission-sdk-m") {
      const auto name = child.get_optional<std::string>("<xmlattr>.android:name");
      if (name && !name->empty()) out.push_back(std::string(text::trim(*name)));
    }
  }
}

}  // namespace

std::string_view to_string(EvidenceSource source) {
  return source == EvidenceSource::kManifest ? "manifest" : "api";
}

ManifestInfo parse_manifest(std::string_view xml_text) {
  pt::ptree tree;
  std::istringstream in{std::string(xml_text)};
  try {
    pt::read_xml(in, tree, pt::xml_parser::no_comments);
  } catch (const pt::xml_parser_error& e) {
    throw InputError(std::string("manifest: malformed XML: ") + e.what());
  }
  const auto manifest = tree.get_child_optional("manifest");
  if (!manifest) throw InputError("manifest: missing <manifest> root element");
  ManifestInfo info;
  const auto package = manifest->get_optional<std::string>("<xmlattr>.package");
  if (!package || text::trim(*package).empty()) {
    throw InputError("manifest: missing package attribute");
  }
  info.package_id = std::string(text::trim(*package));
  collect_permissions(*manifest, info.permissions);
  sort_unique(info.permissions);
  return info;
}

std::vector<std::string> map_api_refs(
    std::span<const std::string> method_refs,
    const std::map<std::string, std::string>& api_permission_map) {
  std::vector<std::string> out;
  for (const auto& ref : method_refs) {
    if (auto it = api_permission_map.find(std::string(text::trim(ref)));
        it != api_permission_map.end()) {
      out.push_back(it->second);
    }
  }
  sort_unique(out);
  return out;
}

EvidenceSet permissions_to_items(std::span<const std::string> permissions,
                                 const std::map<std::string, DataItemId>& permission_item_map,
                                 EvidenceSource source) {
  EvidenceSet e;
  for (const auto& p : permissions) {
    auto it = permission_item_map.find(p);
    if (it == permission_item_map.end()) {
      e.unmapped_permissions.push_back(p);
      continue;
    }
    e.items.insert(it->second);
    auto& entries = e.provenance[it->second];
    EvidenceEntry entry{source, p};
    if (std::find(entries.begin(), entries.end(), entry) == entries.end()) {
      entries.push_back(std::move(entry));
    }
  }
  sort_unique(e.unmapped_permissions);
  for (auto& [item, entries] : e.provenance) std::sort(entries.begin(), entries.end());
  return e;
}

EvidenceSet merge_evidence(const EvidenceSet& a, const EvidenceSet& b) {
  EvidenceSet out = a;
  out.items.insert(b.items.begin(), b.items.end());
  for (const auto& [item, entries] : b.provenance) {
    auto& dst = out.provenance[item];
    for (const auto& e : entries) {
      if (std::find(dst.begin(), dst.end(), e) == dst.end()) dst.push_back(e);
    }
    std::sort(dst.begin(), dst.end());
  }
  out.unmapped_permissions.insert(out.unmapped_permissions.end(), b.unmapped_permissions.begin(),
                                  b.unmapped_permissions.end());
  sort_unique(out.unmapped_permissions);
  return out;
}

EvidenceSet build_evidence(const ManifestInfo& manifest, std::span<const std::string> method_refs,
                           const Taxonomy& taxonomy) {
  EvidenceSet from_manifest = permissions_to_items(manifest.permissions,
                                                   taxonomy.permission_item_map(),
                                                   EvidenceSource::kManifest);
  // API provenance names the signature that implied the permission.
  EvidenceSet from_api;
  for (const auto& ref : method_refs) {
    const auto perm = taxonomy.api_permission(text::trim(ref));
    if (!perm) continue;
    EvidenceSet one = permissions_to_items(std::span<const std::string>(&*perm, 1),
                                           taxonomy.permission_item_map(), EvidenceSource::kApi);
    for (auto& [item, entries] : one.provenance) {
      for (auto& e : entries) e.detail = std::string(text::trim(ref)) + " -> " + *perm;
    }
    from_api = merge_evidence(from_api, one);
  }
  return merge_evidence(from_manifest, from_api);
}

void to_json(nlohmann::json& j, const ManifestInfo& m) {
  j = nlohmann::json{{"package", m.package_id}, {"permissions", m.permissions}};
}

void to_json(nlohmann::json& j, const EvidenceSet& e) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& id : e.items) items.push_back(id.index);
  nlohmann::json prov = nlohmann::json::array();
  for (const auto& [item, entries] : e.provenance) {
    for (const auto& entry : entries) {
      prov.push_back(
          {{"data_item", item.index}, {"source", to_string(entry.source)}, {"detail", entry.detail}});
    }
  }
  j = nlohmann::json{{"schema", kEvidenceSchema},
                     {"items", std::move(items)},
                     {"provenance", std::move(prov)},
                     {"unmapped_permissions", e.unmapped_permissions}};
}

void from_json(const nlohmann::json& j, EvidenceSet& e) {
  if (j.value("schema", "") != kEvidenceSchema) {
    throw InputError("evidence schema mismatch: expected " + std::string(kEvidenceSchema) +
                     ", found '" + j.value("schema", "") + "'");
  }
  e = EvidenceSet{};
  for (const auto& v : j.at("items")) {
    const int idx = v.get<int>();
    if (idx < 0 || idx > 20) throw InputError("evidence item out of range 0..20");
    e.items.insert(DataItemId{idx});
  }
  for (const auto& p : j.at("provenance")) {
    const std::string src = p.at("source").get<std::string>();
    if (src != "manifest" && src != "api") throw InputError("unknown evidence source " + src);
    e.provenance[DataItemId{p.at("data_item").get<int>()}].push_back(
        {src == "manifest" ? EvidenceSource::kManifest : EvidenceSource::kApi,
         p.at("detail").get<std::string>()});
  }
  e.unmapped_permissions = j.value("unmapped_permissions", std::vector<std::string>{});
  for (const auto& id : e.items) {
    if (!e.provenance.contains(id)) throw InputError("evidence item without provenance");
  }
}

EvidenceSet load_evidence(const std::filesystem::path& path) {
  const auto j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw InputError("evidence input is not valid JSON: " + path.string());
  try {
    return j.get<EvidenceSet>();
  } catch (const nlohmann::json::exception& ex) {
    throw InputError("evidence input " + path.string() + ": " + ex.what());
  }
}

ManifestInfo load_manifest(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  const std::string_view trimmed = text::trim(content);
  if (trimmed.starts_with("[") || trimmed.starts_with("{")) {
    const auto j = nlohmann::json::parse(content, nullptr, false);
    if (j.is_discarded()) throw InputError("manifest JSON is malformed: " + path.string());
    ManifestInfo info;
    try {
      if (j.is_array()) {
        info.permissions = j.get<std::vector<std::string>>();
      } else {
        info.package_id = j.value("package", "");
        info.permissions = j.at("permissions").get<std::vector<std::string>>();
      }
    } catch (const nlohmann::json::exception& ex) {
      throw InputError("manifest JSON " + path.string() + ": " + ex.what());
    }
    sort_unique(info.permissions);
    return info;
  }
  return parse_manifest(content);
}

std::vector<std::string> load_api_refs(const std::filesystem::path& path) {
  const std::string body = read_file(path);
  const std::string_view trimmed = text::trim(body);
  if (trimmed.starts_with("[")) {
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_array()) {
      throw InputError("API refs must be a JSON array of strings: " + path.string());
    }
    try {
      return j.get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& ex) {
      throw InputError("API refs " + path.string() + ": " + ex.what());
    }
  }
  // One signature per line; blank lines and '#' comments ignored.
  std::vector<std::string> out;
  for (std::string_view line : text::split_lines_keep_ends(body)) {
    line = text::trim(line);
    if (line.empty() || line.front() == '#') continue;
    out.emplace_back(line);
  }
  return out;
}

}  // namespace ppaudit
