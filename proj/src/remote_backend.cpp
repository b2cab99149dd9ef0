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

#include "ppaudit/remote_backend.hpp"

#include <algorithm>
#include <cstdlib>
#include <regex>
#include <thread>

#include <httplib.h>

#include "ppaudit/errors.hpp"
#include "ppaudit/text.hpp"

namespace ppaudit {

namespace {

constexpr std::string_view kClassifyPrompt =
    R"(I will give you the annotation scheme consisting of twelve data practice categories with explanations. The annotations are to the website's privacy policy.
1. First Party Collection / Use: how and why a service provider collects user information.
2. Third Party Sharing / Collection: how user information may be shared with or collected by third parties.
3. User Choice / Control: choices and control options available to users.
4. User Access, Edit and Deletion: if and how users may access, edit, or delete their information
5. Introductory / Generic: if mentions about generic information or if its introductory
6. Policy Change: if and how users will be informed about changes to the privacy policy.
7. Data Security: how user information is protected.
8. International and Specific Audiences: practices that pertain only to a specific group of users (e.g., children, Europeans, or California residents).
9. Practice not covered: mentions that a practice is not covered by that privacy policy.
10. Data Retention: how long user information is stored.
11. Privacy contact information: how the users could contact for relevant information
12. Do Not Track: if and how Do Not Track signals for online tracking and advertising are honored
Based on the text provided, select the most matching category and provide a reason. The reason is a text excerpt (annotation) from the provided paragraph itself that explains best for the matching category provided.Please follow the output structure like this;
Matching category = 'category'
Reasoning = 'text annotation')";

constexpr std::string_view kDecodePrompt =
    R"(By going through the following privacy policy text, identify each suitable segment of text according to the following structured components:
1.data: what type of data,
2.purpose: why is this data required,
3.processing: in which circumstances this data is utilized,
4.storage: how long this data is stored or retained,
5.recipients: who are the intended users for this data.
Please note that sometimes it might not be possible to fill all five types above, if so, leave them empty. Provide the output as a JSON list.)";

constexpr std::string_view kDecodeExample =
    R"(Here is an example:
processed_jsons = [{'data': 'what type', 'purpose':'why', 'processing':'how utilized', 'storage':'how long stored', 'recipients':'who are recipients'}, ...])";

constexpr std::string_view kItemMappingPrompt =
    R"(The task is to map different data items in a given evaluation_list with the most suitable keywords.
Predefined keyword_list: ['name', 'email', 'user account', 'address', 'phone', 'race/ethnicity', 'political/religious', 'gender', 'financial', 'location', 'search and browsing history', 'sms/messages/call log', 'photos/videos', 'audio/music', 'health/fitness', 'contacts', 'calendar', 'app performance/app activity', 'device identifier', 'files/documents', 'other personal'].
Match each item in the following evaluation_list to the most relevant keyword from the predefined keyword_list above.
Return the results in this format. output_list=['data item1': 'keyword1', 'data item2': 'keyword2', ...]. Do not include explanations or extra text.
if something in evaluation_list is too generic, output it as 'generic information' but this output is discouraged
Please use the 'N/A' to indicate if an item is not suitable (outlier) as a data practice item type.)";

constexpr std::string_view kPurposeMappingPrompt =
    R"(The task is to map the different purpose phrases in a given purpose_list with the most suitable keywords.
Predefined keyword_list = ['analytics', 'developer communication', 'fraud prevention/security', 'advertising', 'personalization', 'account management','app functionality', 'other']
Match each item in the following purpose_list with the most relevant keyword from the predefined keyword_list above
Return the results in this format. output_list = {'purpose item1':'keyword1', 'purpose item2':'keyword2',......}. Do not include explanations or extra text.)";

// Not published alongside the other templates; written for this tool.
constexpr std::string_view kHeadingsPrompt =
    R"(Identify the primary section headings of the following privacy policy text. Copy every heading exactly as it appears on its own line, in document order, and leave out sub-headings. Return the result as a JSON list of strings. Do not include explanations or extra text.)";

constexpr std::string_view kVerifyPrompt =
    R"(Map the following phrase to exactly one keyword from the predefined keyword_list. Answer with the keyword only.)";

nlohmann::json user(std::string content) {
  return {{"role", "user"}, {"content", std::move(content)}};
}

std::string keyword_list_repr(const std::vector<std::string>& vocabulary) {
  return python_list_repr(vocabulary);
}

bool is_retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

void to_json(nlohmann::json& j, const RemoteConfig& c) {
  j = nlohmann::json{{"endpoint", c.endpoint},
                     {"api_key_env", c.api_key_env},
                     {"model", c.model},
                     {"max_in_flight", c.max_in_flight},
                     {"timeout_s", c.timeout.count()},
                     {"max_retries", c.max_retries},
                     {"backoff_ms", c.backoff.count()},
                     {"token_budgets", c.token_budgets}};
}

void from_json(const nlohmann::json& j, RemoteConfig& c) {
  c.endpoint = j.value("endpoint", c.endpoint);
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  c.model = j.value("model", c.model);
  c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
  c.timeout = std::chrono::seconds(j.value("timeout_s", static_cast<long>(c.timeout.count())));
  c.max_retries = j.value("max_retries", c.max_retries);
  c.backoff = std::chrono::milliseconds(
      j.value("backoff_ms", static_cast<long>(c.backoff.count())));
  if (j.contains("token_budgets")) {
    c.token_budgets = j.at("token_budgets").get<std::map<std::string, int>>();
  }
}

nlohmann::json build_messages(const BackendRequest& request, const Taxonomy& taxonomy) {
  nlohmann::json messages = nlohmann::json::array();
  const auto& p = request.payload;
  auto item_strings = [&] { return p.at("items").get<std::vector<std::string>>(); };
  switch (request.task) {
    case Task::kHeadings:
      messages.push_back(user(std::string(kHeadingsPrompt)));
      messages.push_back(user("privacy policy text:\n" + p.at("text").get<std::string>()));
      break;
    case Task::kClassify:
      messages.push_back(user(std::string(kClassifyPrompt)));
      messages.push_back(user(p.at("text").get<std::string>()));
      break;
    case Task::kDecode:
      messages.push_back(user(std::string(kDecodePrompt)));
      messages.push_back(user(std::string(kDecodeExample)));
      messages.push_back(user("privacy policy text:" + p.at("text").get<std::string>()));
      break;
    case Task::kMapItems:
      messages.push_back(user(std::string(kItemMappingPrompt)));
      messages.push_back(user("evaluation_list = " + python_list_repr(item_strings())));
      break;
    case Task::kMapPurposes:
      messages.push_back(user(std::string(kPurposeMappingPrompt)));
      messages.push_back(user("purpose_list =" + python_list_repr(item_strings())));
      break;
    case Task::kVerifyItem:
    case Task::kVerifyPurpose: {
      const auto kind = request.task == Task::kVerifyItem ? VocabularyKind::kDataItems
                                                          : VocabularyKind::kPurposes;
      messages.push_back(user(std::string(kVerifyPrompt) + "\nkeyword_list = " +
                              keyword_list_repr(mapping_vocabulary(kind, taxonomy))));
      messages.push_back(user("phrase = " + p.at("item").get<std::string>()));
      break;
    }
  }
  return messages;
}

nlohmann::json build_request_body(const BackendRequest& request, const RemoteConfig& config,
                                  const Taxonomy& taxonomy) {
  int max_tokens = request.budget.max_output_tokens;
  if (auto it = config.token_budgets.find(std::string(to_string(request.task)));
      it != config.token_budgets.end()) {
    max_tokens = it->second;
  }
  return nlohmann::json{{"model", config.model},
                        {"messages", build_messages(request, taxonomy)},
                        {"temperature", request.budget.deterministic ? 0.0 : 0.7},
                        {"max_tokens", max_tokens}};
}

std::string extract_completion(std::string_view response_body) {
  const auto j = nlohmann::json::parse(response_body, nullptr, false);
  if (j.is_discarded()) throw BackendError("remote: response is not JSON");
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw BackendError("remote: response lacks choices[0].message.content");
  }
}

// ---------------------------------------------------------------------------

struct RemoteBackend::Target {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

RemoteBackend::RemoteBackend(RemoteConfig config, const Taxonomy& taxonomy)
    : config_(std::move(config)),
      taxonomy_(taxonomy),
      in_flight_(std::clamp(config_.max_in_flight, 1, 1024)) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, kUrl)) {
    throw InputError("remote: endpoint must be an absolute http(s) URL: '" +
                     config_.endpoint + "'");
  }
  target_ = std::make_unique<Target>(Target{m[1].str(), m[2].matched ? m[2].str() : "/"});
}

RemoteBackend::~RemoteBackend() = default;

std::string RemoteBackend::complete(const BackendRequest& request) {
  const std::string body = build_request_body(request, config_, taxonomy_).dump();
  httplib::Headers headers = {
      {"X-Correlation-Id", std::to_string(request.correlation_id)}};
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  std::string last_error;
  auto delay = config_.backoff;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    httplib::Client client(target_->origin);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    auto res = client.Post(target_->path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) return extract_completion(res->body);
    last_error = "HTTP " + std::to_string(res->status);
    if (!is_retryable_status(res->status)) break;
  }
  throw BackendError("remote " + config_.endpoint + ": " + last_error);
}

std::string FallbackBackend::complete(const BackendRequest& request) {
  try {
    return primary_.complete(request);
  } catch (const BackendError&) {
    return fallback_.complete(request);
  }
}

}  // namespace ppaudit
