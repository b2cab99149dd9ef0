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

#include <chrono>
#include <map>
#include <memory>
#include <semaphore>
#include <string>

#include <nlohmann/json.hpp>

#include "ppaudit/lm_backend.hpp"
#include "ppaudit/taxonomy.hpp"

namespace ppaudit {

struct RemoteConfig {
  std::string endpoint;  // full URL of the chat-completions resource
  std::string api_key_env = "PPAUDIT_API_KEY";
  std::string model = "gpt-4o";
  int max_in_flight = 4;
  std::chrono::seconds timeout{60};
  int max_retries = 2;
  std::chrono::milliseconds backoff{500};
  // Per-task max_tokens overrides keyed by task name.
  std::map<std::string, int> token_budgets;
};

void to_json(nlohmann::json& j, const RemoteConfig& c);
void from_json(const nlohmann::json& j, RemoteConfig& c);

// Chat messages for a request, [{role, content}, ...].
nlohmann::json build_messages(const BackendRequest& request, const Taxonomy& taxonomy);

// {model, messages, temperature, max_tokens}
nlohmann::json build_request_body(const BackendRequest& request, const RemoteConfig& config,
                                  const Taxonomy& taxonomy);

// choices[0].message.content; throws BackendError on any other shape.
std::string extract_completion(std::string_view response_body);

// JSON-over-HTTP chat-completion client. Idempotent reads, so network
// errors, 429 and 5xx answers are retried with exponential backoff.
class RemoteBackend : public Backend {
 public:
  RemoteBackend(RemoteConfig config, const Taxonomy& taxonomy);
  ~RemoteBackend() override;

  std::string id() const override { return "remote:" + config_.model; }
  std::string complete(const BackendRequest& request) override;

  const RemoteConfig& config() const { return config_; }

 private:
  struct Target;

  RemoteConfig config_;
  const Taxonomy& taxonomy_;
  std::unique_ptr<Target> target_;
  std::counting_semaphore<1024> in_flight_;
};

// Answers from `primary`, switching to `fallback` for any request whose
// primary call throws BackendError.
class FallbackBackend : public Backend {
 public:
  FallbackBackend(Backend& primary, Backend& fallback)
      : primary_(primary), fallback_(fallback) {}

  std::string id() const override { return primary_.id() + "|" + fallback_.id(); }
  std::string complete(const BackendRequest& request) override;

 private:
  Backend& primary_;
  Backend& fallback_;
};

}  // namespace ppaudit
