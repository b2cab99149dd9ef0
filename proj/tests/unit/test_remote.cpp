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

#include <atomic>
#include <cstdlib>
#include <mutex>

#include "fake_backend.hpp"
#include "local_server.hpp"
#include "ppaudit/errors.hpp"
#include "ppaudit/remote_backend.hpp"
#include "ppaudit/rule_backend.hpp"

namespace ppaudit {
namespace {

const Taxonomy& tax() { return Taxonomy::bundled(); }

std::string completion(const std::string& content) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}
      .dump();
}

RemoteConfig config_for(const testing::LocalServer& srv, const std::string& path) {
  RemoteConfig c;
  c.endpoint = srv.url(path);
  c.api_key_env = "PPAUDIT_TEST_KEY";
  c.model = "test-model";
  c.timeout = std::chrono::seconds(5);
  c.max_retries = 2;
  c.backoff = std::chrono::milliseconds(1);
  return c;
}

TEST(RemoteBody, ShapeAndBudget) {
  RemoteConfig c;
  c.model = "m1";
  c.token_budgets["decode"] = 900;
  BackendRequest req{Task::kDecode, {{"text", "We collect email."}}, {}, 1};
  const auto body = build_request_body(req, c, tax());
  EXPECT_EQ(body.at("model"), "m1");
  EXPECT_EQ(body.at("temperature"), 0);
  EXPECT_EQ(body.at("max_tokens"), 900);
  ASSERT_TRUE(body.at("messages").is_array());
  const std::string all = body.at("messages").dump();
  EXPECT_NE(all.find("We collect email."), std::string::npos);
}

TEST(RemoteBody, PromptsCarryVocabulary) {
  BackendRequest req{Task::kMapItems, {{"items", {"GPS", "etc."}}}, {}, 1};
  const std::string msgs = build_messages(req, tax()).dump();
  EXPECT_NE(msgs.find("device identifier"), std::string::npos);
  EXPECT_NE(msgs.find("N/A"), std::string::npos);
  BackendRequest cls{Task::kClassify, {{"text", "x"}}, {}, 1};
  EXPECT_NE(build_messages(cls, tax()).dump().find("Do Not Track"), std::string::npos);
}

TEST(RemoteBody, ExtractCompletion) {
  EXPECT_EQ(extract_completion(completion("hi")), "hi");
  EXPECT_THROW(extract_completion("{\"choices\": []}"), BackendError);
  EXPECT_THROW(extract_completion("<html>"), BackendError);
}

TEST(RemoteConfigJson, RoundTrip) {
  RemoteConfig c;
  c.endpoint = "https://api.example/v1/chat/completions";
  c.token_budgets["classify"] = 64;
  nlohmann::json j = c;
  EXPECT_EQ(nlohmann::json(j.get<RemoteConfig>()), j);
  EXPECT_EQ(j.dump().find("sk-"), std::string::npos);
}

TEST(Remote, SendsHeadersAndParses) {
  testing::LocalServer srv;
  std::mutex m;
  std::string auth, corr, model;
  srv.server().Post("/v1/chat", [&](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(m);
    auth = req.get_header_value("Authorization");
    corr = req.get_header_value("X-Correlation-Id");
    model = nlohmann::json::parse(req.body).at("model");
    res.set_content(completion("[\"Intro\"]"), "application/json");
  });
  srv.start();
  ::setenv("PPAUDIT_TEST_KEY", "secret-123", 1);
  RemoteBackend rb(config_for(srv, "/v1/chat"), tax());
  BackendRequest req{Task::kHeadings, {{"text", "Intro\nbody"}}, {}, 42};
  const auto resp = invoke(rb, req, tax());
  ::unsetenv("PPAUDIT_TEST_KEY");
  ASSERT_TRUE(resp.parsed);
  EXPECT_EQ(*resp.parsed, nlohmann::json({"Intro"}));
  EXPECT_EQ(auth, "Bearer secret-123");
  EXPECT_EQ(corr, "42");
  EXPECT_EQ(model, "test-model");
  EXPECT_EQ(rb.id(), "remote:test-model");
}

TEST(Remote, RetriesTransientStatus) {
  testing::LocalServer srv;
  std::atomic<int> hits{0};
  srv.server().Post("/c", [&](const httplib::Request&, httplib::Response& res) {
    if (hits++ < 2) {
      res.status = hits == 1 ? 503 : 429;
      return;
    }
    res.set_content(completion("location"), "application/json");
  });
  srv.start();
  RemoteBackend rb(config_for(srv, "/c"), tax());
  BackendRequest req{Task::kVerifyItem, {{"item", "GPS"}}, {}, 1};
  EXPECT_EQ(rb.complete(req), "location");
  EXPECT_EQ(hits.load(), 3);
}

TEST(Remote, GivesUpAfterRetries) {
  testing::LocalServer srv;
  std::atomic<int> hits{0};
  srv.server().Post("/c", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 500;
  });
  srv.start();
  RemoteBackend rb(config_for(srv, "/c"), tax());
  BackendRequest req{Task::kVerifyItem, {{"item", "GPS"}}, {}, 1};
  EXPECT_THROW(rb.complete(req), BackendError);
  EXPECT_EQ(hits.load(), 3);
}

TEST(Remote, ClientErrorNotRetried) {
  testing::LocalServer srv;
  std::atomic<int> hits{0};
  srv.server().Post("/c", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 400;
  });
  srv.start();
  RemoteBackend rb(config_for(srv, "/c"), tax());
  BackendRequest req{Task::kVerifyItem, {{"item", "GPS"}}, {}, 1};
  EXPECT_THROW(rb.complete(req), BackendError);
  EXPECT_EQ(hits.load(), 1);
}

TEST(Remote, UnreachableEndpoint) {
  RemoteConfig c;
  c.endpoint = "http://127.0.0.1:9/v1/chat/completions";
  c.timeout = std::chrono::seconds(1);
  c.max_retries = 1;
  c.backoff = std::chrono::milliseconds(1);
  RemoteBackend rb(c, tax());
  BackendRequest req{Task::kClassify, {{"text", "x"}}, {}, 1};
  EXPECT_THROW(rb.complete(req), BackendError);
}

TEST(Remote, RejectsBadEndpoint) {
  RemoteConfig c;
  c.endpoint = "not-a-url";
  EXPECT_THROW(RemoteBackend(c, tax()), InputError);
}

TEST(Fallback, SwitchesOnBackendError) {
  testing::DeadBackend dead;
  RuleBackend rule(tax(), RuleLexicon::bundled());
  FallbackBackend fb(dead, rule);
  BackendRequest req{Task::kVerifyItem, {{"item", "GPS coordinates"}}, {}, 1};
  EXPECT_EQ(fb.complete(req), "location");
  EXPECT_EQ(fb.id(), "dead|rule");
}

}  // namespace
}  // namespace ppaudit
