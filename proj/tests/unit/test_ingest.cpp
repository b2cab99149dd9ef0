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

#include "local_server.hpp"
#include "ppaudit/ingest.hpp"
#include "test_support.hpp"

namespace ppaudit {
namespace {

constexpr const char* kEnglish =
    "We respect your privacy and we want you to understand how we use the information "
    "that you share with us when you play our games. This notice explains what we "
    "gather, why we need it, and the choices that are available to you at any time.";

constexpr const char* kPortuguese =
    "Nós respeitamos a sua privacidade e queremos que você entenda como usamos as "
    "informações que você compartilha conosco quando joga os nossos jogos. Este aviso "
    "explica o que coletamos, por que precisamos disso e quais são as suas opções.";

std::string html_page(const std::string& body) {
  return "<html><head><title>t</title></head><body>" + body + "</body></html>";
}

TEST(HtmlToText, BlockBoundaries) {
  EXPECT_EQ(html_to_text("<p>We collect data.</p><p>We share data.</p>"),
            "We collect data.\nWe share data.");
}

TEST(HtmlToText, DropsScriptStyleNav) {
  EXPECT_EQ(html_to_text("<script>x()</script><p>Hi</p>"), "Hi");
  EXPECT_EQ(html_to_text("<style>p{}</style><nav><a>Home</a></nav><div>Body</div>"), "Body");
}

TEST(HtmlToText, NestedStructureGolden) {
  const std::string html =
      "<div><h2>Your Choices</h2><div>You can <b>opt out</b> of:<ul><li>email "
      "offers</li><li>push <i>alerts</i></li></ul></div><br><p></p><p>Thanks.</p></div>";
  EXPECT_EQ(html_to_text(html),
            "Your Choices\nYou can opt out of:\nemail offers\npush alerts\n\nThanks.");
}

TEST(HtmlToText, IdempotentOnOwnOutput) {
  for (const auto& name : {"acme.html", "farm.html", "budget.html", "photo.html", "a7.html"}) {
    const std::string once =
        html_to_text(testing::slurp(testing::fixture(std::string("corpus/policies/") + name)));
    EXPECT_EQ(html_to_text(once), once) << name;
  }
}

TEST(Language, EnglishAndPortuguese) {
  const auto en = guess_language(kEnglish);
  EXPECT_EQ(en.code, "en");
  EXPECT_GE(en.confidence, 0.5);
  const auto pt = guess_language(kPortuguese);
  EXPECT_EQ(pt.code, "pt");
}

TEST(Language, ShortTextIsUndetermined) {
  const auto g = guess_language("twenty chars exactly");
  EXPECT_EQ(g.code, "und");
  EXPECT_EQ(g.confidence, 0.0);
}

TEST(PolicyDocument, IdIgnoresCaseAndWhitespace) {
  const auto a = make_policy_document("a", "text/html", html_page("<p>We  Collect</p>"));
  const auto b = make_policy_document("b", "text/html", html_page("<p>we collect</p>"));
  EXPECT_EQ(a.policy_id, b.policy_id);
  EXPECT_EQ(a.text_bytes, a.plain_text.size());
  EXPECT_EQ(a.policy_id.size(), 64u);
}

TEST(Admission, ElevenKilobyteEnglishAdmitted) {
  std::string body;
  while (body.size() < 11 * 1024) body += std::string("<p>") + kEnglish + "</p>";
  const auto doc = make_policy_document("u", "text/html", html_page(body));
  const auto d = admit_policy(doc);
  EXPECT_TRUE(d.admitted);
  EXPECT_TRUE(d.reasons.empty());
}

TEST(Admission, OversizeRejected) {
  std::string body;
  while (body.size() < 60 * 1024) body += std::string("<p>") + kEnglish + "</p>";
  const auto doc = make_policy_document("u", "text/html", html_page(body));
  const auto d = admit_policy(doc);
  EXPECT_FALSE(d.admitted);
  EXPECT_TRUE(d.has(AdmissionReason::kOversize));
}

TEST(Admission, PortugueseRejected) {
  const auto doc = make_policy_document("u", "text/html", html_page(std::string("<p>") + kPortuguese));
  const auto d = admit_policy(doc);
  EXPECT_FALSE(d.admitted);
  EXPECT_EQ(d.reasons, std::vector<AdmissionReason>{AdmissionReason::kNonEnglish});
}

TEST(Admission, ReasonsSortedAndComplete) {
  const auto doc = make_policy_document("u", "text/plain", "   \n ");
  const auto d = admit_policy(doc);
  EXPECT_FALSE(d.admitted);
  EXPECT_TRUE(std::is_sorted(d.reasons.begin(), d.reasons.end()));
  EXPECT_TRUE(d.has(AdmissionReason::kEmpty));
  EXPECT_TRUE(d.has(AdmissionReason::kNonHtml));
  EXPECT_EQ(admit_policy(doc).reasons, d.reasons);
  for (auto r : d.reasons) EXPECT_EQ(admission_reason_from_string(to_string(r)), r);
}

TEST(Admission, AdmittedIffNoReasons) {
  for (const auto& name : {"acme.html", "hello.html", "juego.html", "tiny.html"}) {
    const auto doc = make_policy_document(
        name, "text/html",
        testing::slurp(testing::fixture(std::string("corpus/policies/") + name)));
    const auto d = admit_policy(doc);
    EXPECT_EQ(d.admitted, d.reasons.empty()) << name;
  }
}

TEST(ContentType, FromPath) {
  EXPECT_TRUE(is_html_content_type(content_type_for_path("a/b.HTML")));
  EXPECT_TRUE(is_html_content_type("text/html; charset=utf-8"));
  EXPECT_TRUE(is_html_content_type("application/xhtml+xml"));
  EXPECT_FALSE(is_html_content_type(content_type_for_path("x.pdf")));
  EXPECT_FALSE(is_html_content_type(content_type_for_path("x.txt")));
}

class FetchTest : public ::testing::Test {
 protected:
  void SetUp() override {
    auto& s = srv.server();
    s.Get("/ok", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("<p>hello</p>", "text/html");
    });
    s.Get("/moved", [this](const httplib::Request&, httplib::Response& res) {
      res.set_redirect(srv.url("/ok"), 301);
    });
    s.Get("/relative", [](const httplib::Request&, httplib::Response& res) {
      res.set_redirect("/moved", 302);
    });
    s.Get("/loop", [](const httplib::Request&, httplib::Response& res) {
      res.set_redirect("/loop", 302);
    });
    s.Get("/missing", [](const httplib::Request&, httplib::Response& res) {
      res.status = 404;
      res.set_content("nope", "text/plain");
    });
    s.Get("/big", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(std::string(4096, 'x'), "text/html");
    });
    s.Get("/slow", [](const httplib::Request&, httplib::Response& res) {
      std::this_thread::sleep_for(std::chrono::milliseconds(1500));
      res.set_content("late", "text/html");
    });
    srv.start();
  }

  testing::LocalServer srv;
};

TEST_F(FetchTest, DirectSuccess) {
  const auto r = fetch_policy(srv.url("/ok"), {});
  ASSERT_TRUE(r.ok()) << r.failure_detail;
  ASSERT_EQ(r.redirect_chain.size(), 1u);
  EXPECT_EQ(r.redirect_chain[0], r.requested_url);
  EXPECT_EQ(r.final_status, 200);
  EXPECT_EQ(r.body, "<p>hello</p>");
  EXPECT_TRUE(is_html_content_type(r.content_type));
  EXPECT_FALSE(r.redirected());
}

TEST_F(FetchTest, RedirectRecorded) {
  const auto r = fetch_policy(srv.url("/moved"), {});
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.redirect_chain.size(), 2u);
  EXPECT_EQ(r.redirect_chain[0], srv.url("/moved"));
  EXPECT_EQ(r.redirect_chain[1], srv.url("/ok"));
  EXPECT_TRUE(r.redirected());

  const auto rel = fetch_policy(srv.url("/relative"), {});
  ASSERT_TRUE(rel.ok());
  EXPECT_EQ(rel.redirect_chain.size(), 3u);
}

TEST_F(FetchTest, RedirectLoopStopsAtLimit) {
  FetchLimits limits;
  limits.max_redirects = 4;
  const auto r = fetch_policy(srv.url("/loop"), limits);
  EXPECT_EQ(r.failure, FetchFailure::kRedirectLimit);
  EXPECT_TRUE(r.body.empty());
  EXPECT_LE(r.redirect_chain.size(), 5u);
  EXPECT_EQ(r.redirect_chain[0], r.requested_url);
}

TEST_F(FetchTest, NotFoundHasNoBody) {
  const auto r = fetch_policy(srv.url("/missing"), {});
  EXPECT_EQ(r.failure, FetchFailure::kHttpStatus);
  EXPECT_EQ(r.final_status, 404);
  EXPECT_TRUE(r.body.empty());
  const auto doc = make_policy_document(r);
  EXPECT_TRUE(doc.fetch_failed);
  EXPECT_TRUE(admit_policy(doc).has(AdmissionReason::kFetchFailed));
}

TEST_F(FetchTest, OversizeFails) {
  FetchLimits limits;
  limits.max_bytes = 1000;
  const auto r = fetch_policy(srv.url("/big"), limits);
  EXPECT_EQ(r.failure, FetchFailure::kOversize);
  EXPECT_TRUE(r.body.empty());
}

TEST_F(FetchTest, TimeoutFails) {
  FetchLimits limits;
  limits.timeout = std::chrono::milliseconds(300);
  const auto r = fetch_policy(srv.url("/slow"), limits);
  EXPECT_EQ(r.failure, FetchFailure::kTimeout) << r.failure_detail;
  EXPECT_TRUE(r.body.empty());
}

TEST(Fetch, BadUrlAndRefusedConnection) {
  EXPECT_EQ(fetch_policy("ftp://example.com/x", {}).failure, FetchFailure::kBadUrl);
  EXPECT_EQ(fetch_policy("not a url", {}).failure, FetchFailure::kBadUrl);
  FetchLimits limits;
  limits.timeout = std::chrono::milliseconds(500);
  const auto r = fetch_policy("http://127.0.0.1:9/", limits);
  EXPECT_EQ(r.failure, FetchFailure::kNetwork);
  EXPECT_EQ(r.redirect_chain.size(), 1u);
}

TEST(FetchRecordJson, RoundTrip) {
  FetchRecord r;
  r.requested_url = "https://a.example/p";
  r.redirect_chain = {"https://a.example/p", "https://b.example/p"};
  r.final_status = 200;
  r.content_type = "text/html";
  r.body = "<p>x</p>";
  r.fetched_at = "2026-01-02T03:04:05Z";
  nlohmann::json j = r;
  // The body is stored next to the record, not inside it.
  EXPECT_FALSE(j.contains("body"));
  EXPECT_EQ(j.at("body_bytes"), 8);
  const FetchRecord back = j.get<FetchRecord>();
  EXPECT_EQ(back.redirect_chain, r.redirect_chain);
  EXPECT_EQ(back.final_status, 200);
  EXPECT_EQ(back.fetched_at, r.fetched_at);
  EXPECT_EQ(back.failure, FetchFailure::kNone);
}

}  // namespace
}  // namespace ppaudit
