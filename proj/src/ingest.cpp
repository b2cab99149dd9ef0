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

#include "ppaudit/ingest.hpp"

#include <httplib.h>

#include <algorithm>
#include <array>
#include <ctime>
#include <regex>
#include <set>
#include <unordered_set>

#include "ppaudit/html.hpp"
#include "ppaudit/text.hpp"

namespace ppaudit {

std::string_view to_string(FetchFailure f) {
  switch (f) {
    case FetchFailure::kNone: return "none";
    case FetchFailure::kNetwork: return "network";
    case FetchFailure::kTimeout: return "timeout";
    case FetchFailure::kRedirectLimit: return "redirect_limit";
    case FetchFailure::kOversize: return "oversize";
    case FetchFailure::kHttpStatus: return "http_status";
    case FetchFailure::kBadUrl: return "bad_url";
  }
  return "unknown";
}

namespace {

FetchFailure fetch_failure_from_string(std::string_view s) {
  for (auto f : {FetchFailure::kNone, FetchFailure::kNetwork,
                 FetchFailure::kTimeout, FetchFailure::kRedirectLimit,
                 FetchFailure::kOversize, FetchFailure::kHttpStatus,
                 FetchFailure::kBadUrl}) {
    if (to_string(f) == s) return f;
  }
  return FetchFailure::kNetwork;
}

std::string utc_now_iso8601() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

struct ParsedUrl {
  std::string scheme;
  std::string host_port;  // scheme://host[:port], as httplib::Client wants it
  std::string path;       // path + query, never empty
};

std::optional<ParsedUrl> parse_url(const std::string& url) {
  static const std::regex kUrl(R"(^(https?)://([^/?#]+)([^#]*)(#.*)?$)",
                               std::regex::icase);
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) return std::nullopt;
  ParsedUrl out;
  out.scheme = m[1].str();
  std::transform(out.scheme.begin(), out.scheme.end(), out.scheme.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  out.host_port = out.scheme + "://" + m[2].str();
  out.path = m[3].str();
  if (out.path.empty() || out.path[0] != '/') out.path = "/" + out.path;
  return out;
}

std::string resolve_location(const std::string& base, const std::string& location) {
  if (location.starts_with("http://") || location.starts_with("https://")) {
    return location;
  }
  auto parsed = parse_url(base);
  if (!parsed) return location;
  if (location.starts_with("//")) return parsed->scheme + ":" + location;
  if (location.starts_with("/")) return parsed->host_port + location;
  std::string dir = parsed->path.substr(0, parsed->path.find('?'));
  dir = dir.substr(0, dir.rfind('/') + 1);
  return parsed->host_port + dir + location;
}

}  // namespace

void to_json(nlohmann::json& j, const FetchRecord& r) {
  j = nlohmann::json{{"requested_url", r.requested_url},
                     {"redirect_chain", r.redirect_chain},
                     {"final_status", r.final_status},
                     {"content_type", r.content_type},
                     {"body_bytes", r.body.size()},
                     {"fetched_at", r.fetched_at},
                     {"failure", to_string(r.failure)},
                     {"failure_detail", r.failure_detail}};
}

void from_json(const nlohmann::json& j, FetchRecord& r) {
  r.requested_url = j.at("requested_url").get<std::string>();
  r.redirect_chain = j.at("redirect_chain").get<std::vector<std::string>>();
  r.final_status = j.value("final_status", 0);
  r.content_type = j.value("content_type", std::string());
  r.fetched_at = j.value("fetched_at", std::string());
  r.failure = fetch_failure_from_string(j.value("failure", std::string("none")));
  r.failure_detail = j.value("failure_detail", std::string());
  if (r.redirect_chain.empty()) r.redirect_chain.push_back(r.requested_url);
}

FetchRecord fetch_policy(const std::string& url, const FetchLimits& limits) {
  FetchRecord record;
  record.requested_url = url;
  record.redirect_chain.push_back(url);
  record.fetched_at = utc_now_iso8601();

  std::string current = url;
  for (int hop = 0;; ++hop) {
    auto parsed = parse_url(current);
    if (!parsed) {
      record.failure = FetchFailure::kBadUrl;
      record.failure_detail = "not an absolute http(s) URL: " + current;
      return record;
    }
    httplib::Client client(parsed->host_port);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(limits.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
        limits.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    client.set_follow_location(false);

    std::string body;
    bool oversize = false;
    int status = 0;
    httplib::Headers response_headers;
    auto result = client.Get(
        parsed->path, httplib::Headers{{"User-Agent", "ppaudit/0.3"}},
        [&](const httplib::Response& res) {
          status = res.status;
          response_headers = res.headers;
          return true;
        },
        [&](const char* data, std::size_t len) {
          if (body.size() + len > limits.max_bytes) {
            oversize = true;
            return false;
          }
          body.append(data, len);
          return true;
        });

    if (oversize) {
      record.final_status = status;
      record.failure = FetchFailure::kOversize;
      record.failure_detail = "body exceeds " + std::to_string(limits.max_bytes) + " bytes";
      return record;
    }
    if (!result) {
      const auto err = result.error();
      record.failure = err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout
                           ? FetchFailure::kTimeout
                           : FetchFailure::kNetwork;
      record.failure_detail = httplib::to_string(err);
      return record;
    }
    status = result->status;
    record.final_status = status;
    auto header = [&](const char* name) -> std::string {
      auto it = result->headers.find(name);
      return it == result->headers.end() ? std::string() : it->second;
    };
    record.content_type = header("Content-Type");

    if (status >= 300 && status < 400 && !header("Location").empty()) {
      if (hop >= limits.max_redirects) {
        record.failure = FetchFailure::kRedirectLimit;
        record.failure_detail =
            "more than " + std::to_string(limits.max_redirects) + " redirects";
        return record;
      }
      current = resolve_location(current, header("Location"));
      record.redirect_chain.push_back(current);
      continue;
    }
    if (status < 200 || status >= 300) {
      record.failure = FetchFailure::kHttpStatus;
      record.failure_detail = "HTTP " + std::to_string(status);
      return record;
    }
    record.body = std::move(body);
    return record;
  }
}

// ---------------------------------------------------------------------------
// HTML to text

namespace {

bool is_skipped_element(const html::Node& n) {
  static const std::unordered_set<std::string_view> kSkip = {
      "script", "style", "noscript", "template", "nav",    "head",
      "iframe", "object", "svg",     "canvas",   "select", "button"};
  if (kSkip.contains(n.tag)) return true;
  for (const auto& [k, v] : n.attributes) {
    if (k == "hidden") return true;
    if (k == "role" && v == "navigation") return true;
    if (k == "aria-hidden" && v == "true") return true;
  }
  return false;
}

class TextSink {
 public:
  void soft_break() {
    if (line_has_content_) {
      out_.push_back('\n');
      line_has_content_ = false;
    }
    pending_space_ = false;
  }

  void hard_break() {
    out_.push_back('\n');
    line_has_content_ = false;
    pending_space_ = false;
  }

  void inline_separator() {
    if (line_has_content_) pending_space_ = true;
  }

  void append(std::string_view s, bool preformatted) {
    for (std::size_t pos = 0; pos < s.size();) {
      const std::size_t start = pos;
      const char32_t cp = text::next_code_point(s, pos);
      if (preformatted && cp == '\n') {
        hard_break();
        continue;
      }
      if (text::is_space(cp)) {
        if (line_has_content_) pending_space_ = true;
        continue;
      }
      if (pending_space_) out_.push_back(' ');
      pending_space_ = false;
      out_.append(s.substr(start, pos - start));
      line_has_content_ = true;
    }
  }

  std::string take() { return std::move(out_); }

 private:
  std::string out_;
  bool line_has_content_ = false;
  bool pending_space_ = false;
};

void walk(const html::Node& node, TextSink& sink, bool preformatted) {
  for (const auto& child : node.children) {
    switch (child->kind) {
      case html::Node::Kind::kText:
        sink.append(child->text, preformatted);
        break;
      case html::Node::Kind::kComment:
      case html::Node::Kind::kDocument:
        break;
      case html::Node::Kind::kElement: {
        if (is_skipped_element(*child)) break;
        if (child->tag == "br") {
          sink.hard_break();
          break;
        }
        const bool block = html::is_block_element(child->tag);
        const bool cell = child->tag == "td" || child->tag == "th";
        if (block) sink.soft_break();
        if (cell) sink.inline_separator();
        walk(*child, sink, preformatted || child->tag == "pre");
        if (block) sink.soft_break();
        if (cell) sink.inline_separator();
        break;
      }
    }
  }
}

// Trim every line, collapse inner whitespace, squeeze blank-line runs to one
// and drop leading/trailing blank lines.
std::string normalize_lines(std::string_view s) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t nl = s.find('\n', start);
    const std::size_t stop = nl == std::string_view::npos ? s.size() : nl;
    std::string line = text::collapse_whitespace(s.substr(start, stop - start));
    if (!(line.empty() && (lines.empty() || lines.back().empty()))) {
      lines.push_back(std::move(line));
    }
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return text::join(lines, "\n");
}

}  // namespace

std::string html_to_text(std::string_view html) {
  if (!html::contains_markup(html)) return normalize_lines(html);
  const auto doc = html::Document::parse(html);
  TextSink sink;
  walk(doc.root(), sink, false);
  return normalize_lines(sink.take());
}

// ---------------------------------------------------------------------------
// Language guess

namespace {

struct Profile {
  std::string_view code;
  std::unordered_set<std::string_view> stopwords;
};

const std::vector<Profile>& latin_profiles() {
  static const std::vector<Profile> kProfiles = {
      {"en",
       {"the", "and", "of", "to", "is", "that", "for", "it", "with", "as",
        "was", "on", "be", "by", "this", "are", "or", "from", "at", "which",
        "we", "you", "your", "our", "will", "have", "may", "not", "any", "can",
        "if", "us", "these", "such", "when", "also", "been", "has", "their",
        "they", "its", "about", "other", "more", "an", "in"}},
      {"pt",
       {"não", "uma", "os", "do", "da", "em", "com", "ao", "dos", "das",
        "seu", "sua", "ou", "você", "são", "pelo", "pela", "também", "isso",
        "nas", "nos", "mas", "mais", "como", "quando", "pode", "seus", "suas",
        "às", "é", "o", "a", "que", "de", "para", "por", "se", "um", "no",
        "na", "serão", "seus"}},
      {"es",
       {"el", "la", "los", "las", "y", "en", "del", "con", "una", "su", "sus",
        "al", "lo", "más", "pero", "porque", "esta", "este", "muy", "sin",
        "sobre", "también", "hasta", "hay", "donde", "usted", "nosotros",
        "ser", "es", "que", "de", "para", "por", "se", "un", "no", "o"}},
      {"de",
       {"der", "die", "das", "und", "ist", "nicht", "ein", "eine", "zu", "den",
        "mit", "von", "sich", "des", "auf", "für", "im", "dem", "werden",
        "wir", "sie", "ihre", "bei", "oder", "als", "auch", "wenn", "nach",
        "diese", "unsere", "ihr", "wird", "können", "zur", "zum"}},
      {"fr",
       {"le", "la", "les", "de", "des", "du", "et", "en", "un", "une", "est",
        "que", "qui", "dans", "pour", "pas", "sur", "au", "aux", "avec", "ce",
        "ces", "il", "nous", "vous", "vos", "notre", "nos", "sont", "ou",
        "par", "être", "leur", "plus", "votre"}},
  };
  return kProfiles;
}

}  // namespace

LanguageGuess guess_language(std::string_view input) {
  if (text::code_point_count(input) < 40) return {};

  std::size_t letters = 0, kana = 0, hangul = 0, han = 0;
  for (std::size_t pos = 0; pos < input.size();) {
    const char32_t cp = text::next_code_point(input, pos);
    if (text::is_space(cp) || (cp < 0x80 && !std::isalnum(static_cast<int>(cp)))) {
      continue;
    }
    ++letters;
    if (cp >= 0x3040 && cp <= 0x30FF) ++kana;
    else if ((cp >= 0xAC00 && cp <= 0xD7AF) || (cp >= 0x1100 && cp <= 0x11FF) ||
             (cp >= 0x3130 && cp <= 0x318F)) ++hangul;
    else if (cp >= 0x4E00 && cp <= 0x9FFF) ++han;
  }

  std::vector<std::pair<std::string_view, double>> scores;
  const auto tokens = text::word_tokens(input);
  for (const auto& profile : latin_profiles()) {
    std::size_t hits = 0;
    for (const auto& t : tokens) {
      if (profile.stopwords.contains(t)) ++hits;
    }
    scores.emplace_back(profile.code,
                        tokens.empty() ? 0.0 : double(hits) / double(tokens.size()));
  }
  if (letters > 0) {
    const double l = double(letters);
    scores.emplace_back("ja", kana > 0 ? double(kana + han) / l : 0.0);
    scores.emplace_back("ko", double(hangul) / l);
    scores.emplace_back("zh", kana == 0 && hangul == 0 ? double(han) / l
                                                      : 0.3 * double(han) / l);
  }

  std::stable_sort(scores.begin(), scores.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const double top = scores[0].second;
  if (top <= 0.0) return {};
  const double second = scores.size() > 1 ? scores[1].second : 0.0;
  return {std::string(scores[0].first), std::clamp((top - second) / top, 0.0, 1.0)};
}

// ---------------------------------------------------------------------------
// Documents and admission

std::string policy_id_for_text(std::string_view plain_text) {
  return text::sha256_hex(text::normalize_for_hash(plain_text));
}

PolicyDocument make_policy_document(std::string source_url,
                                    std::string content_type,
                                    std::string raw_html) {
  PolicyDocument doc;
  doc.source_url = std::move(source_url);
  doc.content_type = std::move(content_type);
  doc.raw_html = std::move(raw_html);
  doc.plain_text = html_to_text(doc.raw_html);
  doc.text_bytes = doc.plain_text.size();
  doc.policy_id = policy_id_for_text(doc.plain_text);
  doc.language = guess_language(doc.plain_text);
  return doc;
}

PolicyDocument make_policy_document(const FetchRecord& record) {
  if (!record.ok()) {
    PolicyDocument doc = make_policy_document(record.requested_url, record.content_type, "");
    doc.fetch_failed = true;
    return doc;
  }
  return make_policy_document(record.redirect_chain.back(), record.content_type,
                              record.body);
}

std::string_view to_string(AdmissionReason r) {
  switch (r) {
    case AdmissionReason::kEmpty: return "empty";
    case AdmissionReason::kFetchFailed: return "fetch_failed";
    case AdmissionReason::kNonEnglish: return "non_english";
    case AdmissionReason::kNonHtml: return "non_html";
    case AdmissionReason::kOversize: return "oversize";
  }
  return "unknown";
}

std::optional<AdmissionReason> admission_reason_from_string(std::string_view s) {
  for (auto r : {AdmissionReason::kEmpty, AdmissionReason::kFetchFailed,
                 AdmissionReason::kNonEnglish, AdmissionReason::kNonHtml,
                 AdmissionReason::kOversize}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

bool AdmissionDecision::has(AdmissionReason r) const {
  return std::find(reasons.begin(), reasons.end(), r) != reasons.end();
}

bool is_html_content_type(std::string_view content_type) {
  const std::string folded = text::case_fold(text::trim(content_type));
  return folded.starts_with("text/html") ||
         folded.starts_with("application/xhtml+xml");
}

std::string content_type_for_path(std::string_view path) {
  const auto dot = path.rfind('.');
  const std::string ext =
      dot == std::string_view::npos ? std::string() : text::case_fold(path.substr(dot + 1));
  if (ext == "html" || ext == "htm" || ext == "xhtml" || ext == "php" ||
      ext == "asp" || ext == "aspx") {
    return "text/html";
  }
  if (ext == "pdf") return "application/pdf";
  if (ext == "txt") return "text/plain";
  return "application/octet-stream";
}

AdmissionDecision admit_policy(const PolicyDocument& doc,
                               const AdmissionPolicy& policy) {
  AdmissionDecision decision;
  auto& reasons = decision.reasons;
  if (doc.fetch_failed) {
    reasons.push_back(AdmissionReason::kFetchFailed);
  } else {
    if (!is_html_content_type(doc.content_type)) {
      reasons.push_back(AdmissionReason::kNonHtml);
    }
    const bool empty = text::trim(doc.plain_text).empty();
    if (empty) reasons.push_back(AdmissionReason::kEmpty);
    if (doc.text_bytes > policy.max_text_bytes) {
      reasons.push_back(AdmissionReason::kOversize);
    }
    if (!empty && !(doc.language.code == "en" &&
                    doc.language.confidence >= policy.min_english_confidence)) {
      reasons.push_back(AdmissionReason::kNonEnglish);
    }
  }
  std::sort(reasons.begin(), reasons.end());
  decision.admitted = reasons.empty();
  return decision;
}

}  // namespace ppaudit
