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

#include "ppaudit/rule_backend.hpp"

#include <algorithm>
#include <cctype>
#include <array>
#include <fstream>
#include <regex>
#include <set>

#include "bundled_data.hpp"
#include "ppaudit/errors.hpp"
#include "ppaudit/text.hpp"

namespace ppaudit {

namespace {

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
};

// Sentence spans without their terminal punctuation. Breaks at newlines and
// at . ! ? followed by whitespace or end of input.
std::vector<Span> sentence_spans(std::string_view s) {
  std::vector<Span> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t stop) {
    std::size_t b = start;
    std::size_t e = stop;
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    if (e > b) out.push_back({b, e});
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '\n') {
      emit(i);
      start = i + 1;
    } else if ((c == '.' || c == '!' || c == '?') &&
               (i + 1 == s.size() || s[i + 1] == ' ' || s[i + 1] == '\n' ||
                s[i + 1] == '\t' || s[i + 1] == '\r')) {
      emit(i);
      start = i + 1;
    }
  }
  emit(s.size());
  return out;
}

int word_count(std::string_view phrase) {
  return static_cast<int>(text::word_tokens(phrase).size());
}

std::size_t find_first_of_markers(std::string_view folded, std::size_t from,
                                  std::size_t limit,
                                  const std::vector<std::string>& markers,
                                  std::size_t* marker_len = nullptr,
                                  std::string* which = nullptr) {
  std::size_t best = std::string_view::npos;
  for (const auto& m : markers) {
    const std::size_t p = folded.find(m, from);
    if (p == std::string_view::npos || p >= limit) continue;
    if (best == std::string_view::npos || p < best ||
        (p == best && marker_len && m.size() > *marker_len)) {
      best = p;
      if (marker_len) *marker_len = m.size();
      if (which) *which = m;
    }
  }
  return best;
}

// Word ending right before `pos`, not reaching back past `floor`.
std::string_view previous_word(std::string_view folded, std::size_t pos, std::size_t floor) {
  std::size_t end = pos;
  while (end > floor && !std::isalnum(static_cast<unsigned char>(folded[end - 1])) &&
         folded[end - 1] != '\'') {
    --end;
  }
  std::size_t begin = end;
  while (begin > floor && (std::isalnum(static_cast<unsigned char>(folded[begin - 1])) ||
                           folded[begin - 1] == '\'')) {
    --begin;
  }
  return folded.substr(begin, end - begin);
}

// Words that may precede an active data verb. Anything else (a determiner,
// a noun, "are") means the verb form is a noun or a passive.
bool opens_verb_phrase(std::string_view word) {
  static const std::set<std::string, std::less<>> kOpeners = {
      "we",       "i",         "you",      "they",      "it",        "us",
      "may",      "might",     "will",     "would",     "can",       "could",
      "shall",    "should",    "must",     "also",      "automatically", "only",
      "to",       "and",       "or",       "then",      "further",   "generally",
      "sometimes", "occasionally", "typically", "directly", "partners", "providers",
      "networks", "services",  "app",      "apps",      "game",      "games",
      "company",  "sdk",       "sdks",     "parties",   "affiliates", "advertisers",
      "we'll",    "we've",     "actively", "regularly", "securely",  "routinely"};
  return kOpeners.contains(word);
}

bool is_negation(std::string_view word) {
  return word == "not" || word == "never" || word == "don't" || word == "doesn't" ||
         word == "won't" || word == "cannot" || word == "neither" || word == "nor";
}

std::string_view trim_clause(std::string_view s) {
  s = text::trim(s);
  while (!s.empty() && (s.back() == ',' || s.back() == ';' || s.back() == ':' ||
                        s.back() == ' ')) {
    s.remove_suffix(1);
  }
  while (!s.empty() && (s.front() == ',' || s.front() == ';' || s.front() == ':' ||
                        s.front() == ' ')) {
    s.remove_prefix(1);
  }
  return s;
}

std::string strip_determiners(std::string_view s) {
  static const std::set<std::string, std::less<>> kDeterminers = {
      "your", "our", "the", "a", "an", "some", "certain", "any", "all",
      "their", "his", "her", "its", "my", "additional", "following",
      "such", "more", "other"};
  s = trim_clause(s);
  while (true) {
    const std::size_t sp = s.find(' ');
    if (sp == std::string_view::npos) break;
    const std::string head = text::case_fold(s.substr(0, sp));
    if (!kDeterminers.contains(head)) break;
    s = text::trim(s.substr(sp + 1));
  }
  return std::string(s);
}

bool is_pronoun_phrase(std::string_view s) {
  static const std::set<std::string, std::less<>> kPronouns = {
      "it", "them", "this", "that", "these", "those", "this information",
      "such information", "that information", "these data", "this data",
      "the same", "you", "us", "we"};
  return kPronouns.contains(text::normalize_keyword(s));
}

const std::regex& retention_regex() {
  static const std::regex kRetention(
      R"((for (up to |a period of |at least |no more than )?\d+ (days?|weeks?|months?|years?))|(as long as [^,;]+)|(until [^,;]+))");
  return kRetention;
}

bool starts_with_duration(std::string_view folded) {
  static const std::regex kDuration(
      R"(^(up to |a period of |at least |no more than )?\d+ (days?|weeks?|months?|years?))");
  return std::regex_search(folded.begin(), folded.end(), kDuration);
}

std::string python_quote(std::string_view s) {
  const bool has_single = s.find('\'') != std::string_view::npos;
  const bool has_double = s.find('"') != std::string_view::npos;
  const char quote = has_single && !has_double ? '"' : '\'';
  std::string out(1, quote);
  for (char c : s) {
    if (c == '\\' || c == quote) out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  out.push_back(quote);
  return out;
}

}  // namespace

std::string python_list_repr(std::span<const std::string> items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += python_quote(items[i]);
  }
  out += "]";
  return out;
}

// ---------------------------------------------------------------------------
// Loading

namespace {

template <typename Id, typename Resolve>
std::map<std::string, Id> read_synonyms(const nlohmann::json& table,
                                        const char* name, Resolve resolve) {
  std::map<std::string, Id> out;
  if (!table.is_object()) {
    throw InputError(std::string("lexicon: '") + name + "' must be an object");
  }
  for (const auto& [key, phrases] : table.items()) {
    const auto id = resolve(key);
    if (!id) {
      throw InputError(std::string("lexicon: unknown keyword '") + key + "' in " + name);
    }
    auto add = [&](const std::string& phrase) {
      const std::string norm = text::normalize_keyword(phrase);
      auto [it, inserted] = out.emplace(norm, *id);
      if (!inserted && it->second != *id) {
        throw InputError("lexicon: phrase '" + phrase + "' maps to two ids in " + name);
      }
    };
    add(key);
    for (const auto& p : phrases) add(p.template get<std::string>());
  }
  return out;
}

}  // namespace

RuleLexicon RuleLexicon::from_json(const nlohmann::json& doc, const Taxonomy& taxonomy) {
  RuleLexicon lex;
  std::map<std::string, PracticeClass> seen_triggers;
  for (const auto& [label, phrases] : doc.at("class_triggers").items()) {
    const auto cls = taxonomy.practice_class_from_label(label);
    if (!cls) throw InputError("lexicon: unknown practice class '" + label + "'");
    for (const auto& p : phrases) {
      const std::string norm = text::normalize_keyword(p.get<std::string>());
      auto [it, inserted] = seen_triggers.emplace(norm, *cls);
      if (!inserted) {
        if (it->second != *cls) {
          throw InputError("lexicon: trigger '" + norm + "' maps to two classes");
        }
        continue;
      }
      lex.triggers_.push_back({norm, *cls, std::max(1, word_count(norm))});
    }
  }
  lex.item_synonyms_ = read_synonyms<DataItemId>(
      doc.at("item_synonyms"), "item_synonyms",
      [&](const std::string& k) { return taxonomy.data_item_from_keyword(k); });
  lex.purpose_synonyms_ = read_synonyms<PurposeId>(
      doc.at("purpose_synonyms"), "purpose_synonyms",
      [&](const std::string& k) { return taxonomy.purpose_from_keyword(k); });
  for (const auto& v : doc.at("collect_verbs")) {
    lex.collect_verbs_.push_back(text::normalize_keyword(v.get<std::string>()));
  }
  for (const auto& v : doc.at("share_verbs")) {
    lex.share_verbs_.push_back(text::normalize_keyword(v.get<std::string>()));
  }
  return lex;
}

RuleLexicon RuleLexicon::load_file(const std::filesystem::path& path,
                                   const Taxonomy& taxonomy) {
  std::ifstream in(path);
  if (!in) throw InputError("lexicon: cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in), taxonomy);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("lexicon: " + path.string() + ": " + e.what());
  }
}

const RuleLexicon& RuleLexicon::bundled() {
  static const RuleLexicon kBundled =
      from_json(nlohmann::json::parse(bundled::lexicon_json()), Taxonomy::bundled());
  return kBundled;
}

// ---------------------------------------------------------------------------
// Classification

RuleLexicon::ClassMatch RuleLexicon::classify(std::string_view input) const {
  const std::string folded = text::case_fold(input);
  std::array<int, kPracticeClassCount> score{};
  for (const auto& trigger : triggers_) {
    for (std::size_t pos = text::find_word(folded, trigger.phrase);
         pos != std::string::npos;
         pos = text::find_word(folded, trigger.phrase, pos + 1)) {
      score[trigger.practice_class.index] += trigger.weight;
    }
  }
  ClassMatch match;
  for (int c = 0; c < kPracticeClassCount; ++c) {
    if (score[c] > match.score) {
      match.score = score[c];
      match.practice_class = PracticeClass{c};
    }
  }
  if (match.score > 0) match.rationale = trigger_excerpt(input, match.practice_class);
  return match;
}

std::string RuleLexicon::trigger_excerpt(std::string_view input, PracticeClass cls) const {
  static const std::vector<std::string> kConnectors = {
      " to ", " for ", " in order to ", " so that ", ", ", "; ", " because "};
  const std::string folded = text::case_fold(input);
  for (const Span& sentence : sentence_spans(input)) {
    const std::string_view fs =
        std::string_view(folded).substr(0, sentence.end);
    std::size_t best = std::string::npos;
    std::size_t best_len = 0;
    for (const auto& trigger : triggers_) {
      if (trigger.practice_class != cls) continue;
      const std::size_t p = text::find_word(fs, trigger.phrase, sentence.begin);
      if (p != std::string::npos && (p < best || (p == best && trigger.phrase.size() > best_len))) {
        best = p;
        best_len = trigger.phrase.size();
      }
    }
    if (best == std::string::npos) continue;
    std::size_t cut = find_first_of_markers(fs, best + best_len, sentence.end, kConnectors);
    if (cut == std::string::npos) cut = sentence.end;
    std::string_view excerpt = input.substr(sentence.begin, cut - sentence.begin);
    while (!excerpt.empty() && (excerpt.back() == ' ' || excerpt.back() == ',' ||
                                excerpt.back() == ';')) {
      excerpt.remove_suffix(1);
    }
    return std::string(excerpt);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Decoding

std::vector<PracticeTuple> RuleLexicon::decode(std::string_view input) const {
  std::vector<PracticeTuple> out;
  const std::string folded_all = text::case_fold(input);

  std::vector<std::string> verbs = collect_verbs_;
  verbs.insert(verbs.end(), share_verbs_.begin(), share_verbs_.end());
  auto is_share_verb = [&](std::string_view w) {
    return std::find(share_verbs_.begin(), share_verbs_.end(), w) != share_verbs_.end();
  };

  std::vector<std::string> data_stops = {
      " to ",       " for ",        " in order to ", " so that ", " with ",
      " from ",     " when ",       " if ",          " because ", " through ",
      " via ",      " which ",      " that you ",    " as described", " as part of",
      " in accordance", " where ",  " unless ",      ";",         ":"};
  for (const auto& v : verbs) {
    data_stops.push_back(" and " + v + " ");
    data_stops.push_back(", " + v + " ");
  }
  std::vector<std::string> purpose_stops = {" with ", ", ", ";", " and to ", " where "};
  for (const auto& v : verbs) purpose_stops.push_back(" and " + v + " ");
  const std::vector<std::string> recipient_stops = {
      " for ", " in order to ", " so that ", ", ", ";", " to ", " who ",
      " which ", " that ", " when ", " if ", " where "};
  const std::vector<std::string> list_intro = {" such as ", ", including ", " including ",
                                               " like ", " e.g. ", " namely "};

  for (const Span& sentence : sentence_spans(input)) {
    const std::string_view fs = std::string_view(folded_all).substr(0, sentence.end);

    // Earliest data verb used actively in the sentence.
    std::size_t verb_pos = std::string::npos;
    std::string verb;
    for (const auto& v : verbs) {
      std::size_t p = text::find_word(fs, v, sentence.begin);
      auto active = [&](std::size_t at) {
        const std::string_view prev = previous_word(fs, at, sentence.begin);
        // "app store", "play store" name a place, not an action.
        if (v.starts_with("store") && (prev == "app" || prev == "play")) return false;
        return opens_verb_phrase(prev);
      };
      while (p != std::string::npos && !active(p)) {
        p = text::find_word(fs, v, p + v.size());
      }
      if (p != std::string::npos && (p < verb_pos || (p == verb_pos && v.size() > verb.size()))) {
        verb_pos = p;
        verb = v;
      }
    }
    if (verb_pos == std::string::npos) continue;
    {
      // Negated statements ("we do not share ...") declare no practice.
      bool negated = false;
      for (std::size_t w = verb_pos; w > sentence.begin;) {
        const std::string_view prev = previous_word(fs, w, sentence.begin);
        if (prev.empty()) break;
        if (is_negation(prev)) {
          negated = true;
          break;
        }
        w = static_cast<std::size_t>(prev.data() - fs.data());
      }
      if (negated) continue;
    }
    const bool primary_share = is_share_verb(verb);
    std::size_t cursor = verb_pos + verb.size();

    // "collect and use X", "collect, store and process X"
    bool advanced = true;
    while (advanced) {
      advanced = false;
      for (const auto& v : verbs) {
        for (const std::string prefix : {" and ", " or ", ", "}) {
          const std::string chained = prefix + v;
          if (fs.substr(cursor).starts_with(chained) &&
              text::at_word_boundary(fs, cursor + prefix.size(), v.size())) {
            cursor += chained.size();
            advanced = true;
          }
        }
      }
    }

    std::size_t stop_len = 0;
    std::string stop;
    std::size_t data_end = find_first_of_markers(fs, cursor, sentence.end, data_stops,
                                                 &stop_len, &stop);
    std::size_t data_begin = cursor;
    if (stop == ":") {
      data_begin = data_end + 1;
      stop.clear();
      stop_len = 0;
      std::vector<std::string> list_stops = data_stops;
      std::erase(list_stops, std::string(":"));
      data_end = find_first_of_markers(fs, data_begin, sentence.end, list_stops,
                                       &stop_len, &stop);
    }
    if (data_end == std::string::npos) data_end = sentence.end;

    std::string_view data_view = input.substr(data_begin, data_end - data_begin);
    {
      const std::string_view fdata = fs.substr(data_begin, data_end - data_begin);
      for (const auto& intro : list_intro) {
        const std::size_t p = fdata.find(intro);
        if (p != std::string::npos) {
          data_view = data_view.substr(p + intro.size());
          break;
        }
      }
    }
    PracticeTuple tuple;
    tuple.data = strip_determiners(data_view);
    if (tuple.data.empty() || is_pronoun_phrase(tuple.data)) continue;

    // Purpose directly after the data span.
    auto take_purpose = [&](std::size_t begin) {
      std::size_t end = find_first_of_markers(fs, begin, sentence.end, purpose_stops);
      if (end == std::string::npos) end = sentence.end;
      return std::string(trim_clause(input.substr(begin, end - begin)));
    };
    if (data_end < sentence.end) {
      const std::size_t after = data_end + stop_len;
      if ((stop == " to " && !primary_share) || stop == " in order to " ||
          stop == " so that ") {
        tuple.purpose = take_purpose(after);
      } else if (stop == " for " && !starts_with_duration(fs.substr(after))) {
        tuple.purpose = take_purpose(after);
      }
    }

    // Sharing clause: processing verb and recipients.
    std::size_t share_pos = std::string::npos;
    std::string share_verb;
    for (const auto& v : share_verbs_) {
      const std::size_t p = text::find_word(fs, v, sentence.begin);
      if (p != std::string::npos && p < share_pos) {
        share_pos = p;
        share_verb = v;
      }
    }
    tuple.processing = share_pos != std::string::npos ? share_verb : verb;
    if (share_pos != std::string::npos) {
      std::size_t marker_len = 0;
      const std::size_t rec = find_first_of_markers(
          fs, share_pos + share_verb.size(), sentence.end, {" with ", " to "}, &marker_len);
      if (rec != std::string::npos) {
        const std::size_t begin = rec + marker_len;
        std::size_t end_len = 0;
        std::string end_marker;
        std::size_t end = find_first_of_markers(fs, begin, sentence.end, recipient_stops,
                                                &end_len, &end_marker);
        if (end == std::string::npos) end = sentence.end;
        tuple.recipients = strip_determiners(input.substr(begin, end - begin));
        if (tuple.purpose.empty() && end < sentence.end &&
            (end_marker == " for " || end_marker == " to " ||
             end_marker == " in order to " || end_marker == " so that ") &&
            !starts_with_duration(fs.substr(end + end_len))) {
          tuple.purpose = take_purpose(end + end_len);
        }
      }
    }

    // Retention phrase anywhere in the sentence.
    std::match_results<std::string_view::const_iterator> m;
    const std::string_view sentence_folded = fs.substr(sentence.begin);
    if (std::regex_search(sentence_folded.begin(), sentence_folded.end(), m,
                          retention_regex())) {
      const std::size_t begin = sentence.begin + static_cast<std::size_t>(m.position(0));
      std::string_view r = input.substr(begin, static_cast<std::size_t>(m.length(0)));
      if (text::case_fold(r).starts_with("for ")) r.remove_prefix(4);
      tuple.retention = std::string(trim_clause(r));
      if (tuple.purpose == tuple.retention) tuple.purpose.clear();
    }
    out.push_back(std::move(tuple));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Keyword resolution

namespace {

std::string clean_item(std::string_view s) {
  s = text::trim(s);
  while (!s.empty() && (s.front() == '-' || s.front() == '*' || s.front() == '\'' ||
                        s.front() == '"' || s.front() == '(' || s.front() == ' ')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == '\'' || s.back() == '"' || s.back() == ')' ||
                        s.back() == ',' || s.back() == ';' || s.back() == ':' ||
                        s.back() == ' ')) {
    s.remove_suffix(1);
  }
  // Bullet characters.
  for (std::string_view bullet : {"•", "·", "▪", "–"}) {
    if (s.starts_with(bullet)) s = text::trim(s.substr(bullet.size()));
  }
  return text::normalize_keyword(s);
}

bool is_content_token(const std::string& t) {
  static const std::set<std::string, std::less<>> kStop = {
      "and", "the", "your", "our", "for", "with", "you", "any", "all", "such",
      "other", "data", "information", "info", "details", "about", "from", "may",
      "use", "used", "that", "this", "their", "are", "can"};
  return t.size() >= 3 && !kStop.contains(t);
}

template <typename Id>
std::optional<Id> resolve_by_tables(const std::string& norm,
                                    const std::map<std::string, Id>& synonyms,
                                    std::optional<Id> excluded_from_fuzzy) {
  if (auto it = synonyms.find(norm); it != synonyms.end()) return it->second;

  // Longest whole-word synonym contained in the item.
  std::optional<Id> best;
  std::size_t best_len = 0;
  for (const auto& [phrase, id] : synonyms) {
    if (excluded_from_fuzzy && id == *excluded_from_fuzzy) continue;
    if (phrase.size() < best_len) continue;
    if (text::find_word(norm, phrase) == std::string::npos) continue;
    if (phrase.size() > best_len || (best && id < *best)) {
      best = id;
      best_len = phrase.size();
    }
  }
  if (best) return best;

  // Token overlap against each id's combined phrase vocabulary.
  std::set<std::string> item_tokens;
  for (auto& t : text::word_tokens(norm)) {
    if (is_content_token(t)) item_tokens.insert(t);
  }
  if (item_tokens.empty()) return std::nullopt;
  std::map<Id, std::set<std::string>> id_tokens;
  for (const auto& [phrase, id] : synonyms) {
    if (excluded_from_fuzzy && id == *excluded_from_fuzzy) continue;
    for (auto& t : text::word_tokens(phrase)) {
      if (is_content_token(t)) id_tokens[id].insert(t);
    }
  }
  std::size_t best_overlap = 0;
  for (const auto& [id, tokens] : id_tokens) {
    std::size_t overlap = 0;
    for (const auto& t : item_tokens) overlap += tokens.count(t);
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = id;
    }
  }
  return best;
}

}  // namespace

DataItemId RuleLexicon::resolve_item(std::string_view item, const Taxonomy& taxonomy) const {
  const std::string norm = clean_item(item);
  if (norm.empty()) return items::kNegative;
  if (auto id = taxonomy.data_item_from_keyword(norm)) return *id;
  if (auto id = resolve_by_tables<DataItemId>(norm, item_synonyms_, items::kNegative)) {
    return *id;
  }
  return items::kGenericInformation;
}

PurposeId RuleLexicon::resolve_purpose(std::string_view purpose,
                                       const Taxonomy& taxonomy) const {
  const std::string norm = clean_item(purpose);
  if (norm.empty()) return purposes::kOther;
  if (auto id = taxonomy.purpose_from_keyword(norm)) return *id;
  if (auto id = resolve_by_tables<PurposeId>(norm, purpose_synonyms_, std::nullopt)) {
    return *id;
  }
  return purposes::kOther;
}

// ---------------------------------------------------------------------------
// Headings

std::vector<std::string> RuleLexicon::propose_headings(std::string_view input) const {
  static const std::regex kNumbered(R"(^(\d{1,2})((\.\d{1,2})*)[.)]?\s+\S.*$)");
  std::vector<std::string> top_numbered;
  std::vector<std::string> all;
  for (std::string_view raw_line : text::split_lines_keep_ends(input)) {
    const std::string_view line = text::trim(raw_line);
    const std::size_t cps = text::code_point_count(line);
    if (cps < 2 || cps > 80) continue;
    const char last = line.back();
    if (last == '.' || last == ',' || last == ';' || last == ':' || last == '!' ||
        last == '?') {
      continue;
    }
    if (line.find(". ") != std::string_view::npos &&
        !std::regex_match(line.begin(), line.end(), kNumbered)) {
      continue;
    }
    // Words as written (not folded) so capitalization can be inspected.
    std::vector<std::string_view> words;
    for (std::size_t i = 0; i < line.size();) {
      while (i < line.size() && line[i] == ' ') ++i;
      const std::size_t start = i;
      while (i < line.size() && line[i] != ' ') ++i;
      if (i > start) words.push_back(line.substr(start, i - start));
    }
    if (words.empty() || words.size() > 12) continue;

    std::match_results<std::string_view::const_iterator> m;
    if (std::regex_match(line.begin(), line.end(), m, kNumbered)) {
      all.emplace_back(line);
      if (m[2].length() == 0) top_numbered.emplace_back(line);
      continue;
    }
    bool has_lower = false, has_alpha = false;
    for (char c : line) {
      if (c >= 'a' && c <= 'z') has_lower = true;
      if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) has_alpha = true;
    }
    if (!has_alpha) continue;
    if (!has_lower && words.size() <= 10) {
      all.emplace_back(line);
      continue;
    }
    if (!(line[0] >= 'A' && line[0] <= 'Z') || words.size() > 10) continue;
    int long_words = 0, capitalized = 0;
    for (auto w : words) {
      if (w.size() < 4) continue;
      ++long_words;
      if (w[0] >= 'A' && w[0] <= 'Z') ++capitalized;
    }
    if (long_words > 0 && capitalized * 4 >= long_words * 3) all.emplace_back(line);
  }
  return top_numbered.empty() ? all : top_numbered;
}

// ---------------------------------------------------------------------------
// Backend

std::string RuleBackend::complete(const BackendRequest& request) {
  switch (request.task) {
    case Task::kHeadings:
      return nlohmann::json(lexicon_.propose_headings(
                                request.payload.at("text").get<std::string>()))
          .dump();
    case Task::kClassify: {
      const auto match = lexicon_.classify(request.payload.at("text").get<std::string>());
      return "Matching category = '" + taxonomy_.label(match.practice_class) +
             "'\nReasoning = '" + match.rationale + "'";
    }
    case Task::kDecode: {
      nlohmann::json list = nlohmann::json::array();
      for (const auto& t : lexicon_.decode(request.payload.at("text").get<std::string>())) {
        list.push_back({{"data", t.data},
                        {"purpose", t.purpose},
                        {"processing", t.processing},
                        {"storage", t.retention},
                        {"recipients", t.recipients}});
      }
      return list.dump();
    }
    case Task::kMapItems:
    case Task::kMapPurposes: {
      std::string out = "output_list = {";
      bool first = true;
      for (const auto& item : request.payload.at("items")) {
        const auto s = item.get<std::string>();
        std::string keyword;
        if (request.task == Task::kMapItems) {
          const DataItemId id = lexicon_.resolve_item(s, taxonomy_);
          keyword = id == items::kNegative ? std::string(kNotApplicableKeyword)
                                           : taxonomy_.keyword(id);
        } else {
          keyword = taxonomy_.keyword(lexicon_.resolve_purpose(s, taxonomy_));
        }
        if (!first) out += ", ";
        first = false;
        out += python_quote(s) + ": " + python_quote(keyword);
      }
      return out + "}";
    }
    case Task::kVerifyItem: {
      const DataItemId id =
          lexicon_.resolve_item(request.payload.at("item").get<std::string>(), taxonomy_);
      return id == items::kNegative ? std::string(kNotApplicableKeyword)
                                    : taxonomy_.keyword(id);
    }
    case Task::kVerifyPurpose:
      return taxonomy_.keyword(
          lexicon_.resolve_purpose(request.payload.at("item").get<std::string>(), taxonomy_));
  }
  throw ContractViolation("rule backend: unknown task");
}

}  // namespace ppaudit
