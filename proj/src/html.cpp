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

#include "ppaudit/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <unordered_map>

#include "ppaudit/text.hpp"

namespace ppaudit::html {

namespace {

bool is_ascii_alpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_ascii_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f';
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

const std::unordered_map<std::string_view, char32_t>& named_entities() {
  static const std::unordered_map<std::string_view, char32_t> kTable = {
      {"amp", '&'},       {"lt", '<'},         {"gt", '>'},
      {"quot", '"'},      {"apos", '\''},      {"nbsp", 0xA0},
      {"copy", 0xA9},     {"reg", 0xAE},       {"trade", 0x2122},
      {"hellip", 0x2026}, {"mdash", 0x2014},   {"ndash", 0x2013},
      {"lsquo", 0x2018},  {"rsquo", 0x2019},   {"ldquo", 0x201C},
      {"rdquo", 0x201D},  {"bull", 0x2022},    {"middot", 0xB7},
      {"laquo", 0xAB},    {"raquo", 0xBB},     {"euro", 0x20AC},
      {"pound", 0xA3},    {"yen", 0xA5},       {"cent", 0xA2},
      {"sect", 0xA7},     {"para", 0xB6},      {"deg", 0xB0},
      {"plusmn", 0xB1},   {"times", 0xD7},     {"divide", 0xF7},
      {"eacute", 0xE9},   {"egrave", 0xE8},    {"ecirc", 0xEA},
      {"agrave", 0xE0},   {"aacute", 0xE1},    {"acirc", 0xE2},
      {"atilde", 0xE3},   {"ccedil", 0xE7},    {"ntilde", 0xF1},
      {"oacute", 0xF3},   {"otilde", 0xF5},    {"ocirc", 0xF4},
      {"iacute", 0xED},   {"uacute", 0xFA},    {"ouml", 0xF6},
      {"uuml", 0xFC},     {"auml", 0xE4},      {"szlig", 0xDF},
      {"Eacute", 0xC9},   {"Agrave", 0xC0},    {"Ccedil", 0xC7},
      {"Ouml", 0xD6},     {"Uuml", 0xDC},      {"Auml", 0xC4},
      {"zwnj", 0x200C},   {"zwj", 0x200D},     {"shy", 0xAD},
      {"ensp", 0x2002},   {"emsp", 0x2003},    {"thinsp", 0x2009},
  };
  return kTable;
}

}  // namespace

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    const std::size_t semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(s[i++]);
      continue;
    }
    const std::string_view body = s.substr(i + 1, semi - i - 1);
    char32_t cp = 0;
    bool ok = false;
    if (!body.empty() && body[0] == '#') {
      unsigned long value = 0;
      std::string_view digits = body.substr(1);
      int base = 10;
      if (!digits.empty() && (digits[0] == 'x' || digits[0] == 'X')) {
        digits.remove_prefix(1);
        base = 16;
      }
      auto [ptr, ec] = std::from_chars(digits.data(),
                                       digits.data() + digits.size(), value, base);
      if (ec == std::errc() && ptr == digits.data() + digits.size() &&
          !digits.empty() && value > 0 && value <= 0x10FFFF) {
        cp = static_cast<char32_t>(value);
        ok = true;
      }
    } else {
      auto it = named_entities().find(body);
      if (it != named_entities().end()) {
        cp = it->second;
        ok = true;
      }
    }
    if (!ok) {
      out.push_back(s[i++]);
      continue;
    }
    text::append_utf8(out, cp);
    i = semi + 1;
  }
  return out;
}

bool is_void_element(std::string_view tag) {
  static constexpr std::array<std::string_view, 14> kVoid = {
      "area", "base", "br",   "col",   "embed",  "hr",    "img",
      "input", "link", "meta", "param", "source", "track", "wbr"};
  return std::find(kVoid.begin(), kVoid.end(), tag) != kVoid.end();
}

bool is_block_element(std::string_view tag) {
  static constexpr std::array<std::string_view, 36> kBlock = {
      "address", "article", "aside",  "blockquote", "dd",      "details",
      "div",     "dl",      "dt",     "fieldset",   "figcaption", "figure",
      "footer",  "form",    "h1",     "h2",         "h3",      "h4",
      "h5",      "h6",      "header", "hr",         "li",      "main",
      "ol",      "p",       "pre",    "section",    "table",   "tbody",
      "thead",   "tfoot",   "tr",     "ul",         "caption", "summary"};
  return std::find(kBlock.begin(), kBlock.end(), tag) != kBlock.end();
}

namespace {

bool is_raw_text_element(std::string_view tag) {
  return tag == "script" || tag == "style" || tag == "textarea" ||
         tag == "title" || tag == "xmp" || tag == "noscript" ||
         tag == "template";
}

// Elements whose start tag implicitly closes an open <p>.
bool closes_paragraph(std::string_view tag) {
  return is_block_element(tag) && tag != "li" && tag != "dd" && tag != "dt" &&
         tag != "tr" && tag != "tbody" && tag != "thead" && tag != "tfoot" &&
         tag != "caption" && tag != "summary";
}

class TreeBuilder {
 public:
  explicit TreeBuilder(Node* root) : stack_{root} {}

  void text(std::string value) {
    if (value.empty()) return;
    Node* cur = stack_.back();
    if (!cur->children.empty() &&
        cur->children.back()->kind == Node::Kind::kText) {
      cur->children.back()->text += value;
      return;
    }
    auto node = std::make_unique<Node>();
    node->kind = Node::Kind::kText;
    node->text = std::move(value);
    append(std::move(node));
  }

  void comment(std::string value) {
    auto node = std::make_unique<Node>();
    node->kind = Node::Kind::kComment;
    node->text = std::move(value);
    append(std::move(node));
  }

  void start(std::string tag,
             std::vector<std::pair<std::string, std::string>> attributes,
             bool self_closing) {
    apply_implied_end_tags(tag);
    auto node = std::make_unique<Node>();
    node->kind = Node::Kind::kElement;
    node->tag = tag;
    node->attributes = std::move(attributes);
    Node* raw = node.get();
    append(std::move(node));
    if (!self_closing && !is_void_element(tag)) stack_.push_back(raw);
  }

  void end(std::string_view tag) {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      if (stack_[i]->tag == tag) {
        stack_.resize(i);
        return;
      }
    }
    // Unmatched end tag: dropped. </p> and </br> create elements in browsers;
    // the text extractor only needs the boundary, so emit an empty one.
    if (tag == "br" || tag == "p") start(std::string(tag), {}, true);
  }

 private:
  void append(std::unique_ptr<Node> node) {
    node->parent = stack_.back();
    stack_.back()->children.push_back(std::move(node));
  }

  bool pop_until(std::string_view target,
                 std::initializer_list<std::string_view> barriers) {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      const auto& t = stack_[i]->tag;
      if (t == target) {
        stack_.resize(i);
        return true;
      }
      if (std::find(barriers.begin(), barriers.end(), t) != barriers.end()) {
        return false;
      }
    }
    return false;
  }

  void apply_implied_end_tags(std::string_view tag) {
    if (closes_paragraph(tag)) {
      pop_until("p", {"div", "section", "article", "td", "th", "li", "body",
                      "table", "blockquote", "main", "header", "footer"});
    }
    if (tag == "li") pop_until("li", {"ul", "ol", "menu"});
    if (tag == "dt" || tag == "dd") {
      if (!pop_until("dt", {"dl"})) pop_until("dd", {"dl"});
    }
    if (tag == "tr") pop_until("tr", {"table", "tbody", "thead", "tfoot"});
    if (tag == "td" || tag == "th") {
      if (!pop_until("td", {"tr", "table"})) pop_until("th", {"tr", "table"});
    }
    if (tag == "option") pop_until("option", {"select", "datalist"});
  }

  std::vector<Node*> stack_;
};

struct Tokenizer {
  std::string_view src;
  std::size_t pos = 0;
  TreeBuilder& builder;

  void run() {
    std::string pending;
    while (pos < src.size()) {
      if (src[pos] == '<' && try_markup(pending)) continue;
      pending.push_back(src[pos++]);
    }
    flush(pending);
  }

  void flush(std::string& pending) {
    if (!pending.empty()) {
      builder.text(decode_entities(pending));
      pending.clear();
    }
  }

  // Returns true when a markup construct was consumed at `pos`.
  bool try_markup(std::string& pending) {
    const std::string_view rest = src.substr(pos);
    if (rest.starts_with("<!--")) {
      flush(pending);
      const std::size_t close = src.find("-->", pos + 4);
      const std::size_t stop = close == std::string_view::npos ? src.size() : close;
      builder.comment(std::string(src.substr(pos + 4, stop - pos - 4)));
      pos = close == std::string_view::npos ? src.size() : close + 3;
      return true;
    }
    if (rest.starts_with("<!") || rest.starts_with("<?")) {
      flush(pending);
      const std::size_t close = src.find('>', pos);
      pos = close == std::string_view::npos ? src.size() : close + 1;
      return true;
    }
    if (rest.size() >= 3 && rest[1] == '/' && is_ascii_alpha(rest[2])) {
      flush(pending);
      std::size_t i = pos + 2;
      const std::size_t name_start = i;
      while (i < src.size() && !is_ascii_ws(src[i]) && src[i] != '>' &&
             src[i] != '/') {
        ++i;
      }
      const std::string name = lower(src.substr(name_start, i - name_start));
      const std::size_t close = src.find('>', i);
      pos = close == std::string_view::npos ? src.size() : close + 1;
      builder.end(name);
      return true;
    }
    if (rest.size() >= 2 && is_ascii_alpha(rest[1])) {
      flush(pending);
      parse_start_tag();
      return true;
    }
    return false;
  }

  void parse_start_tag() {
    std::size_t i = pos + 1;
    const std::size_t name_start = i;
    while (i < src.size() && !is_ascii_ws(src[i]) && src[i] != '>' &&
           src[i] != '/') {
      ++i;
    }
    std::string name = lower(src.substr(name_start, i - name_start));
    std::vector<std::pair<std::string, std::string>> attributes;
    bool self_closing = false;
    while (i < src.size()) {
      while (i < src.size() && is_ascii_ws(src[i])) ++i;
      if (i >= src.size()) break;
      if (src[i] == '>') {
        ++i;
        break;
      }
      if (src[i] == '/') {
        self_closing = i + 1 < src.size() && src[i + 1] == '>';
        ++i;
        continue;
      }
      const std::size_t attr_start = i;
      while (i < src.size() && !is_ascii_ws(src[i]) && src[i] != '>' &&
             src[i] != '=' && !(src[i] == '/' && i + 1 < src.size() && src[i + 1] == '>')) {
        ++i;
      }
      std::string attr_name = lower(src.substr(attr_start, i - attr_start));
      while (i < src.size() && is_ascii_ws(src[i])) ++i;
      std::string value;
      if (i < src.size() && src[i] == '=') {
        ++i;
        while (i < src.size() && is_ascii_ws(src[i])) ++i;
        if (i < src.size() && (src[i] == '"' || src[i] == '\'')) {
          const char quote = src[i++];
          const std::size_t close = src.find(quote, i);
          const std::size_t stop = close == std::string_view::npos ? src.size() : close;
          value = decode_entities(src.substr(i, stop - i));
          i = close == std::string_view::npos ? src.size() : close + 1;
        } else {
          const std::size_t vstart = i;
          while (i < src.size() && !is_ascii_ws(src[i]) && src[i] != '>') ++i;
          value = decode_entities(src.substr(vstart, i - vstart));
        }
      }
      if (!attr_name.empty()) attributes.emplace_back(std::move(attr_name), std::move(value));
    }
    pos = i;
    const bool raw = is_raw_text_element(name) && !self_closing;
    builder.start(name, std::move(attributes), self_closing);
    if (raw) {
      // Raw text runs to the matching end tag, case-insensitively.
      const std::string closing = "</" + name;
      std::size_t end = pos;
      while (true) {
        end = src.find("</", end);
        if (end == std::string_view::npos) break;
        if (lower(src.substr(end, closing.size())) == closing) break;
        end += 2;
      }
      const std::size_t stop = end == std::string_view::npos ? src.size() : end;
      if (name == "textarea" || name == "title") {
        builder.text(decode_entities(src.substr(pos, stop - pos)));
      } else {
        builder.text(std::string(src.substr(pos, stop - pos)));
      }
      builder.end(name);
      if (end == std::string_view::npos) {
        pos = src.size();
      } else {
        const std::size_t gt = src.find('>', end);
        pos = gt == std::string_view::npos ? src.size() : gt + 1;
      }
    }
  }
};

}  // namespace

Document Document::parse(std::string_view source) {
  Document doc;
  doc.root_ = std::make_unique<Node>();
  doc.root_->kind = Node::Kind::kDocument;
  TreeBuilder builder(doc.root_.get());
  Tokenizer tokenizer{source, 0, builder};
  tokenizer.run();
  return doc;
}

bool contains_markup(std::string_view s) {
  for (std::size_t i = s.find('<'); i != std::string_view::npos;
       i = s.find('<', i + 1)) {
    if (i + 1 >= s.size()) break;
    const char c = s[i + 1];
    if (is_ascii_alpha(c) || c == '!' || c == '?') return true;
    if (c == '/' && i + 2 < s.size() && is_ascii_alpha(s[i + 2])) return true;
  }
  return false;
}

std::string_view Node::attribute(std::string_view name) const {
  for (const auto& [k, v] : attributes) {
    if (k == name) return v;
  }
  return {};
}

bool Node::has_class(std::string_view cls) const {
  if (kind != Kind::kElement) return false;
  const std::string_view classes = attribute("class");
  std::size_t i = 0;
  while (i < classes.size()) {
    while (i < classes.size() && is_ascii_ws(classes[i])) ++i;
    const std::size_t start = i;
    while (i < classes.size() && !is_ascii_ws(classes[i])) ++i;
    if (classes.substr(start, i - start) == cls) return true;
  }
  return false;
}

std::string Node::inner_text() const {
  std::string raw;
  const std::function<void(const Node&)> collect = [&](const Node& n) {
    for (const auto& child : n.children) {
      if (child->kind == Kind::kText) {
        raw += child->text;
      } else if (child->kind == Kind::kElement) {
        if (child->tag == "script" || child->tag == "style") continue;
        if (child->tag == "br" || is_block_element(child->tag)) raw += ' ';
        collect(*child);
        if (is_block_element(child->tag)) raw += ' ';
      }
    }
  };
  if (kind == Kind::kText) raw = text;
  collect(*this);
  return text::collapse_whitespace(raw);
}

void Node::visit(const std::function<bool(const Node&)>& visitor) const {
  for (const auto& child : children) {
    if (visitor(*child)) child->visit(visitor);
  }
}

std::vector<const Node*> Node::find_by_class(std::string_view cls) const {
  std::vector<const Node*> out;
  visit([&](const Node& n) {
    if (n.has_class(cls)) out.push_back(&n);
    return true;
  });
  return out;
}

const Node* Node::first_by_class(std::string_view cls) const {
  const Node* found = nullptr;
  visit([&](const Node& n) {
    if (found) return false;
    if (n.has_class(cls)) {
      found = &n;
      return false;
    }
    return true;
  });
  return found;
}

std::vector<const Node*> Node::find_by_tag(std::string_view tag_name) const {
  std::vector<const Node*> out;
  visit([&](const Node& n) {
    if (n.is_element(tag_name)) out.push_back(&n);
    return true;
  });
  return out;
}

}  // namespace ppaudit::html
