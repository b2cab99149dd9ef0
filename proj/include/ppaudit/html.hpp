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

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ppaudit::html {

// Minimal DOM produced by a forgiving tokenizer + tree builder. It never
// rejects input: stray end tags are dropped, unclosed elements are closed at
// end of input, and the common implied end tags (p, li, td, tr, option, dt,
// dd) are inserted.
struct Node {
  enum class Kind { kDocument, kElement, kText, kComment };

  Kind kind = Kind::kDocument;
  std::string tag;  // lower-case element name
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;  // text and comment payload, entities decoded
  std::vector<std::unique_ptr<Node>> children;
  Node* parent = nullptr;

  bool is_element(std::string_view name) const {
    return kind == Kind::kElement && tag == name;
  }
  std::string_view attribute(std::string_view name) const;
  bool has_class(std::string_view cls) const;

  // Descendant text with whitespace runs collapsed and the ends trimmed.
  std::string inner_text() const;

  // Pre-order traversal over descendants (not including this node). The
  // visitor returns false to skip a node's subtree.
  void visit(const std::function<bool(const Node&)>& visitor) const;

  // Descendants carrying `cls` in their class list, document order.
  std::vector<const Node*> find_by_class(std::string_view cls) const;
  const Node* first_by_class(std::string_view cls) const;
  std::vector<const Node*> find_by_tag(std::string_view tag) const;
};

class Document {
 public:
  static Document parse(std::string_view source);

  const Node& root() const { return *root_; }

 private:
  std::unique_ptr<Node> root_;
};

std::string decode_entities(std::string_view s);

// True when `s` contains something that tokenizes as a tag, comment or
// doctype.
bool contains_markup(std::string_view s);

bool is_void_element(std::string_view tag);
bool is_block_element(std::string_view tag);

}  // namespace ppaudit::html
