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

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ppaudit::text {

// Decodes one UTF-8 sequence starting at `pos`, advancing it. Invalid bytes
// decode to U+FFFD and consume one byte.
char32_t next_code_point(std::string_view s, std::size_t& pos);
void append_utf8(std::string& out, char32_t cp);

std::size_t code_point_count(std::string_view s);

// Simple (1:1) case folding for ASCII, Latin-1, Latin Extended-A, Greek and
// Cyrillic. Other code points pass through unchanged.
char32_t fold_code_point(char32_t cp);
std::string case_fold(std::string_view s);

std::string_view trim(std::string_view s);
bool is_space(char32_t cp);

// Trims and collapses every whitespace run to one ASCII space.
std::string collapse_whitespace(std::string_view s);

// Case-fold, trim and collapse internal whitespace runs to one ASCII space.
std::string normalize_keyword(std::string_view s);

// Lowercase + whitespace-collapsed form used for content hashing.
std::string normalize_for_hash(std::string_view s);

// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

// Word tokens: maximal runs of letters/digits (non-ASCII code points count as
// letters), case-folded.
std::vector<std::string> word_tokens(std::string_view s);

// True when `needle` occurs in `haystack` at `pos` with non-word characters
// (or string edges) on both sides.
bool at_word_boundary(std::string_view haystack, std::size_t pos,
                      std::size_t len);

// Finds the first whole-word occurrence of `needle` (already folded) inside
// `folded_haystack`. Returns npos when absent.
std::size_t find_word(std::string_view folded_haystack,
                      std::string_view needle, std::size_t from = 0);

std::vector<std::string_view> split_lines_keep_ends(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace ppaudit::text
