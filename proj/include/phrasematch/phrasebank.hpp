#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "phrasematch/errors.hpp"

namespace phrasematch {

inline constexpr std::size_t kDefaultMaxPhraseLength = 7;

struct TokenizerOptions {
  bool lowercase = true;
};

/// Whitespace tokenizer. Trailing punctuation (. , ? ! ; : ") is split off
/// into standalone tokens, e.g. `florida?` -> `florida`, `?`.
inline std::vector<std::string> tokenize(std::string_view text, TokenizerOptions opts = {}) {
  static constexpr std::string_view kTrailing = ".,?!;:\"";
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i) break;
    std::string word(text.substr(i, j - i));
    if (opts.lowercase)
      for (auto& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::vector<std::string> tail;
    while (word.size() > 1 && kTrailing.find(word.back()) != std::string_view::npos) {
      tail.emplace_back(1, word.back());
      word.pop_back();
    }
    out.push_back(std::move(word));
    out.insert(out.end(), tail.rbegin(), tail.rend());
    i = j;
  }
  return out;
}

/// Tokens plus their embedding-table indices (filled once a table is bound).
struct Sentence {
  std::vector<std::string> tokens;
  std::vector<std::size_t> token_ids;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  bool indexed() const noexcept { return token_ids.size() == tokens.size(); }

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

/// Contiguous token span [start, start + len).
struct PhraseSpan {
  std::size_t start = 0;
  std::size_t len = 1;

  std::size_t end() const noexcept { return start + len - 1; }

  friend bool operator==(const PhraseSpan&, const PhraseSpan&) = default;
};

/// Reformatted phrase order: end position ascending, then length ascending.
inline bool phrase_order_less(const PhraseSpan& a, const PhraseSpan& b) {
  if (a.end() != b.end()) return a.end() < b.end();
  return a.len < b.len;
}

/// Every span of length <= max_len in reformatted order: for
/// "A B C D E": (A)(B)(AB)(C)(BC)(ABC)(D)(CD)(BCD)(ABCD)(E)...
struct PhraseSequence {
  std::size_t sentence_length = 0;
  std::size_t max_len = kDefaultMaxPhraseLength;
  std::vector<PhraseSpan> spans;

  std::size_t size() const noexcept { return spans.size(); }
  const PhraseSpan& operator[](std::size_t i) const { return spans[i]; }
};

/// Closed-form count: sum over t = 1..n of min(t, max_len).
constexpr std::size_t phrase_count(std::size_t n, std::size_t max_len) noexcept {
  std::size_t total = 0;
  for (std::size_t t = 1; t <= n; ++t) total += std::min(t, max_len);
  return total;
}

inline PhraseSequence enumerate_phrases(std::size_t sentence_length,
                                        std::size_t max_len = kDefaultMaxPhraseLength) {
  require(sentence_length >= 1, "enumerate_phrases: empty sentence");
  require(max_len >= 1, "enumerate_phrases: max phrase length must be >= 1");
  PhraseSequence seq;
  seq.sentence_length = sentence_length;
  seq.max_len = max_len;
  seq.spans.reserve(phrase_count(sentence_length, max_len));
  for (std::size_t end = 0; end < sentence_length; ++end) {
    const std::size_t longest = std::min(max_len, end + 1);
    for (std::size_t len = 1; len <= longest; ++len) seq.spans.push_back({end + 1 - len, len});
  }
  return seq;
}

inline PhraseSequence enumerate_phrases(const Sentence& s,
                                        std::size_t max_len = kDefaultMaxPhraseLength) {
  return enumerate_phrases(s.size(), max_len);
}

/// Rotation layout as token indices: row r is the sentence rotated left by r.
/// Row 0 is the sentence itself.
inline std::vector<std::vector<std::size_t>> rotation_rows(std::size_t sentence_length) {
  require(sentence_length >= 1, "rotation_rows: empty sentence");
  std::vector<std::vector<std::size_t>> rows(sentence_length);
  for (std::size_t r = 0; r < sentence_length; ++r) {
    rows[r].reserve(sentence_length);
    for (std::size_t c = 0; c < sentence_length; ++c)
      rows[r].push_back((r + c) % sentence_length);
  }
  return rows;
}

/// Cell of the rotation layout; `col` counts tokens consumed (1-based), so
/// the GRU state at (row, col) covers tokens row .. row + col - 1.
struct LayoutCell {
  std::size_t row = 0;
  std::size_t col = 1;

  friend bool operator==(const LayoutCell&, const LayoutCell&) = default;
};

inline LayoutCell span_to_cell(const PhraseSpan& span, std::size_t sentence_length) {
  require(span.len >= 1, "span_to_cell: empty span");
  require(span.start + span.len <= sentence_length,
          "span_to_cell: span (" + std::to_string(span.start) + "," + std::to_string(span.len) +
              ") wraps past the end of a " + std::to_string(sentence_length) + "-token sentence");
  return {span.start, span.len};
}

inline PhraseSpan cell_to_span(const LayoutCell& cell, std::size_t sentence_length) {
  require(cell.col >= 1 && cell.row + cell.col <= sentence_length,
          "cell_to_span: cell lies in the discarded wrap-around region");
  return {cell.row, cell.col};
}

/// Space-joined surface text of a span.
inline std::string phrase_text(const Sentence& s, const PhraseSpan& span) {
  std::string out;
  for (std::size_t i = span.start; i < span.start + span.len; ++i) {
    if (i > span.start) out += ' ';
    out += s.tokens.at(i);
  }
  return out;
}

}  // namespace phrasematch
