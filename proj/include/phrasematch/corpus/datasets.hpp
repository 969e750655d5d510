#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "phrasematch/corpus/embeddings.hpp"
#include "phrasematch/phrasebank.hpp"

namespace phrasematch::corpus {

inline constexpr std::size_t kMaxAnswerTokens = 40;

/// Class order doubles as the argmax tie-break order.
enum class TeLabel : std::size_t { Entailment = 0, Contradiction = 1, Neutral = 2 };
inline constexpr std::size_t kTeClasses = 3;

inline std::string_view label_name(TeLabel l) {
  switch (l) {
    case TeLabel::Entailment: return "ENTAILMENT";
    case TeLabel::Contradiction: return "CONTRADICTION";
    case TeLabel::Neutral: return "NEUTRAL";
  }
  return "?";
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::optional<TeLabel> parse_te_label(std::string_view s) {
  const auto l = lower(s);
  if (l == "entailment") return TeLabel::Entailment;
  if (l == "contradiction") return TeLabel::Contradiction;
  if (l == "neutral") return TeLabel::Neutral;
  return std::nullopt;
}

struct LabeledPair {
  std::string id;
  Sentence first;
  Sentence second;
  TeLabel label = TeLabel::Neutral;

  friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

struct Candidate {
  Sentence answer;
  int label = 0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct QuestionGroup {
  std::string question_id;
  Sentence question;
  std::vector<Candidate> candidates;

  bool has_positive() const {
    return std::any_of(candidates.begin(), candidates.end(),
                       [](const Candidate& c) { return c.label == 1; });
  }
  friend bool operator==(const QuestionGroup&, const QuestionGroup&) = default;
};

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t b = 0;
  while (true) {
    const auto e = line.find('\t', b);
    out.push_back(line.substr(b, e == std::string_view::npos ? line.npos : e - b));
    if (e == std::string_view::npos) break;
    b = e + 1;
  }
  return out;
}

inline std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

inline bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

inline std::size_t find_column(const std::vector<std::string_view>& header,
                               std::initializer_list<std::string_view> names,
                               const std::string& path) {
  for (std::size_t i = 0; i < header.size(); ++i)
    for (auto n : names)
      if (lower(header[i]) == lower(n)) return i;
  throw LoadError(path + ":1: missing column '" + std::string(*names.begin()) + "'");
}

inline std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace detail

/// SICK-format TSV: header row naming pair_ID, sentence_A, sentence_B and
/// entailment_judgment (other columns ignored).
inline std::vector<LabeledPair> load_sick(const std::string& path, TokenizerOptions tok = {}) {
  auto in = detail::open(path);
  std::string line;
  if (!detail::read_line(in, line)) throw LoadError(path + ":1: empty file, header expected");
  const std::string header = line;
  const auto header_view = detail::split_tabs(header);
  const std::size_t c_id = detail::find_column(header_view, {"pair_ID"}, path);
  const std::size_t c_a = detail::find_column(header_view, {"sentence_A"}, path);
  const std::size_t c_b = detail::find_column(header_view, {"sentence_B"}, path);
  const std::size_t c_label = detail::find_column(header_view, {"entailment_judgment"}, path);
  const std::size_t needed = std::max({c_id, c_a, c_b, c_label}) + 1;

  std::vector<LabeledPair> out;
  std::size_t line_no = 1;
  while (detail::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_tabs(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (f.size() < needed)
      throw LoadError(where + ": expected at least " + std::to_string(needed) + " columns, found " +
                      std::to_string(f.size()));
    const auto label = parse_te_label(f[c_label]);
    if (!label) throw LoadError(where + ": unknown entailment label '" + std::string(f[c_label]) + "'");
    LabeledPair p{std::string(f[c_id]), {tokenize(f[c_a], tok), {}}, {tokenize(f[c_b], tok), {}},
                  *label};
    if (p.first.empty() || p.second.empty()) throw LoadError(where + ": empty sentence");
    out.push_back(std::move(p));
  }
  return out;
}

inline void write_sick(std::ostream& out, const std::vector<LabeledPair>& pairs) {
  out << "pair_ID\tsentence_A\tsentence_B\tentailment_judgment\n";
  for (const auto& p : pairs)
    out << p.id << '\t' << detail::join(p.first.tokens) << '\t' << detail::join(p.second.tokens)
        << '\t' << label_name(p.label) << '\n';
}

struct WikiQaOptions {
  bool header = true;
  std::size_t max_answer_tokens = kMaxAnswerTokens;
  TokenizerOptions tokenizer;
};

struct WikiQaData {
  std::vector<QuestionGroup> groups;
  std::size_t pairs_read = 0;
  std::size_t dropped_groups = 0;  ///< groups without any correct candidate
};

/// WikiQA-format TSV. Without a header the columns are question_id, question,
/// answer, label. With a header the columns are located by name, accepting
/// both this naming and the official QuestionID/Question/Sentence/Label one.
inline WikiQaData load_wikiqa(const std::string& path, const WikiQaOptions& opts = {}) {
  auto in = detail::open(path);
  std::string line;
  std::size_t c_id = 0, c_q = 1, c_a = 2, c_label = 3;
  std::size_t line_no = 0;
  if (opts.header) {
    if (!detail::read_line(in, line)) throw LoadError(path + ":1: empty file, header expected");
    line_no = 1;
    const auto h = detail::split_tabs(line);
    c_id = detail::find_column(h, {"question_id", "QuestionID"}, path);
    c_q = detail::find_column(h, {"question", "Question"}, path);
    c_a = detail::find_column(h, {"answer", "Sentence"}, path);
    c_label = detail::find_column(h, {"label", "Label"}, path);
  }
  const std::size_t needed = std::max({c_id, c_q, c_a, c_label}) + 1;

  WikiQaData data;
  std::unordered_map<std::string, std::size_t> group_of;
  std::vector<QuestionGroup> all;
  while (detail::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_tabs(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (f.size() < needed)
      throw LoadError(where + ": expected at least " + std::to_string(needed) + " columns, found " +
                      std::to_string(f.size()));
    int label = -1;
    if (f[c_label] == "0") label = 0;
    if (f[c_label] == "1") label = 1;
    if (label < 0) throw LoadError(where + ": label must be 0 or 1, got '" + std::string(f[c_label]) + "'");
    Candidate cand{{tokenize(f[c_a], opts.tokenizer), {}}, label};
    if (cand.answer.tokens.size() > opts.max_answer_tokens)
      cand.answer.tokens.resize(opts.max_answer_tokens);
    const std::string qid(f[c_id]);
    auto [it, fresh] = group_of.emplace(qid, all.size());
    if (fresh) {
      all.push_back({qid, {tokenize(f[c_q], opts.tokenizer), {}}, {}});
      if (all.back().question.empty()) throw LoadError(where + ": empty question");
    }
    if (cand.answer.empty()) throw LoadError(where + ": empty answer");
    all[it->second].candidates.push_back(std::move(cand));
    ++data.pairs_read;
  }
  for (auto& g : all) {
    if (g.has_positive())
      data.groups.push_back(std::move(g));
    else
      ++data.dropped_groups;
  }
  return data;
}

inline void write_wikiqa(std::ostream& out, const std::vector<QuestionGroup>& groups) {
  out << "question_id\tquestion\tanswer\tlabel\n";
  for (const auto& g : groups)
    for (const auto& c : g.candidates)
      out << g.question_id << '\t' << detail::join(g.question.tokens) << '\t'
          << detail::join(c.answer.tokens) << '\t' << c.label << '\n';
}

inline void collect_vocabulary(const Sentence& s, std::set<std::string>& vocab) {
  vocab.insert(s.tokens.begin(), s.tokens.end());
}
inline void collect_vocabulary(const std::vector<LabeledPair>& pairs, std::set<std::string>& vocab) {
  for (const auto& p : pairs) {
    collect_vocabulary(p.first, vocab);
    collect_vocabulary(p.second, vocab);
  }
}
inline void collect_vocabulary(const std::vector<QuestionGroup>& groups,
                               std::set<std::string>& vocab) {
  for (const auto& g : groups) {
    collect_vocabulary(g.question, vocab);
    for (const auto& c : g.candidates) collect_vocabulary(c.answer, vocab);
  }
}

inline void index_all(std::vector<LabeledPair>& pairs, const EmbeddingTable& emb) {
  for (auto& p : pairs) {
    emb.index(p.first);
    emb.index(p.second);
  }
}
inline void index_all(std::vector<QuestionGroup>& groups, const EmbeddingTable& emb) {
  for (auto& g : groups) {
    emb.index(g.question);
    for (auto& c : g.candidates) emb.index(c.answer);
  }
}

}  // namespace phrasematch::corpus
