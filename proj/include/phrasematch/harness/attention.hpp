#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "phrasematch/harness/format.hpp"
#include "phrasematch/matcher.hpp"

namespace phrasematch::harness {

/// Attention over the phrases of one sentence, in reformatted order.
struct AttentionSide {
  std::vector<PhraseSpan> spans;
  std::vector<std::string> phrases;
  std::vector<double> attention;
  std::vector<bool> selected;

  std::size_t selected_count() const {
    std::size_t n = 0;
    for (bool b : selected) n += b ? 1 : 0;
    return n;
  }
};

struct AttentionDump {
  AttentionSide first;
  AttentionSide second;
};

inline AttentionDump compute_attention(Model& model, const Sentence& first, const Sentence& second,
                                       const corpus::EmbeddingTable& emb) {
  require(!first.empty() && !second.empty(), "attention: both sentences must be non-empty");
  const TaskConfig& cfg = model.config;
  const Matrix r1 = encode_phrases(model.gru1, first, emb, cfg.max_phrase_len);
  const Matrix r2 = encode_phrases(model.gru1, second, emb, cfg.max_phrase_len);
  const AttentionVectors att = attention_vectors(alignment_matrix(r1, r2));
  auto side = [&](const Sentence& s, const std::vector<double>& a) {
    AttentionSide out;
    out.spans = enumerate_phrases(s.size(), cfg.max_phrase_len).spans;
    for (const auto& sp : out.spans) out.phrases.push_back(phrase_text(s, sp));
    out.attention = a;
    out.selected.assign(a.size(), false);
    for (auto i : select_phrases(a, cfg.pooling)) out.selected[i] = true;
    return out;
  };
  return {side(first, att.first), side(second, att.second)};
}

inline void write_attention_csv(std::ostream& out, const AttentionSide& side) {
  out << "phrase_text,start,len,attention,selected\n";
  for (std::size_t i = 0; i < side.spans.size(); ++i)
    out << csv_field(side.phrases[i]) << ',' << side.spans[i].start << ',' << side.spans[i].len
        << ',' << format_real(side.attention[i]) << ',' << (side.selected[i] ? 1 : 0) << '\n';
}

/// Writes `<dir>/<prefix>_s1.csv` and `<dir>/<prefix>_s2.csv`, creating `dir`
/// if needed.
inline AttentionDump dump_attention(Model& model, const Sentence& first, const Sentence& second,
                                    const corpus::EmbeddingTable& emb, const std::string& dir,
                                    const std::string& prefix = "pair") {
  AttentionDump dump = compute_attention(model, first, second, emb);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto write = [&](const AttentionSide& side, const char* suffix) {
    const auto path = std::filesystem::path(dir) / (prefix + suffix);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write attention file '" + path.string() + "'");
    write_attention_csv(out, side);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
  };
  write(dump.first, "_s1.csv");
  write(dump.second, "_s2.csv");
  return dump;
}

}  // namespace phrasematch::harness
