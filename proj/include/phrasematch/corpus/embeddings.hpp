#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "phrasematch/numcore/matrix.hpp"
#include "phrasematch/phrasebank.hpp"

namespace phrasematch::corpus {

inline constexpr std::size_t kDefaultEmbeddingDim = 300;
inline constexpr double kUnknownRange = 0.01;

/// Frozen word vectors. Row 0 is the single unknown-word vector shared by
/// every out-of-vocabulary token.
class EmbeddingTable {
 public:
  static constexpr std::size_t kUnknownId = 0;

  EmbeddingTable() = default;
  /// The unknown row is drawn uniformly from [-0.01, 0.01] using `seed`.
  EmbeddingTable(std::size_t dim, std::uint64_t seed) : dim_(dim) {
    require(dim >= 1, "embedding dimension must be >= 1");
    std::mt19937_64 rng(seed);
    data_.reserve(dim);
    for (std::size_t j = 0; j < dim; ++j)
      data_.push_back(uniform(rng, -kUnknownRange, kUnknownRange));
  }

  /// Adds a known token. Re-adding a token keeps the first vector.
  std::size_t add(const std::string& token, std::span<const double> vec) {
    if (vec.size() != dim_)
      throw DimensionError("embedding for '" + token + "' has " + std::to_string(vec.size()) +
                           " values, table dimension is " + std::to_string(dim_));
    if (auto it = index_.find(token); it != index_.end()) return it->second;
    const std::size_t id = rows();
    data_.insert(data_.end(), vec.begin(), vec.end());
    index_.emplace(token, id);
    return id;
  }

  std::size_t lookup(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kUnknownId : it->second;
  }
  bool contains(std::string_view token) const { return index_.count(std::string(token)) > 0; }

  std::span<const double> row(std::size_t id) const {
    require(id < rows(), "embedding id out of range");
    return {data_.data() + id * dim_, dim_};
  }
  std::span<const double> unknown() const { return row(kUnknownId); }

  std::size_t dim() const noexcept { return dim_; }
  /// Known tokens plus the unknown row.
  std::size_t rows() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t known() const noexcept { return index_.size(); }

  /// Rows for `ids`, stacked.
  Matrix gather(std::span<const std::size_t> ids) const {
    Matrix m(ids.size(), dim_);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      auto r = row(ids[i]);
      std::copy(r.begin(), r.end(), m.row(i).begin());
    }
    return m;
  }

  void index(Sentence& s) const {
    s.token_ids.clear();
    s.token_ids.reserve(s.tokens.size());
    for (const auto& t : s.tokens) s.token_ids.push_back(lookup(t));
  }

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct EmbeddingCoverage {
  std::size_t vocabulary = 0;  ///< distinct corpus tokens requested
  std::size_t covered = 0;     ///< of those, found in the file
  std::size_t file_lines = 0;
  std::size_t oov() const noexcept { return vocabulary - covered; }
};

/// Loads a GloVe-style text file (token followed by `dim` reals per line).
/// When `vocabulary` is non-empty only those tokens are kept.
inline EmbeddingTable load_embeddings(const std::string& path,
                                      const std::set<std::string>& vocabulary,
                                      std::size_t dim, std::uint64_t seed,
                                      EmbeddingCoverage* coverage = nullptr) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file " + path);
  EmbeddingTable table(dim, seed);
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> vec;
  vec.reserve(dim);
  bool first_record = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::string_view rest(line);
    auto next_field = [&rest]() -> std::string_view {
      const auto b = rest.find_first_not_of(" \t");
      if (b == std::string_view::npos) {
        rest = {};
        return {};
      }
      rest.remove_prefix(b);
      const auto e = rest.find_first_of(" \t");
      auto f = rest.substr(0, e);
      rest.remove_prefix(e == std::string_view::npos ? rest.size() : e);
      return f;
    };
    const std::string token(next_field());
    vec.clear();
    for (auto f = next_field(); !f.empty(); f = next_field()) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || p != f.data() + f.size())
        throw LoadError(path + ":" + std::to_string(line_no) + ": unparsable real '" +
                        std::string(f) + "'");
      vec.push_back(v);
    }
    if (vec.size() != dim) {
      if (first_record)
        throw ConfigError(path + ":" + std::to_string(line_no) + ": embedding dimension " +
                          std::to_string(vec.size()) + " does not match configured " +
                          std::to_string(dim));
      throw LoadError(path + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(dim + 1) + " fields, found " +
                      std::to_string(vec.size() + 1));
    }
    first_record = false;
    if (coverage) ++coverage->file_lines;
    if (vocabulary.empty() || vocabulary.count(token)) table.add(token, vec);
  }
  if (coverage) {
    coverage->vocabulary = vocabulary.size();
    coverage->covered = 0;
    for (const auto& t : vocabulary) coverage->covered += table.contains(t) ? 1 : 0;
  }
  return table;
}

}  // namespace phrasematch::corpus
