#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "phrasematch/matcher.hpp"

namespace phrasematch {

/// Text checkpoint, version 1:
///
///   phrasematch-checkpoint 1
///   <key> <value>            config echo, one per line
///   meta <key> <value>       free-form run metadata (optional, repeated)
///   params <count>
///   param <name> <rows> <cols>
///   <row of hexadecimal floats>   repeated <rows> times
///   ...
///   end
///
/// Values are written as hexadecimal floating point, so a save/load round
/// trip is bit-exact and the byte stream depends only on the model.
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  Model model;
  std::map<std::string, std::string> metadata;
};

namespace detail {

inline std::string hex_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  return std::string(buf, p);
}

inline double parse_hex_double(const std::string& s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
  if (ec != std::errc() || p != s.data() + s.size())
    throw LoadError("checkpoint: bad value '" + s + "'");
  return v;
}

}  // namespace detail

inline void save_checkpoint(std::ostream& out, const Model& model,
                            const std::map<std::string, std::string>& metadata = {}) {
  const TaskConfig& c = model.config;
  out << "phrasematch-checkpoint " << kCheckpointVersion << '\n'
      << "task " << task_name(c.task) << '\n'
      << "pooling " << pooling_name(c.pooling.kind) << '\n'
      << "k " << c.pooling.k << '\n'
      << "hidden " << c.hidden1 << ' ' << c.hidden2 << '\n'
      << "embedding_dim " << c.embedding_dim << '\n'
      << "max_phrase_len " << c.max_phrase_len << '\n'
      << "features " << feature_set_name(c.features) << '\n'
      << "extra_width " << c.extra_width << '\n'
      << "seed " << model.seed << '\n';
  for (const auto& [k, v] : metadata) {
    if (k.find_first_of(" \t\n") != std::string::npos || v.find('\n') != std::string::npos)
      throw ContractError("checkpoint metadata must be single-line, key without spaces");
    out << "meta " << k << ' ' << v << '\n';
  }
  const auto params = model.parameters();
  out << "params " << params.size() << '\n';
  for (const auto* p : params) {
    out << "param " << p->name << ' ' << p->value.rows() << ' ' << p->value.cols() << '\n';
    for (std::size_t r = 0; r < p->value.rows(); ++r) {
      for (std::size_t j = 0; j < p->value.cols(); ++j) {
        if (j) out << ' ';
        out << detail::hex_double(p->value(r, j));
      }
      out << '\n';
    }
  }
  out << "end\n";
}

inline void save_checkpoint(const std::string& path, const Model& model,
                            const std::map<std::string, std::string>& metadata = {}) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path);
  save_checkpoint(out, model, metadata);
  if (!out) throw IoError("failed writing checkpoint " + path);
}

inline Checkpoint load_checkpoint(std::istream& in) {
  std::string word;
  int version = 0;
  if (!(in >> word >> version) || word != "phrasematch-checkpoint")
    throw LoadError("checkpoint: missing header");
  if (version != kCheckpointVersion)
    throw LoadError("checkpoint: unsupported version " + std::to_string(version));

  TaskConfig cfg;
  std::uint64_t seed = 0;
  Checkpoint ck;
  std::size_t param_count = 0;
  while (in >> word) {
    if (word == "task") {
      std::string v;
      in >> v;
      cfg.task = parse_task(v);
    } else if (word == "pooling") {
      std::string v;
      in >> v;
      cfg.pooling.kind = parse_pooling(v);
    } else if (word == "k") {
      in >> cfg.pooling.k;
    } else if (word == "hidden") {
      in >> cfg.hidden1 >> cfg.hidden2;
    } else if (word == "embedding_dim") {
      in >> cfg.embedding_dim;
    } else if (word == "max_phrase_len") {
      in >> cfg.max_phrase_len;
    } else if (word == "features") {
      std::string v;
      in >> v;
      cfg.features = parse_feature_set(v);
    } else if (word == "extra_width") {
      in >> cfg.extra_width;
    } else if (word == "seed") {
      in >> seed;
    } else if (word == "meta") {
      std::string key, value;
      in >> key;
      in.get();
      std::getline(in, value);
      ck.metadata[key] = value;
    } else if (word == "params") {
      in >> param_count;
      break;
    } else {
      throw LoadError("checkpoint: unknown field '" + word + "'");
    }
    if (!in) throw LoadError("checkpoint: malformed field '" + word + "'");
  }
  if (!in) throw LoadError("checkpoint: truncated before parameters");

  ck.model = Model(cfg, seed);
  auto params = ck.model.parameters();
  if (param_count != params.size())
    throw LoadError("checkpoint: expected " + std::to_string(params.size()) + " parameters, found " +
                    std::to_string(param_count));
  for (auto* p : params) {
    std::string name;
    std::size_t rows = 0, cols = 0;
    if (!(in >> word >> name >> rows >> cols) || word != "param")
      throw LoadError("checkpoint: malformed parameter header");
    if (name != p->name || rows != p->value.rows() || cols != p->value.cols())
      throw LoadError("checkpoint: parameter " + name + " " + Matrix::shape_string(rows, cols) +
                      " does not match expected " + p->name + " " + p->value.shape());
    for (auto& x : p->value.data()) {
      if (!(in >> word)) throw LoadError("checkpoint: truncated values in " + name);
      x = detail::parse_hex_double(word);
    }
  }
  if (!(in >> word) || word != "end") throw LoadError("checkpoint: missing end marker");
  return ck;
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  return load_checkpoint(in);
}

}  // namespace phrasematch
