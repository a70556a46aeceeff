/*
 * Copyright 2026 The msense authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "msense/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace msense {

namespace {

constexpr char kBinaryMagic[5] = {'M', 'S', 'S', 'G', '\0'};
constexpr uint8_t kFormatVersion = 1;
constexpr uint8_t kFlagOptimizer = 0x01;
constexpr uint8_t kFlagLowercase = 0x02;

// --- Little-endian primitives -------------------------------------------------

class BinaryWriter {
 public:
  BinaryWriter(const std::string& path)
      : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error(path + ": cannot open for writing");
  }
  void bytes(const void* p, size_t n) {
    out_.write(static_cast<const char*>(p), std::streamsize(n));
    if (!out_)
      throw std::runtime_error(path_ + ": write failed at byte " +
                               std::to_string(offset_));
    offset_ += n;
  }
  void u8(uint8_t v) { bytes(&v, 1); }
  void u32(uint32_t v) {
    char b[4] = {char(v), char(v >> 8), char(v >> 16), char(v >> 24)};
    bytes(b, 4);
  }
  void u64(uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = char(v >> (8 * i));
    bytes(b, 8);
  }
  void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }
  void floats(std::span<const float> v) {
    if constexpr (std::endian::native == std::endian::little) {
      bytes(v.data(), v.size() * sizeof(float));
    } else {
      for (float x : v) f32(x);
    }
  }
  void str(const std::string& s) {
    u32(uint32_t(s.size()));
    bytes(s.data(), s.size());
  }
  void close() {
    out_.close();
    if (!out_) throw std::runtime_error(path_ + ": close failed");
  }

 private:
  std::string path_;
  std::ofstream out_;
  uint64_t offset_ = 0;
};

class BinaryReader {
 public:
  BinaryReader(const std::string& path)
      : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error(path + ": cannot open");
    in_.seekg(0, std::ios::end);
    file_size_ = uint64_t(in_.tellg());
    in_.seekg(0);
  }
  void bytes(void* p, size_t n) {
    in_.read(static_cast<char*>(p), std::streamsize(n));
    if (size_t(in_.gcount()) != n)
      throw std::runtime_error(
          path_ + ": truncated file: expected " + std::to_string(n) +
          " bytes at offset " + std::to_string(offset_) + ", file has " +
          std::to_string(file_size_) + " bytes");
    offset_ += n;
  }
  uint8_t u8() {
    uint8_t v;
    bytes(&v, 1);
    return v;
  }
  uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 |
           uint32_t(b[3]) << 24;
  }
  uint64_t u64() {
    unsigned char b[8];
    bytes(b, 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  void floats(std::span<float> v, const char* what) {
    if constexpr (std::endian::native == std::endian::little) {
      bytes(v.data(), v.size() * sizeof(float));
    } else {
      for (float& x : v) x = f32();
    }
    for (float x : v)
      if (!std::isfinite(x))
        throw std::runtime_error(path_ + ": non-finite " + what +
                                 " value near byte " + std::to_string(offset_));
  }
  std::string str() {
    const uint32_t n = u32();
    if (n > file_size_)
      throw std::runtime_error(path_ + ": implausible string length " +
                               std::to_string(n) + " at offset " +
                               std::to_string(offset_));
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  uint64_t offset() const { return offset_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  uint64_t file_size_ = 0;
  uint64_t offset_ = 0;
};

void format_float(std::string& out, float v) {
  char buf[32];
  const auto res =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  out.append(buf, res.ptr);
}

// --- Binary format --------------------------------------------------------------

void save_binary(const ModelParams& params, const Vocabulary& vocab,
                 const std::string& path, bool with_optimizer,
                 const SaveMeta& meta) {
  const HyperParams& hp = params.hp();
  BinaryWriter w(path);
  w.bytes(kBinaryMagic, 5);
  w.u8(kFormatVersion);
  w.u8(uint8_t(hp.mode));
  w.u8(uint8_t((with_optimizer ? kFlagOptimizer : 0) |
               (meta.lowercase ? kFlagLowercase : 0)));
  w.u32(hp.dim);
  w.u64(vocab.size());
  w.u32(hp.senses);
  w.f32(hp.lambda);
  w.u32(hp.max_senses);
  w.u32(hp.window);
  w.u32(hp.negatives);
  w.f32(hp.lr0);
  w.u32(hp.epochs);
  w.u32(meta.epochs_completed);
  w.u64(hp.min_count);
  w.u32(hp.multi_sense_top_m);
  w.f32(hp.subsample);
  w.u64(meta.seed);
  w.u64(vocab.total_tokens);

  for (WordId id = 0; id < vocab.size(); ++id) {
    w.str(vocab.words[id]);
    w.u64(vocab.counts[id]);
    const uint32_t k = params.num_senses(id);
    w.u32(k);
    w.floats(params.global(id));
    for (uint32_t s = 0; s < k; ++s) {
      w.u64(params.cluster_count(id, s));
      w.floats(params.cluster_sum(id, s));
      w.floats(params.sense_vector(id, s));
    }
    if (with_optimizer) {
      w.floats(params.global_adagrad(id));
      for (uint32_t s = 0; s < k; ++s) w.floats(params.sense_adagrad(id, s));
    }
  }
  w.close();
}

LoadedModel load_binary(BinaryReader& r) {
  const uint8_t version = r.u8();
  if (version != kFormatVersion)
    throw std::runtime_error(r.path() + ": unsupported format version " +
                             std::to_string(version) + " (expected " +
                             std::to_string(kFormatVersion) + ")");
  const uint8_t mode_byte = r.u8();
  if (mode_byte > 2)
    throw std::runtime_error(r.path() + ": invalid mode byte");
  const uint8_t flags = r.u8();

  HyperParams hp;
  hp.mode = Mode(mode_byte);
  hp.dim = r.u32();
  const uint64_t vocab_size = r.u64();
  hp.senses = r.u32();
  hp.lambda = r.f32();
  hp.max_senses = r.u32();
  hp.window = r.u32();
  hp.negatives = r.u32();
  hp.lr0 = r.f32();
  hp.epochs = r.u32();
  SaveMeta meta;
  meta.epochs_completed = r.u32();
  hp.min_count = r.u64();
  hp.multi_sense_top_m = r.u32();
  hp.subsample = r.f32();
  meta.seed = r.u64();
  const uint64_t total_tokens = r.u64();
  meta.lowercase = (flags & kFlagLowercase) != 0;
  const bool with_optimizer = (flags & kFlagOptimizer) != 0;

  LoadedModel m{ModelParams(size_t(vocab_size), hp), Vocabulary{}, hp, meta,
                with_optimizer, ModelFormat::binary};
  m.vocab.words.reserve(vocab_size);
  m.vocab.counts.reserve(vocab_size);
  m.vocab.total_tokens = total_tokens;

  for (WordId id = 0; id < vocab_size; ++id) {
    m.vocab.words.push_back(r.str());
    m.vocab.counts.push_back(r.u64());
    const uint32_t k = r.u32();
    if (hp.mode == Mode::npmssg)
      m.params.ensure_senses(id, k);
    else if (k != m.params.num_senses(id))
      throw std::runtime_error(
          r.path() + ": sense count mismatch for word " +
          std::to_string(id) + " near byte " + std::to_string(r.offset()));
    r.floats(m.params.global(id), "global vector");
    for (uint32_t s = 0; s < k; ++s) {
      m.params.set_cluster_count(id, s, r.u64());
      r.floats(m.params.cluster_sum(id, s), "cluster sum");
      r.floats(m.params.sense_vector(id, s), "sense vector");
    }
    if (with_optimizer) {
      r.floats(m.params.global_adagrad(id), "AdaGrad state");
      for (uint32_t s = 0; s < k; ++s)
        r.floats(m.params.sense_adagrad(id, s), "AdaGrad state");
    }
  }
  m.vocab.rebuild_index();
  return m;
}

// --- Text format -----------------------------------------------------------------

void save_text(const ModelParams& params, const Vocabulary& vocab,
               const std::string& path, const SaveMeta&) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  const HyperParams& hp = params.hp();
  out << "MSSG " << vocab.size() << ' ' << params.dim() << ' '
      << mode_name(hp.mode) << '\n';
  std::string line;
  for (WordId id = 0; id < vocab.size(); ++id) {
    const uint32_t k = params.num_senses(id);
    out << vocab.words[id] << ' ' << vocab.counts[id] << ' ' << k << '\n';
    auto emit_vec = [&](std::span<const float> v) {
      line.clear();
      for (size_t i = 0; i < v.size(); ++i) {
        if (i > 0) line += ' ';
        format_float(line, v[i]);
      }
      out << line << '\n';
    };
    emit_vec(params.global(id));
    for (uint32_t s = 0; s < k; ++s) {
      emit_vec(params.sense_vector(id, s));
      line = std::to_string(params.cluster_count(id, s));
      for (float x : params.cluster_sum(id, s)) {
        line += ' ';
        format_float(line, x);
      }
      out << line << '\n';
    }
  }
  out.close();
  if (!out) throw std::runtime_error(path + ": write failed");
}

class LineSource {
 public:
  LineSource(const std::string& path) : path_(path), in_(path) {
    if (!in_) throw std::runtime_error(path + ": cannot open");
  }
  std::istringstream next(const char* what) {
    std::string line;
    if (!std::getline(in_, line))
      throw std::runtime_error(path_ + ": truncated file: expected " + what +
                               " at line " + std::to_string(lineno_ + 1));
    ++lineno_;
    return std::istringstream(line);
  }

 private:
  std::string path_;
  std::ifstream in_;
  size_t lineno_ = 0;
};

LoadedModel load_text(const std::string& path) {
  LineSource src(path);
  auto header = src.next("header");
  std::string magic, mode_str;
  uint64_t vocab_size = 0;
  uint32_t dim = 0;
  header >> magic >> vocab_size >> dim >> mode_str;
  if (magic != "MSSG" || header.fail())
    throw std::runtime_error(path + ": malformed header");

  // First pass over per-word sense counts happens inline; hp.senses and the
  // top-m boundary are reconstructed from the (rank-ordered) k values.
  struct WordRec {
    std::string word;
    uint64_t count;
    uint32_t k;
    std::vector<float> global;
    std::vector<uint64_t> ccounts;
    std::vector<std::vector<float>> csums, senses;
  };
  std::vector<WordRec> recs(vocab_size);
  auto read_floats = [&](std::istringstream& ss, std::vector<float>& v,
                         const char* what) {
    v.resize(dim);
    for (uint32_t i = 0; i < dim; ++i) {
      ss >> v[i];
      if (ss.fail())
        throw std::runtime_error(path + ": malformed " + what + " line");
      if (!std::isfinite(v[i]))
        throw std::runtime_error(path + ": non-finite value in " + what);
    }
  };
  for (auto& rec : recs) {
    auto head = src.next("word record");
    head >> rec.word >> rec.count >> rec.k;
    if (head.fail()) throw std::runtime_error(path + ": malformed word line");
    auto gline = src.next("global vector");
    read_floats(gline, rec.global, "global vector");
    rec.ccounts.resize(rec.k);
    rec.csums.resize(rec.k);
    rec.senses.resize(rec.k);
    for (uint32_t s = 0; s < rec.k; ++s) {
      auto sline = src.next("sense vector");
      read_floats(sline, rec.senses[s], "sense vector");
      auto cline = src.next("cluster line");
      cline >> rec.ccounts[s];
      if (cline.fail())
        throw std::runtime_error(path + ": malformed cluster line");
      read_floats(cline, rec.csums[s], "cluster sum");
    }
  }

  HyperParams hp;
  hp.dim = dim;
  hp.mode = mode_from_name(mode_str);
  if (hp.mode == Mode::mssg && !recs.empty()) {
    hp.senses = recs[0].k;
    uint32_t m = 0;
    while (m < recs.size() && recs[m].k == hp.senses) ++m;
    hp.multi_sense_top_m = (m == recs.size()) ? 0 : m;
  }

  LoadedModel out{ModelParams(size_t(vocab_size), hp), Vocabulary{}, hp,
                  SaveMeta{}, false, ModelFormat::text};
  for (WordId id = 0; id < vocab_size; ++id) {
    auto& rec = recs[id];
    out.vocab.words.push_back(std::move(rec.word));
    out.vocab.counts.push_back(rec.count);
    out.vocab.total_tokens += rec.count;
    if (hp.mode == Mode::npmssg)
      out.params.ensure_senses(id, rec.k);
    else if (rec.k != out.params.num_senses(id))
      throw std::runtime_error(path + ": inconsistent sense counts");
    std::copy(rec.global.begin(), rec.global.end(),
              out.params.global(id).begin());
    for (uint32_t s = 0; s < rec.k; ++s) {
      out.params.set_cluster_count(id, s, rec.ccounts[s]);
      std::copy(rec.csums[s].begin(), rec.csums[s].end(),
                out.params.cluster_sum(id, s).begin());
      std::copy(rec.senses[s].begin(), rec.senses[s].end(),
                out.params.sense_vector(id, s).begin());
    }
  }
  out.vocab.rebuild_index();
  return out;
}

}  // namespace

// --- Public API --------------------------------------------------------------------

void save_model(const ModelParams& params, const Vocabulary& vocab,
                const std::string& path, ModelFormat format,
                bool with_optimizer, const SaveMeta& meta) {
  if (vocab.size() != params.vocab_size())
    throw std::invalid_argument("save_model: vocabulary/params size mismatch");
  if (format == ModelFormat::text) {
    if (with_optimizer)
      throw std::invalid_argument("optimizer state requires the binary format");
    save_text(params, vocab, path, meta);
    return;
  }
  save_binary(params, vocab, path, with_optimizer, meta);
}

LoadedModel load_model(const std::string& path) {
  {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw std::runtime_error(path + ": cannot open");
    char head[5] = {0, 0, 0, 0, 0};
    probe.read(head, 5);
    if (probe.gcount() == 5 && std::memcmp(head, "MSSG ", 5) == 0)
      return load_text(path);
  }
  BinaryReader r(path);
  char magic[5];
  r.bytes(magic, 5);
  if (std::memcmp(magic, kBinaryMagic, 5) != 0)
    throw std::runtime_error(path + ": not a model file (bad magic)");
  return load_binary(r);
}

void export_word2vec_text(const ModelParams& params, const Vocabulary& vocab,
                          ExportKind kind, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  std::string line;
  auto emit = [&](const std::string& token, std::span<const float> v) {
    line = token;
    for (float x : v) {
      line += ' ';
      format_float(line, x);
    }
    out << line << '\n';
  };
  if (kind == ExportKind::global) {
    out << vocab.size() << ' ' << params.dim() << '\n';
    for (WordId id = 0; id < vocab.size(); ++id)
      emit(vocab.words[id], params.global(id));
  } else {
    out << params.total_senses() << ' ' << params.dim() << '\n';
    for (WordId id = 0; id < vocab.size(); ++id)
      for (uint32_t s = 0; s < params.num_senses(id); ++s)
        emit(vocab.words[id] + "#" + std::to_string(s + 1),
             params.sense_vector(id, s));
  }
  out.close();
  if (!out) throw std::runtime_error(path + ": write failed");
}

void save_vocab_tsv(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  for (WordId id = 0; id < vocab.size(); ++id)
    out << vocab.words[id] << '\t' << vocab.counts[id] << '\n';
  out.close();
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace msense
