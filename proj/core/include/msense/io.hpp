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
#pragma once

#include <string>

#include "msense/corpus.hpp"
#include "msense/model.hpp"

namespace msense {

/// Model file formats. Binary is the bit-exact interchange format:
/// little-endian (regardless of host), 32-bit floats, length-prefixed UTF-8
/// words; cluster centers are stored as (sum, count) so running means resume
/// exactly. Text is a human-readable export with 9-significant-digit
/// decimals; AdaGrad state is binary-only.
enum class ModelFormat { binary, text };

struct SaveMeta {
  uint32_t epochs_completed = 0;
  uint64_t seed = 0;
  bool lowercase = true;  // tokenizer setting the vocabulary was built with
};

void save_model(const ModelParams& params, const Vocabulary& vocab,
                const std::string& path, ModelFormat format,
                bool with_optimizer = false, const SaveMeta& meta = {});

struct LoadedModel {
  ModelParams params;
  Vocabulary vocab;
  HyperParams hp;  // == params.hp()
  SaveMeta meta;
  bool has_optimizer = false;
  ModelFormat format = ModelFormat::binary;
};

/// Reads either format (sniffed from the leading bytes). Errors carry the
/// path and byte offset; truncation reports expected vs. actual length, and
/// non-finite stored values are rejected.
LoadedModel load_model(const std::string& path);

enum class ExportKind { global, senses };

/// word2vec-interoperable text export: `<rows> <dim>` header then one
/// `word v1..vd` line per vector; sense rows are suffixed `word#1..#k`.
void export_word2vec_text(const ModelParams& params, const Vocabulary& vocab,
                          ExportKind kind, const std::string& path);

/// `word<TAB>count` in rank order.
void save_vocab_tsv(const Vocabulary& vocab, const std::string& path);

}  // namespace msense
