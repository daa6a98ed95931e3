#pragma once

#include <memory>
#include <string>

#include "weave/model.hpp"
#include "weave/tokenizer.hpp"

namespace weave {

// Checkpoint file: {magic "ILKM", version u32, config block} + named tensor
// table. The config block is a length-prefixed JSON object carrying the
// model config and the vocabulary, so a checkpoint is self-contained for
// evaluation. All payloads little-endian; tensors stored as f64.
inline constexpr char kCheckpointMagic[5] = "ILKM";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    Model model;
    Vocabulary vocab;
};

void write_checkpoint(const std::string& path, const Model& model,
                      const Vocabulary& vocab);

// Truncation → IntegrityError (every field is length-checked and trailing
// bytes are rejected). Unknown magic or version → SchemaError; there is no
// migration table, so version bumps refuse rather than reinterpret.
Checkpoint read_checkpoint(const std::string& path);

} // namespace weave
