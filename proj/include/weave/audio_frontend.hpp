#pragma once

#include <string>
#include <vector>

#include "weave/errors.hpp"
#include "weave/tape.hpp"
#include "weave/tensor.hpp"

namespace weave {

struct AudioClipRef {
    std::string id;
    std::string feature_path; // frames × feature_dim matrix on disk
    double duration_s = 10.0;
};

// Z_A: the K-slot block spliced into model input sequences.
struct AudioEmbeddingBlock {
    Tensor slots; // [K × d_model]
};

struct FrontendConfig {
    // Desk-scale defaults; the reference setup uses K=32, d_audio=768,
    // d_model=4096.
    int audio_slot_count = 8;
    int d_audio = 16;
    int d_model = 64;

    void validate() const {
        if (audio_slot_count < 1 || d_audio < 1 || d_model < 1) {
            throw ConfigError("frontend config: all dims must be positive");
        }
    }
};

// Feature matrix files: header {magic "AFTR", version u32, frames u32,
// feature_dim u32} followed by row-major little-endian f32 values.
inline constexpr char kFeatureMagic[5] = "AFTR";
inline constexpr std::uint32_t kFeatureVersion = 1;

void write_feature_file(const std::string& path,
                        const std::vector<std::vector<double>>& frames);

// Throws CorruptFeature on truncation/NaN; SchemaError on wrong magic or
// unknown version.
std::vector<std::vector<double>> read_feature_file(const std::string& path);

// Frozen stub encoder E_A: mean-pools input frames into exactly K slot
// vectors. frames >= K: K contiguous windows of floor(F/K), last window
// absorbs the remainder. frames < K: slot i reads frame floor(i*F/K)
// (frames repeat so the block still has K rows).
Tensor encode_audio(const AudioClipRef& clip, const FrontendConfig& cfg);

// Linear projection P: slots = h·weights + bias, gradient-tracked when a
// tape is supplied.
AudioEmbeddingBlock project(Tape* tape, const Tensor& h,
                            const Tensor& weights, const Tensor& bias);

} // namespace weave
