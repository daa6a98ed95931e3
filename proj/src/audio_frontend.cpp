#include "weave/audio_frontend.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "weave/binio.hpp"
#include "weave/ops.hpp"

namespace weave {

void write_feature_file(const std::string& path,
                        const std::vector<std::vector<double>>& frames) {
    if (frames.empty() || frames[0].empty()) {
        throw CorruptFeature("feature write: need at least one frame");
    }
    const std::size_t dim = frames[0].size();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("feature write: cannot open " + path);
    out.write(kFeatureMagic, 4);
    binio::put_u32(out, kFeatureVersion);
    binio::put_u32(out, static_cast<std::uint32_t>(frames.size()));
    binio::put_u32(out, static_cast<std::uint32_t>(dim));
    for (const auto& row : frames) {
        if (row.size() != dim) {
            throw CorruptFeature("feature write: ragged frame rows");
        }
        for (double v : row) binio::put_f32(out, static_cast<float>(v));
    }
    if (!out) throw IoError("feature write: write failed for " + path);
}

std::vector<std::vector<double>> read_feature_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("feature read: cannot open " + path);
    char magic[4];
    if (!in.read(magic, 4)) {
        throw CorruptFeature("feature read: truncated header in " + path);
    }
    if (std::memcmp(magic, kFeatureMagic, 4) != 0) {
        throw SchemaError("feature read: expected magic \"AFTR\", found \"" +
                          std::string(magic, 4) + "\" in " + path);
    }
    std::uint32_t version = 0, frames = 0, dim = 0;
    if (!binio::get_u32(in, version) || !binio::get_u32(in, frames) ||
        !binio::get_u32(in, dim)) {
        throw CorruptFeature("feature read: truncated header in " + path);
    }
    if (version != kFeatureVersion) {
        throw SchemaError("feature read: unsupported version " +
                          std::to_string(version) + " in " + path);
    }
    if (frames == 0 || dim == 0) {
        throw CorruptFeature("feature read: empty matrix in " + path);
    }
    std::vector<std::vector<double>> out(frames, std::vector<double>(dim));
    for (auto& row : out) {
        for (double& v : row) {
            float f;
            if (!binio::get_f32(in, f)) {
                throw CorruptFeature("feature read: truncated payload in " +
                                     path);
            }
            if (!std::isfinite(f)) {
                throw CorruptFeature("feature read: non-finite value in " +
                                     path);
            }
            v = static_cast<double>(f);
        }
    }
    return out;
}

Tensor encode_audio(const AudioClipRef& clip, const FrontendConfig& cfg) {
    cfg.validate();
    const auto frames = read_feature_file(clip.feature_path);
    const std::size_t F = frames.size();
    const std::size_t dim = frames[0].size();
    if (static_cast<int>(dim) != cfg.d_audio) {
        throw ShapeError("encode_audio: feature dim " + std::to_string(dim) +
                         " != configured d_audio " +
                         std::to_string(cfg.d_audio));
    }
    const std::size_t K = static_cast<std::size_t>(cfg.audio_slot_count);
    Tensor out = Tensor::zeros({static_cast<Dim>(K), cfg.d_audio});
    if (F < K) {
        // fewer frames than slots: repeat frames in order
        for (std::size_t i = 0; i < K; ++i) {
            const auto& src = frames[i * F / K];
            for (std::size_t j = 0; j < dim; ++j) {
                out.at(static_cast<Dim>(i), static_cast<Dim>(j)) = src[j];
            }
        }
        return out;
    }
    const std::size_t w = F / K;
    for (std::size_t i = 0; i < K; ++i) {
        const std::size_t lo = i * w;
        const std::size_t hi = (i + 1 == K) ? F : lo + w; // last absorbs rest
        for (std::size_t j = 0; j < dim; ++j) {
            double acc = 0.0;
            for (std::size_t f = lo; f < hi; ++f) acc += frames[f][j];
            out.at(static_cast<Dim>(i), static_cast<Dim>(j)) =
                acc / static_cast<double>(hi - lo);
        }
    }
    return out;
}

AudioEmbeddingBlock project(Tape* tape, const Tensor& h,
                            const Tensor& weights, const Tensor& bias) {
    Tensor z = ops::matmul(tape, h, weights);
    z = ops::add_bias(tape, z, bias);
    return AudioEmbeddingBlock{z};
}

} // namespace weave
