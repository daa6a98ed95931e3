#include "weave/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

#include <json.hpp>

#include "weave/binio.hpp"

namespace weave {

namespace {

using Json = nlohmann::json;

Json config_to_json(const ModelConfig& cfg, const Vocabulary& vocab) {
    return Json{{"vocab_size", cfg.vocab_size},
                {"d_model", cfg.d_model},
                {"n_layers", cfg.n_layers},
                {"n_heads", cfg.n_heads},
                {"d_ff", cfg.d_ff},
                {"max_seq_len", cfg.max_seq_len},
                {"lora_rank", cfg.lora_rank},
                {"lora_alpha", cfg.lora_alpha},
                {"d_audio", cfg.d_audio},
                {"vocab", vocab.tokens()}};
}

void put_string(std::ostream& out, const std::string& s) {
    binio::put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in, const std::string& path) {
    std::uint32_t len = 0;
    if (!binio::get_u32(in, len)) {
        throw IntegrityError("checkpoint: truncated string length in " +
                             path);
    }
    std::string s(len, '\0');
    if (!in.read(s.data(), static_cast<std::streamsize>(len))) {
        throw IntegrityError("checkpoint: truncated string payload in " +
                             path);
    }
    return s;
}

} // namespace

void write_checkpoint(const std::string& path, const Model& model,
                      const Vocabulary& vocab) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("checkpoint write: cannot open " + path);
    out.write(kCheckpointMagic, 4);
    binio::put_u32(out, kCheckpointVersion);
    put_string(out, config_to_json(model.config(), vocab).dump());
    const auto params = model.named_params();
    binio::put_u32(out, static_cast<std::uint32_t>(params.size()));
    for (const auto& [name, t] : params) {
        put_string(out, name);
        binio::put_u32(out, static_cast<std::uint32_t>(t->shape().size()));
        for (Dim d : t->shape()) {
            binio::put_u64(out, static_cast<std::uint64_t>(d));
        }
        for (double v : t->data()) binio::put_f64(out, v);
    }
    if (!out) throw IoError("checkpoint write: write failed for " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("checkpoint read: cannot open " + path);
    char magic[4];
    if (!in.read(magic, 4)) {
        throw IntegrityError("checkpoint read: truncated header in " + path);
    }
    if (std::memcmp(magic, kCheckpointMagic, 4) != 0) {
        throw SchemaError("checkpoint read: expected magic \"ILKM\", found \"" +
                          std::string(magic, 4) + "\" in " + path);
    }
    std::uint32_t version = 0;
    if (!binio::get_u32(in, version)) {
        throw IntegrityError("checkpoint read: truncated header in " + path);
    }
    if (version != kCheckpointVersion) {
        throw SchemaError("checkpoint read: version " +
                          std::to_string(version) +
                          " has no migration path (current " +
                          std::to_string(kCheckpointVersion) + ") in " + path);
    }
    Json cj = Json::parse(get_string(in, path), nullptr, false);
    if (cj.is_discarded() || !cj.is_object()) {
        throw IntegrityError("checkpoint read: corrupt config block in " +
                             path);
    }
    ModelConfig cfg;
    try {
        cfg.vocab_size = cj.at("vocab_size").get<int>();
        cfg.d_model = cj.at("d_model").get<int>();
        cfg.n_layers = cj.at("n_layers").get<int>();
        cfg.n_heads = cj.at("n_heads").get<int>();
        cfg.d_ff = cj.at("d_ff").get<int>();
        cfg.max_seq_len = cj.at("max_seq_len").get<int>();
        cfg.lora_rank = cj.at("lora_rank").get<int>();
        cfg.lora_alpha = cj.at("lora_alpha").get<double>();
        cfg.d_audio = cj.at("d_audio").get<int>();
    } catch (const Json::exception& e) {
        throw SchemaError("checkpoint read: config block missing fields in " +
                          path + ": " + e.what());
    }
    if (!cj.contains("vocab") || !cj["vocab"].is_array()) {
        throw SchemaError("checkpoint read: config block missing vocab in " +
                          path);
    }
    Vocabulary vocab =
        Vocabulary::from_tokens(cj["vocab"].get<std::vector<std::string>>());

    Model model(cfg, /*seed=*/0);
    std::uint32_t count = 0;
    if (!binio::get_u32(in, count)) {
        throw IntegrityError("checkpoint read: truncated tensor count in " +
                             path);
    }
    std::map<std::string, std::vector<double>> table;
    std::map<std::string, Shape> shapes;
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string name = get_string(in, path);
        std::uint32_t rank = 0;
        if (!binio::get_u32(in, rank) || rank > 2) {
            throw IntegrityError("checkpoint read: bad tensor rank for '" +
                                 name + "' in " + path);
        }
        Shape shape;
        std::uint64_t numel = 1;
        for (std::uint32_t r = 0; r < rank; ++r) {
            std::uint64_t d = 0;
            if (!binio::get_u64(in, d)) {
                throw IntegrityError("checkpoint read: truncated shape for '" +
                                     name + "' in " + path);
            }
            shape.push_back(static_cast<Dim>(d));
            numel *= d;
        }
        std::vector<double> data(numel);
        for (double& v : data) {
            if (!binio::get_f64(in, v)) {
                throw IntegrityError(
                    "checkpoint read: truncated payload for '" + name +
                    "' in " + path);
            }
        }
        table.emplace(name, std::move(data));
        shapes.emplace(name, std::move(shape));
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw IntegrityError("checkpoint read: trailing bytes in " + path);
    }

    for (auto& [name, t] : model.named_params()) {
        auto it = table.find(name);
        if (it == table.end()) {
            throw SchemaError("checkpoint read: missing tensor '" + name +
                              "' in " + path);
        }
        if (shapes[name] != t.shape() ||
            it->second.size() != t.data().size()) {
            throw SchemaError("checkpoint read: shape mismatch for '" + name +
                              "': file " + shape_str(shapes[name]) +
                              " vs model " + shape_str(t.shape()));
        }
        t.data() = std::move(it->second);
        table.erase(it);
    }
    if (!table.empty()) {
        throw SchemaError("checkpoint read: unknown tensor '" +
                          table.begin()->first + "' in " + path);
    }
    return Checkpoint{std::move(model), std::move(vocab)};
}

} // namespace weave
