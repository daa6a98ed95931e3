#include "weave/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

namespace weave {

namespace {

std::string fmt_loss(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<Tensor> prepare_params(Model& model, const TrainConfig& cfg) {
    cfg.validate();
    model.set_trainable(cfg.freeze_backbone, cfg.freeze_projection,
                        cfg.train_norm_gains);
    return model.trainable_params();
}

} // namespace

std::vector<TrainItem> build_train_items(const std::vector<Json>& records,
                                         const Vocabulary& vocab,
                                         const FrontendConfig& fcfg,
                                         bool interleaved) {
    std::vector<TrainItem> items;
    items.reserve(records.size());
    // dummy block: build_* only reads K (row count) from it
    AudioEmbeddingBlock shape_block{
        Tensor::zeros({fcfg.audio_slot_count, fcfg.d_model})};
    for (const Json& rec : records) {
        require_keys(rec, {"id", "audio", "answer"}, "train record");
        const std::string prompt_key =
            interleaved ? "interleaved_prompt" : "original_prompt";
        require_keys(rec, {prompt_key}, "train record " +
                                            rec["id"].get<std::string>());
        AudioClipRef clip;
        clip.id = rec["audio"].value("id", "");
        clip.feature_path = rec["audio"].at("feature_path").get<std::string>();
        clip.duration_s = rec["audio"].value("duration_s", 10.0);

        std::vector<TokenId> prompt_ids = {Vocabulary::kBos};
        for (TokenId id : vocab.encode(rec[prompt_key].get<std::string>())) {
            prompt_ids.push_back(id);
        }
        std::vector<TokenId> answer_ids =
            vocab.encode(rec["answer"].get<std::string>());
        answer_ids.push_back(Vocabulary::kEos);

        TrainItem item;
        item.seq = interleaved
                       ? build_interleaved(prompt_ids, answer_ids, shape_block)
                       : build_noninterleaved(prompt_ids, answer_ids,
                                              shape_block);
        item.features = encode_audio(clip, fcfg);
        items.push_back(std::move(item));
    }
    return items;
}

Trainer::Trainer(Model& model, TrainConfig cfg)
    : model_(model), cfg_(cfg),
      opt_(prepare_params(model, cfg),
           AdamConfig{cfg.learning_rate, 0.9, 0.999, 1e-8}) {}

double Trainer::train_step(const std::vector<TrainItem>& batch) {
    if (batch.empty()) throw EmptyDataset("train_step: empty batch");
    Tape tape;
    Tensor acc;
    bool have_acc = false;
    long long supervised = 0;
    for (const TrainItem& item : batch) {
        AudioEmbeddingBlock block =
            model_.project_audio(&tape, item.features);
        Tensor logits = model_.forward_seq(&tape, item.seq, block);
        const auto labels =
            supervision_labels(item.seq, cfg_.mask_prompt_text);
        long long n = 0;
        for (TokenId l : labels) n += (l != ops::kIgnoreIndex);
        if (n == 0) {
            throw NoSupervisedTokens(
                "train_step: sequence with no supervised positions");
        }
        supervised += n;
        Tensor item_loss = ops::softmax_cross_entropy_ignore(
            &tape, logits, labels, ops::kIgnoreIndex, ops::Reduction::Sum);
        acc = have_acc ? ops::add(&tape, acc, item_loss) : item_loss;
        have_acc = true;
    }
    Tensor loss = cfg_.loss_reduction == ops::Reduction::Mean
                      ? ops::scale(&tape, acc,
                                   1.0 / static_cast<double>(supervised))
                      : acc;
    const double value = loss.item();
    if (!std::isfinite(value)) {
        // weights untouched; the caller's last checkpoint stays valid
        throw DivergenceError("train_step: non-finite loss " +
                              fmt_loss(value));
    }
    opt_.zero_grad();
    tape.backward(loss);
    opt_.step();
    return value;
}

double Trainer::eval_loss(const std::vector<TrainItem>& items) {
    if (items.empty()) throw EmptyDataset("eval_loss: empty dataset");
    double total = 0.0;
    long long supervised = 0;
    for (const TrainItem& item : items) {
        AudioEmbeddingBlock block =
            model_.project_audio(nullptr, item.features);
        Tensor logits = model_.forward_seq(nullptr, item.seq, block);
        const auto labels =
            supervision_labels(item.seq, cfg_.mask_prompt_text);
        long long n = 0;
        for (TokenId l : labels) n += (l != ops::kIgnoreIndex);
        if (n == 0) continue;
        supervised += n;
        total += ops::softmax_cross_entropy_ignore(nullptr, logits, labels,
                                                   ops::kIgnoreIndex,
                                                   ops::Reduction::Sum)
                     .item();
    }
    if (supervised == 0) {
        throw NoSupervisedTokens("eval_loss: nothing supervised");
    }
    return cfg_.loss_reduction == ops::Reduction::Mean
               ? total / static_cast<double>(supervised)
               : total;
}

std::string Trainer::run(const std::vector<TrainItem>& items,
                         const Vocabulary& vocab,
                         const std::string& out_dir) {
    if (items.empty()) throw EmptyDataset("train run: empty dataset");
    std::filesystem::create_directories(out_dir);
    const std::string log_path = out_dir + "/train.log";
    const std::string ckpt_path = out_dir + "/model.ckpt";
    FileLock lock(ckpt_path);
    std::ofstream log(log_path, std::ios::binary | std::ios::app);
    if (!log) throw IoError("train run: cannot open " + log_path);

    Rng shuffle_rng(cfg_.seed);
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t cursor = items.size(); // forces a shuffle on first use

    for (int step = 1; step <= cfg_.steps; ++step) {
        std::vector<TrainItem> batch;
        for (int b = 0; b < cfg_.batch_size; ++b) {
            if (cursor >= order.size()) {
                shuffle_rng.shuffle(order);
                cursor = 0;
            }
            batch.push_back(items[order[cursor++]]);
        }
        const double loss = train_step(batch);
        log << step << '\t' << fmt_loss(loss) << '\n';
        if (cfg_.checkpoint_every > 0 && step % cfg_.checkpoint_every == 0 &&
            step != cfg_.steps) {
            write_checkpoint(ckpt_path, model_, vocab);
        }
    }
    log.flush();
    if (!log) throw IoError("train run: write failed for " + log_path);
    write_checkpoint(ckpt_path, model_, vocab);
    return ckpt_path;
}

} // namespace weave
