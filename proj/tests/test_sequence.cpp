#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "weave/rng.hpp"
#include "weave/sequence.hpp"
#include "weave/tape.hpp"
#include "testing.hpp"

using namespace weave;
using ops::kIgnoreIndex;

namespace {

AudioEmbeddingBlock block_of(int k, int d, Rng& rng) {
    AudioEmbeddingBlock b;
    b.slots = testing::rand_tensor({k, d}, rng);
    return b;
}

std::vector<Kind> kinds_of(const TokenSequence& seq) {
    std::vector<Kind> out;
    for (const Position& p : seq.positions) out.push_back(p.kind);
    return out;
}

} // namespace

TEST_CASE("non-interleaved hand case K=2") {
    Rng rng(1);
    AudioEmbeddingBlock block = block_of(2, 4, rng);
    TokenSequence seq = build_noninterleaved({7}, {9}, block);
    REQUIRE(seq.size() == 4);
    CHECK(kinds_of(seq) ==
          std::vector<Kind>{Kind::Audio, Kind::Audio, Kind::Text, Kind::Text});
    CHECK(seq.positions[0].label == kIgnoreIndex);
    CHECK(seq.positions[1].label == kIgnoreIndex);
    CHECK(seq.positions[2].token_id == 7);
    CHECK(seq.positions[2].label == 9); // next token is text
    CHECK(seq.positions[3].token_id == 9);
    CHECK(seq.positions[3].label == kIgnoreIndex); // nothing after
    CHECK(seq.positions[0].audio_slot == 0);
    CHECK(seq.positions[1].audio_slot == 1);
    CHECK(seq.positions[2].source == Source::Prompt);
    CHECK(seq.positions[3].source == Source::Answer);
}

TEST_CASE("non-interleaved boundary cases") {
    Rng rng(2);
    AudioEmbeddingBlock block = block_of(3, 4, rng);
    TokenSequence seq = build_noninterleaved({5, 6}, {}, block);
    CHECK(seq.size() == 5);
    CHECK(seq.positions[3].label == 6);

    CHECK_THROWS_AS(
        build_noninterleaved({5, Vocabulary::kAudioPlaceholder}, {}, block),
        PlaceholderInNonInterleaved);
}

TEST_CASE("interleaved hand case: placeholder mid-prompt") {
    Rng rng(3);
    AudioEmbeddingBlock block = block_of(2, 4, rng);
    TokenSequence seq = build_interleaved(
        {7, Vocabulary::kAudioPlaceholder, 8}, {}, block);
    REQUIRE(seq.size() == 4);
    CHECK(kinds_of(seq) ==
          std::vector<Kind>{Kind::Text, Kind::Audio, Kind::Audio, Kind::Text});
    CHECK(seq.positions[0].token_id == 7);
    // label after a text position followed by audio is masked
    CHECK(seq.positions[0].label == kIgnoreIndex);
    CHECK(seq.positions[3].token_id == 8);
}

TEST_CASE("interleaved placeholder count errors") {
    Rng rng(4);
    AudioEmbeddingBlock block = block_of(2, 4, rng);
    CHECK_THROWS_AS(build_interleaved({5, 6}, {}, block), MissingPlaceholder);
    CHECK_THROWS_AS(
        build_interleaved({Vocabulary::kAudioPlaceholder, 5,
                           Vocabulary::kAudioPlaceholder},
                          {}, block),
        ExtraPlaceholder);

    TokenSequence multi = build_interleaved(
        {Vocabulary::kAudioPlaceholder, 5, Vocabulary::kAudioPlaceholder}, {},
        block, /*allow_multiple=*/true);
    CHECK(multi.size() == 5); // 2 + 1 + 2
    CHECK(multi.positions[0].block_id == 0);
    CHECK(multi.positions[3].block_id == 1);
}

TEST_CASE("leading placeholder equals non-interleaved position-for-position") {
    Rng rng(5);
    AudioEmbeddingBlock block = block_of(3, 6, rng);
    const std::vector<TokenId> text = {4, 9, 5};
    const std::vector<TokenId> answer = {6, 1};
    std::vector<TokenId> with_ph = {Vocabulary::kAudioPlaceholder};
    with_ph.insert(with_ph.end(), text.begin(), text.end());

    TokenSequence il = build_interleaved(with_ph, answer, block);
    TokenSequence ni = build_noninterleaved(text, answer, block);
    REQUIRE(il.size() == ni.size());
    for (std::size_t i = 0; i < il.size(); ++i) {
        CHECK(il.positions[i].kind == ni.positions[i].kind);
        CHECK(il.positions[i].token_id == ni.positions[i].token_id);
        CHECK(il.positions[i].audio_slot == ni.positions[i].audio_slot);
        CHECK(il.positions[i].label == ni.positions[i].label);
        CHECK(il.positions[i].source == ni.positions[i].source);
    }

    Tensor table = testing::rand_tensor({12, 6}, rng);
    Tensor ea = assemble_embeddings(nullptr, il, table, block);
    Tensor eb = assemble_embeddings(nullptr, ni, table, block);
    CHECK(ea.data() == eb.data());
}

TEST_CASE("length law over random constructions") {
    Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 1 + static_cast<int>(rng.below(6));
        AudioEmbeddingBlock block = block_of(k, 3, rng);
        const std::size_t l_prompt = rng.below(8);
        const std::size_t l_answer = rng.below(5);
        std::vector<TokenId> prompt, answer;
        for (std::size_t i = 0; i < l_prompt; ++i) {
            prompt.push_back(4 + static_cast<TokenId>(rng.below(20)));
        }
        for (std::size_t i = 0; i < l_answer; ++i) {
            answer.push_back(4 + static_cast<TokenId>(rng.below(20)));
        }

        TokenSequence ni = build_noninterleaved(prompt, answer, block);
        CHECK(ni.size() == static_cast<std::size_t>(k) + l_prompt + l_answer);

        std::vector<TokenId> with_ph = prompt;
        with_ph.insert(with_ph.begin() + rng.below(prompt.size() + 1),
                       Vocabulary::kAudioPlaceholder);
        TokenSequence il = build_interleaved(with_ph, answer, block);
        CHECK(il.size() == l_prompt + l_answer + static_cast<std::size_t>(k));

        // audio positions always masked; text order preserved
        std::vector<TokenId> expect_text = prompt;
        expect_text.insert(expect_text.end(), answer.begin(), answer.end());
        for (const TokenSequence* seq : {&ni, &il}) {
            for (const Position& p : seq->positions) {
                if (p.kind == Kind::Audio) CHECK(p.label == kIgnoreIndex);
            }
            CHECK(text_ids(*seq) == expect_text);
        }
    }
}

TEST_CASE("assemble_embeddings equals the splice oracle") {
    Rng rng(7);
    AudioEmbeddingBlock block = block_of(2, 3, rng);
    Tensor table = testing::rand_tensor({10, 3}, rng);

    TokenSequence all_text = build_noninterleaved({4, 5, 6}, {}, block);
    all_text.positions.erase(all_text.positions.begin(),
                             all_text.positions.begin() + 2);
    Tensor et = assemble_embeddings(nullptr, all_text, table, block);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            CHECK(et.at(r, c) == table.at(r + 4, c));
        }
    }

    TokenSequence mixed =
        build_interleaved({5, Vocabulary::kAudioPlaceholder, 6}, {7}, block);
    Tensor em = assemble_embeddings(nullptr, mixed, table, block);
    REQUIRE(em.rows() == 5);
    for (int c = 0; c < 3; ++c) {
        CHECK(em.at(0, c) == table.at(5, c));
        CHECK(em.at(1, c) == block.slots.at(0, c));
        CHECK(em.at(2, c) == block.slots.at(1, c));
        CHECK(em.at(3, c) == table.at(6, c));
        CHECK(em.at(4, c) == table.at(7, c));
    }
}

TEST_CASE("assemble_embeddings range checks") {
    Rng rng(8);
    AudioEmbeddingBlock block = block_of(2, 3, rng);
    Tensor table = testing::rand_tensor({4, 3}, rng);
    TokenSequence seq = build_noninterleaved({9}, {}, block); // 9 >= V=4
    CHECK_THROWS_AS(assemble_embeddings(nullptr, seq, table, block),
                    IndexError);

    TokenSequence ok = build_noninterleaved({2}, {}, block);
    ok.positions[0].audio_slot = 5; // out of the block's range
    CHECK_THROWS_AS(assemble_embeddings(nullptr, ok, table, block),
                    IndexError);
}

TEST_CASE("assemble_embeddings scatters gradients to table and block") {
    Rng rng(9);
    AudioEmbeddingBlock block = block_of(2, 3, rng);
    block.slots.set_requires_grad(true);
    Tensor table = testing::rand_tensor({6, 3}, rng);
    table.set_requires_grad(true);
    // token 5 appears twice → its row accumulates gradient 2 per column
    TokenSequence seq =
        build_interleaved({5, Vocabulary::kAudioPlaceholder}, {5}, block);

    Tape tape;
    Tensor assembled = assemble_embeddings(&tape, seq, table, block);
    Tensor loss = ops::sum(&tape, assembled);
    tape.backward(loss);

    for (int c = 0; c < 3; ++c) {
        CHECK(table.grad()[5 * 3 + c] == 2.0);
        CHECK(table.grad()[4 * 3 + c] == 0.0);
        CHECK(block.slots.grad()[0 * 3 + c] == 1.0);
        CHECK(block.slots.grad()[1 * 3 + c] == 1.0);
    }
}

TEST_CASE("supervision_labels masking modes") {
    Rng rng(10);
    AudioEmbeddingBlock block = block_of(2, 3, rng);
    TokenSequence seq = build_interleaved(
        {4, Vocabulary::kAudioPlaceholder, 5, 6}, {7, 8}, block);
    // layout: t4 a a t5 t6 | t7 t8

    auto open = supervision_labels(seq, /*mask_prompt_text=*/false);
    REQUIRE(open.size() == seq.size());
    CHECK(open[0] == kIgnoreIndex); // next is audio
    CHECK(open[1] == kIgnoreIndex);
    CHECK(open[2] == kIgnoreIndex);
    CHECK(open[3] == 6); // prompt→prompt supervised by default
    CHECK(open[4] == 7); // prompt→answer
    CHECK(open[5] == 8); // answer→answer
    CHECK(open[6] == kIgnoreIndex);

    auto masked = supervision_labels(seq, /*mask_prompt_text=*/true);
    CHECK(masked[3] == kIgnoreIndex); // target is prompt text → masked
    CHECK(masked[4] == 7);            // target is answer text → kept
    CHECK(masked[5] == 8);
    CHECK(masked[6] == kIgnoreIndex);

    // labels stored on positions agree with the unmasked recomputation
    for (std::size_t i = 0; i < seq.size(); ++i) {
        CHECK(seq.positions[i].label == open[i]);
    }
}

TEST_CASE("supervision_labels length-1 sequence") {
    Rng rng(11);
    AudioEmbeddingBlock block = block_of(1, 3, rng);
    TokenSequence seq;
    seq.positions.push_back(
        {Kind::Text, Source::Prompt, 4, -1, -1, kIgnoreIndex});
    auto labels = supervision_labels(seq, false);
    REQUIRE(labels.size() == 1);
    CHECK(labels[0] == kIgnoreIndex);
}
