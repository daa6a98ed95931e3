"""Smoke tests for the audioweave bindings: one pass over every major
operation the package exposes. The exhaustive checks live in the C++ suites;
these only prove the Python surface is wired up."""

import math

import numpy as np
import pytest

import audioweave as aw


def test_vocabulary_roundtrip():
    vocab = aw.Vocabulary.build(["the siren wails", "a siren, again"], 32)
    assert len(vocab) > 4
    ids = vocab.encode("The siren wails, again")
    assert vocab.decode(ids) == "the siren wails , again"
    assert vocab.decode(vocab.encode("unseen!")) == "<unk> <unk>"
    assert vocab.tokens()[aw.Vocabulary.AUDIO_PLACEHOLDER] == "[AUDIO]"


def test_sequence_construction_equivalence():
    block = aw.AudioEmbeddingBlock(np.random.default_rng(0).normal(size=(3, 8)))
    text, answer = [5, 9, 11], [7, 8]
    il = aw.build_interleaved(
        [aw.Vocabulary.AUDIO_PLACEHOLDER] + text, answer, block
    )
    ni = aw.build_noninterleaved(text, answer, block)
    assert len(il) == len(ni) == 3 + 3 + 2
    assert [p.kind for p in il.positions] == [p.kind for p in ni.positions]
    assert aw.supervision_labels(il, True) == aw.supervision_labels(ni, True)
    for pos, label in zip(il.positions, aw.supervision_labels(il, False)):
        if pos.kind == aw.Kind.Audio:
            assert label == aw.IGNORE_INDEX


def test_sequence_placeholder_errors():
    block = aw.AudioEmbeddingBlock(np.zeros((2, 4)))
    with pytest.raises(aw.AudioweaveError):
        aw.build_interleaved([5, 6], [7], block)  # no placeholder


def test_forge_offline_batch():
    clip = aw.AudioClipRef("c0", "features/c0.aftr")
    good = aw.SourceRecord(
        "good", clip, "What can be heard in the audio clip?", "A dog barks."
    )
    doomed = aw.SourceRecord(
        "doomed", clip, "Tell me about this recording.", "A dog barks."
    )
    result = aw.forge_batch_offline(
        [good, doomed], aw.TemplateBank.standard(), seed=7
    )
    assert len(result.accepted) == 1 and len(result.quarantined) == 1
    rec = result.accepted[0]
    assert rec.interleaved_prompt.count("[AUDIO]") == 1
    assert rec.answer == good.answer
    assert aw.validate_record(rec, good) == []
    assert "BannedWord" in result.quarantined[0].reason
    assert rec.to_dict()["interleaved_prompt"] == rec.interleaved_prompt


def test_shard_metrics_and_decisions():
    assert aw.extract_decision("Yes, it is.").parsed == aw.Parsed.Yes
    assert aw.extract_decision("it does not").matched_span == "does not"
    assert aw.extract_decision("hmm").parsed == aw.Parsed.Unparsed

    def trial(parsed, truth):
        text = {aw.Parsed.Yes: "yes", aw.Parsed.No: "no"}.get(parsed, "hmm")
        return aw.RelationTrial(aw.extract_decision(text), truth)

    trials = (
        [trial(aw.Parsed.Yes, True)] * 2
        + [trial(aw.Parsed.Yes, False)]
        + [trial(aw.Parsed.No, True)] * 2
        + [trial(aw.Parsed.No, False)] * 7
    )
    m = aw.compute_relation_metrics(trials)
    assert (m.tp, m.fp, m.fn, m.tn) == (2, 1, 2, 7)
    assert math.isclose(m.precision, 2 / 3, abs_tol=1e-9)
    assert math.isclose(m.recall, 0.5, abs_tol=1e-9)
    assert math.isclose(m.f1, 4 / 7, abs_tol=1e-9)
    assert math.isclose(m.accuracy, 0.75, abs_tol=1e-9)


def test_shard_templates():
    item = aw.ShardItem()
    item.word = "car"
    item.relation = aw.Relation.Synonym
    item.candidate = "automobile"
    item.truth = "Yes"
    (query,) = aw.build_queries([item], interleaved=True, repeats=1)
    assert query.prompt == "Is [AUDIO] similar to automobile?"
    assert "[AUDIO]" not in aw.shard_template(aw.Relation.Hypernym, False)


def test_fixture_and_lexicon(tmp_path):
    assert len(aw.mini_lexicon()) == 78
    cfg = aw.FrontendConfig()
    cfg.audio_slot_count, cfg.d_audio, cfg.d_model = 2, 8, 16
    items = aw.build_shard_fixture(str(tmp_path), cfg, seed=5, words=3,
                                   per_word_audio=1)
    assert len(items) == 3 * 9
    feats = aw.encode_audio(items[0].audio, cfg)
    assert feats.shape == (2, 8)


def test_train_eval_checkpoint(tmp_path):
    cfg = aw.FrontendConfig()
    cfg.audio_slot_count, cfg.d_audio, cfg.d_model = 2, 8, 16

    items = aw.build_shard_fixture(str(tmp_path), cfg, seed=5, words=3,
                                   per_word_audio=1)
    sources = aw.make_source_records(str(tmp_path), cfg, seed=5, words=3,
                                     per_word_audio=1)
    forged = aw.forge_batch_offline(sources, aw.TemplateBank.standard(), 5)
    assert not forged.quarantined

    corpus = aw.lexicon_corpus_lines() + [
        r.interleaved_prompt for r in forged.accepted
    ] + [r.answer for r in forged.accepted]
    vocab = aw.Vocabulary.build(corpus, 512)

    mcfg = aw.ModelConfig()
    mcfg.vocab_size = len(vocab)
    mcfg.d_model, mcfg.n_layers, mcfg.n_heads = 16, 1, 2
    mcfg.d_ff, mcfg.max_seq_len = 32, 64
    mcfg.lora_rank, mcfg.lora_alpha, mcfg.d_audio = 2, 4.0, 8
    model = aw.Model(mcfg, seed=5)

    tcfg = aw.TrainConfig()
    tcfg.steps, tcfg.batch_size, tcfg.learning_rate = 5, 4, 5e-3
    tcfg.mask_prompt_text, tcfg.seed = True, 5
    train_items = aw.build_train_items(forged.accepted, vocab, cfg,
                                       interleaved=True)
    trainer = aw.Trainer(model, tcfg)
    before = trainer.eval_loss(train_items)
    ckpt_path = trainer.run(train_items, vocab, str(tmp_path / "run"))
    after = trainer.eval_loss(train_items)
    assert math.isfinite(before) and math.isfinite(after)

    opt = aw.EvalOptions()
    opt.interleaved, opt.repeats, opt.max_new_tokens, opt.seed = True, 1, 6, 5
    outcome = aw.run_eval(model, vocab, cfg, items[:9], opt)
    assert outcome.report.identity_total == 1
    assert len(outcome.trace) == 9
    text = aw.render_report(outcome.report, "interleaved")
    assert "interleaved" in text
    assert aw.report_to_dict(outcome.report, "interleaved")["condition"] == \
        "interleaved"

    ckpt = aw.read_checkpoint(ckpt_path)
    assert len(ckpt.vocab) == len(vocab)
    probe = np.random.default_rng(1).normal(size=(2, 8))
    a = model.forward_seq(
        aw.build_interleaved([aw.Vocabulary.AUDIO_PLACEHOLDER, 5], [6],
                             model.project_audio(probe)),
        model.project_audio(probe),
    )
    b = ckpt.model.forward_seq(
        aw.build_interleaved([aw.Vocabulary.AUDIO_PLACEHOLDER, 5], [6],
                             ckpt.model.project_audio(probe)),
        ckpt.model.project_audio(probe),
    )
    np.testing.assert_array_equal(a, b)
