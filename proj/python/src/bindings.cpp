// pybind11 surface for the audioweave core: sequence construction, prompt
// forging, the SHARD-style metrics, and the toy train/eval loop. Tensors
// cross the boundary as float64 numpy arrays; structured records cross as
// plain dicts.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "weave/checkpoint.hpp"
#include "weave/evaluate.hpp"
#include "weave/fixture.hpp"
#include "weave/forge.hpp"
#include "weave/model.hpp"
#include "weave/sequence.hpp"
#include "weave/shard.hpp"
#include "weave/tokenizer.hpp"
#include "weave/trainer.hpp"

namespace py = pybind11;
using namespace weave;

namespace {

py::object json_to_py(const Json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

Json py_to_json(const py::object& obj) {
    const std::string dumped =
        py::module_::import("json").attr("dumps")(obj).cast<std::string>();
    return Json::parse(dumped);
}

py::array_t<double> tensor_to_numpy(const Tensor& t) {
    std::vector<py::ssize_t> shape;
    for (Dim d : t.shape()) shape.push_back(static_cast<py::ssize_t>(d));
    py::array_t<double> out(shape);
    std::copy(t.data().begin(), t.data().end(), out.mutable_data());
    return out;
}

Tensor numpy_to_tensor(const py::array_t<double, py::array::c_style |
                                                     py::array::forcecast>& a) {
    if (a.ndim() < 1 || a.ndim() > 2) {
        throw ShapeError("expected a 1-d or 2-d array, got " +
                         std::to_string(a.ndim()) + " dims");
    }
    Shape shape;
    for (py::ssize_t i = 0; i < a.ndim(); ++i) {
        shape.push_back(static_cast<Dim>(a.shape(i)));
    }
    std::vector<double> data(a.data(), a.data() + a.size());
    return Tensor::from_data(std::move(shape), std::move(data));
}

std::vector<Json> records_to_json(const std::vector<ForgeRecord>& records) {
    std::vector<Json> rows;
    rows.reserve(records.size());
    for (const ForgeRecord& r : records) rows.push_back(r.to_json());
    return rows;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Interleaved audio-text instruction pipeline (C++ core)";

    py::register_exception<Error>(m, "AudioweaveError");

    // --- enums -----------------------------------------------------------
    py::enum_<Kind>(m, "Kind")
        .value("Text", Kind::Text)
        .value("Audio", Kind::Audio);
    py::enum_<Source>(m, "Source")
        .value("Prompt", Source::Prompt)
        .value("Answer", Source::Answer)
        .value("Audio", Source::Audio);
    py::enum_<TaskType>(m, "TaskType")
        .value("LabelClassification", TaskType::LabelClassification)
        .value("AcousticFeature", TaskType::AcousticFeature)
        .value("OpenEnded", TaskType::OpenEnded);
    py::enum_<ForgeBackend>(m, "ForgeBackend")
        .value("Offline", ForgeBackend::Offline)
        .value("External", ForgeBackend::External);
    py::enum_<Relation>(m, "Relation")
        .value("Identity", Relation::Identity)
        .value("Synonym", Relation::Synonym)
        .value("Hypernym", Relation::Hypernym);
    py::enum_<SoundClass>(m, "SoundClass")
        .value("Anthrophony", SoundClass::Anthrophony)
        .value("Biophony", SoundClass::Biophony)
        .value("Geophony", SoundClass::Geophony);
    py::enum_<Parsed>(m, "Parsed")
        .value("Yes", Parsed::Yes)
        .value("No", Parsed::No)
        .value("Unparsed", Parsed::Unparsed);

    // --- tokenizer -------------------------------------------------------
    py::class_<Vocabulary>(m, "Vocabulary")
        .def_static("build", &Vocabulary::build, py::arg("corpus"),
                    py::arg("max_size"))
        .def_static("load", &Vocabulary::load, py::arg("path"))
        .def_static("from_tokens", &Vocabulary::from_tokens,
                    py::arg("tokens"))
        .def("save", &Vocabulary::save, py::arg("path"))
        .def("encode", &Vocabulary::encode, py::arg("text"))
        .def("decode", &Vocabulary::decode, py::arg("ids"))
        .def("tokens", &Vocabulary::tokens)
        .def("contains", &Vocabulary::contains, py::arg("token"))
        .def("id_of", &Vocabulary::id_of, py::arg("token"))
        .def("token_of", &Vocabulary::token_of, py::arg("id"))
        .def("__len__", &Vocabulary::size)
        .def_static("split", &Vocabulary::split, py::arg("text"))
        .def_static("normalize", &Vocabulary::normalize, py::arg("text"))
        .def_readonly_static("BOS", &Vocabulary::kBos)
        .def_readonly_static("EOS", &Vocabulary::kEos)
        .def_readonly_static("UNK", &Vocabulary::kUnk)
        .def_readonly_static("AUDIO_PLACEHOLDER",
                             &Vocabulary::kAudioPlaceholder);

    // --- audio frontend --------------------------------------------------
    py::class_<AudioClipRef>(m, "AudioClipRef")
        .def(py::init([](std::string id, std::string feature_path,
                         double duration_s) {
                 return AudioClipRef{std::move(id), std::move(feature_path),
                                     duration_s};
             }),
             py::arg("id"), py::arg("feature_path"),
             py::arg("duration_s") = 10.0)
        .def_readwrite("id", &AudioClipRef::id)
        .def_readwrite("feature_path", &AudioClipRef::feature_path)
        .def_readwrite("duration_s", &AudioClipRef::duration_s);

    py::class_<FrontendConfig>(m, "FrontendConfig")
        .def(py::init<>())
        .def_readwrite("audio_slot_count", &FrontendConfig::audio_slot_count)
        .def_readwrite("d_audio", &FrontendConfig::d_audio)
        .def_readwrite("d_model", &FrontendConfig::d_model)
        .def("validate", &FrontendConfig::validate);

    m.def("write_feature_file", &write_feature_file, py::arg("path"),
          py::arg("frames"));
    m.def("read_feature_file", &read_feature_file, py::arg("path"));
    m.def(
        "encode_audio",
        [](const AudioClipRef& clip, const FrontendConfig& cfg) {
            return tensor_to_numpy(encode_audio(clip, cfg));
        },
        py::arg("clip"), py::arg("config"));

    py::class_<AudioEmbeddingBlock>(m, "AudioEmbeddingBlock")
        .def(py::init([](const py::array_t<double, py::array::c_style |
                                                       py::array::forcecast>&
                             slots) {
                 return AudioEmbeddingBlock{numpy_to_tensor(slots)};
             }),
             py::arg("slots"))
        .def_property_readonly("slots", [](const AudioEmbeddingBlock& b) {
            return tensor_to_numpy(b.slots);
        });

    // --- sequence construction ------------------------------------------
    py::class_<Position>(m, "Position")
        .def_readonly("kind", &Position::kind)
        .def_readonly("source", &Position::source)
        .def_readonly("token_id", &Position::token_id)
        .def_readonly("audio_slot", &Position::audio_slot)
        .def_readonly("block_id", &Position::block_id)
        .def_readonly("label", &Position::label);

    py::class_<TokenSequence>(m, "TokenSequence")
        .def_readonly("positions", &TokenSequence::positions)
        .def("__len__", &TokenSequence::size);

    m.def("build_noninterleaved", &build_noninterleaved,
          py::arg("prompt_ids"), py::arg("answer_ids"), py::arg("block"));
    m.def("build_interleaved", &build_interleaved, py::arg("prompt_ids"),
          py::arg("answer_ids"), py::arg("block"),
          py::arg("allow_multiple") = false);
    m.def("supervision_labels", &supervision_labels, py::arg("seq"),
          py::arg("mask_prompt_text"));
    m.def("text_ids", &text_ids, py::arg("seq"));
    m.attr("IGNORE_INDEX") = ops::kIgnoreIndex;

    // --- prompt forge ----------------------------------------------------
    py::class_<SourceRecord>(m, "SourceRecord")
        .def(py::init([](std::string id, AudioClipRef audio,
                         std::string original_prompt, std::string answer,
                         TaskType task_type) {
                 SourceRecord s;
                 s.id = std::move(id);
                 s.audio = std::move(audio);
                 s.original_prompt = std::move(original_prompt);
                 s.answer = std::move(answer);
                 s.task_type = task_type;
                 return s;
             }),
             py::arg("id"), py::arg("audio"), py::arg("original_prompt"),
             py::arg("answer"), py::arg("task_type") = TaskType::OpenEnded)
        .def_readwrite("id", &SourceRecord::id)
        .def_readwrite("audio", &SourceRecord::audio)
        .def_readwrite("original_prompt", &SourceRecord::original_prompt)
        .def_readwrite("answer", &SourceRecord::answer)
        .def_readwrite("task_type", &SourceRecord::task_type)
        .def("to_dict",
             [](const SourceRecord& s) { return json_to_py(s.to_json()); })
        .def_static("from_dict", [](const py::object& d) {
            return SourceRecord::from_json(py_to_json(d));
        });

    py::class_<ForgeRecord>(m, "ForgeRecord")
        .def_readonly("id", &ForgeRecord::id)
        .def_readonly("audio", &ForgeRecord::audio)
        .def_readonly("original_prompt", &ForgeRecord::original_prompt)
        .def_readonly("interleaved_prompt", &ForgeRecord::interleaved_prompt)
        .def_readonly("answer", &ForgeRecord::answer)
        .def_readonly("task_type", &ForgeRecord::task_type)
        .def_readonly("backend", &ForgeRecord::backend)
        .def_readonly("temperature_used", &ForgeRecord::temperature_used)
        .def("to_dict",
             [](const ForgeRecord& r) { return json_to_py(r.to_json()); })
        .def_static("from_dict", [](const py::object& d) {
            return ForgeRecord::from_json(py_to_json(d));
        });

    py::class_<TemplateBank>(m, "TemplateBank")
        .def_static("standard", &TemplateBank::standard)
        .def_readwrite("label_templates", &TemplateBank::label_templates)
        .def_readwrite("acoustic_templates", &TemplateBank::acoustic_templates)
        .def_readwrite("open_ended_cues", &TemplateBank::open_ended_cues)
        .def_readwrite("variety_instructions",
                       &TemplateBank::variety_instructions);

    py::class_<QuarantinedRecord>(m, "QuarantinedRecord")
        .def_readonly("source", &QuarantinedRecord::source)
        .def_readonly("reason", &QuarantinedRecord::reason);

    py::class_<ForgeBatchResult>(m, "ForgeBatchResult")
        .def_readonly("accepted", &ForgeBatchResult::accepted)
        .def_readonly("quarantined", &ForgeBatchResult::quarantined);

    m.def("banned_words", [] { return banned_words(); });
    m.def("validate_record", &validate_record, py::arg("candidate"),
          py::arg("source"));
    m.def("forge_offline", &forge_offline, py::arg("record"), py::arg("bank"),
          py::arg("seed"));
    m.def("forge_batch_offline", &forge_batch_offline, py::arg("records"),
          py::arg("bank"), py::arg("seed"));

    // --- SHARD evaluation ------------------------------------------------
    py::class_<ShardItem>(m, "ShardItem")
        .def(py::init<>())
        .def_readwrite("word", &ShardItem::word)
        .def_readwrite("relation", &ShardItem::relation)
        .def_readwrite("candidate", &ShardItem::candidate)
        .def_readwrite("audio", &ShardItem::audio)
        .def_readwrite("truth", &ShardItem::truth)
        .def_readwrite("sound_class", &ShardItem::sound_class)
        .def("to_dict",
             [](const ShardItem& s) { return json_to_py(s.to_json()); })
        .def_static("from_dict", [](const py::object& d) {
            return ShardItem::from_json(py_to_json(d));
        });

    py::class_<Query>(m, "Query")
        .def_readonly("item_index", &Query::item_index)
        .def_readonly("repeat", &Query::repeat)
        .def_readonly("prompt", &Query::prompt);

    py::class_<Decision>(m, "Decision")
        .def_readonly("raw_response", &Decision::raw_response)
        .def_readonly("parsed", &Decision::parsed)
        .def_readonly("matched_span", &Decision::matched_span);

    py::class_<RelationTrial>(m, "RelationTrial")
        .def(py::init([](Decision decision, bool truth_yes) {
                 return RelationTrial{std::move(decision), truth_yes};
             }),
             py::arg("decision"), py::arg("truth_yes"))
        .def_readonly("decision", &RelationTrial::decision)
        .def_readonly("truth_yes", &RelationTrial::truth_yes);

    py::class_<RelationMetrics>(m, "RelationMetrics")
        .def_readonly("tp", &RelationMetrics::tp)
        .def_readonly("fp", &RelationMetrics::fp)
        .def_readonly("tn", &RelationMetrics::tn)
        .def_readonly("fn", &RelationMetrics::fn)
        .def_readonly("unparsed_count", &RelationMetrics::unparsed_count)
        .def_readonly("accuracy", &RelationMetrics::accuracy)
        .def_readonly("precision", &RelationMetrics::precision)
        .def_readonly("recall", &RelationMetrics::recall)
        .def_readonly("f1", &RelationMetrics::f1)
        .def_readonly("precision_defined", &RelationMetrics::precision_defined)
        .def_readonly("recall_defined", &RelationMetrics::recall_defined)
        .def_readonly("f1_defined", &RelationMetrics::f1_defined)
        .def("total", &RelationMetrics::total);

    py::class_<MetricsReport>(m, "MetricsReport")
        .def_readonly("synonym", &MetricsReport::synonym)
        .def_readonly("hypernym", &MetricsReport::hypernym)
        .def_readonly("identity_total", &MetricsReport::identity_total)
        .def_readonly("identity_correct", &MetricsReport::identity_correct)
        .def_readonly("identity_accuracy", &MetricsReport::identity_accuracy);

    m.def(
        "shard_template",
        [](Relation r, bool interleaved) {
            return shard_template(r, interleaved);
        },
        py::arg("relation"), py::arg("interleaved"));
    m.def("build_queries", &build_queries, py::arg("items"),
          py::arg("interleaved"), py::arg("repeats") = 4);
    m.def("extract_decision", &extract_decision, py::arg("response"));
    m.def("score_identity", &score_identity, py::arg("response"),
          py::arg("canonical_labels"));
    m.def("compute_relation_metrics", &compute_relation_metrics,
          py::arg("trials"));
    m.def("compute_metrics", &compute_metrics, py::arg("synonym_trials"),
          py::arg("hypernym_trials"), py::arg("identity_correct"),
          py::arg("identity_total"));

    // --- fixture ---------------------------------------------------------
    py::class_<LexiconEntry>(m, "LexiconEntry")
        .def_readonly("word", &LexiconEntry::word)
        .def_readonly("sound_class", &LexiconEntry::sound_class)
        .def_readonly("synonyms", &LexiconEntry::synonyms)
        .def_readonly("hypernyms", &LexiconEntry::hypernyms);

    m.def("mini_lexicon", [] { return mini_lexicon(); });
    m.def("build_shard_fixture", &build_shard_fixture, py::arg("out_dir"),
          py::arg("config"), py::arg("seed"), py::arg("words") = 78,
          py::arg("per_word_audio") = 4);
    m.def("make_source_records", &make_source_records, py::arg("out_dir"),
          py::arg("config"), py::arg("seed"), py::arg("words"),
          py::arg("per_word_audio") = 4);
    m.def("lexicon_corpus_lines", &lexicon_corpus_lines);

    // --- model + training ------------------------------------------------
    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_readwrite("vocab_size", &ModelConfig::vocab_size)
        .def_readwrite("d_model", &ModelConfig::d_model)
        .def_readwrite("n_layers", &ModelConfig::n_layers)
        .def_readwrite("n_heads", &ModelConfig::n_heads)
        .def_readwrite("d_ff", &ModelConfig::d_ff)
        .def_readwrite("max_seq_len", &ModelConfig::max_seq_len)
        .def_readwrite("lora_rank", &ModelConfig::lora_rank)
        .def_readwrite("lora_alpha", &ModelConfig::lora_alpha)
        .def_readwrite("d_audio", &ModelConfig::d_audio)
        .def("validate", &ModelConfig::validate);

    py::class_<Model>(m, "Model")
        .def(py::init<ModelConfig, std::uint64_t>(), py::arg("config"),
             py::arg("seed"))
        .def_property_readonly("config", &Model::config)
        .def(
            "project_audio",
            [](Model& self,
               const py::array_t<double, py::array::c_style |
                                             py::array::forcecast>& features) {
                return self.project_audio(nullptr, numpy_to_tensor(features));
            },
            py::arg("features"))
        .def(
            "forward_seq",
            [](Model& self, const TokenSequence& seq,
               const AudioEmbeddingBlock& block) {
                return tensor_to_numpy(self.forward_seq(nullptr, seq, block));
            },
            py::arg("seq"), py::arg("block"))
        .def("generate", &Model::generate, py::arg("prompt_seq"),
             py::arg("block"), py::arg("max_new"), py::arg("temperature"),
             py::arg("seed"), py::arg("vocab"));

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("steps", &TrainConfig::steps)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("mask_prompt_text", &TrainConfig::mask_prompt_text)
        .def_readwrite("freeze_projection", &TrainConfig::freeze_projection)
        .def_readwrite("freeze_backbone", &TrainConfig::freeze_backbone)
        .def_readwrite("train_norm_gains", &TrainConfig::train_norm_gains)
        .def_readwrite("checkpoint_every", &TrainConfig::checkpoint_every)
        .def("validate", &TrainConfig::validate);

    py::class_<TrainItem>(m, "TrainItem")
        .def_readonly("seq", &TrainItem::seq)
        .def_property_readonly("features", [](const TrainItem& t) {
            return tensor_to_numpy(t.features);
        });

    m.def(
        "build_train_items",
        [](const std::vector<ForgeRecord>& records, const Vocabulary& vocab,
           const FrontendConfig& fcfg, bool interleaved) {
            return build_train_items(records_to_json(records), vocab, fcfg,
                                     interleaved);
        },
        py::arg("records"), py::arg("vocab"), py::arg("config"),
        py::arg("interleaved"));

    py::class_<Trainer>(m, "Trainer")
        .def(py::init<Model&, TrainConfig>(), py::arg("model"),
             py::arg("config"), py::keep_alive<1, 2>())
        .def("train_step", &Trainer::train_step, py::arg("batch"))
        .def("eval_loss", &Trainer::eval_loss, py::arg("items"))
        .def("run", &Trainer::run, py::arg("items"), py::arg("vocab"),
             py::arg("out_dir"));

    // --- evaluation ------------------------------------------------------
    py::class_<EvalOptions>(m, "EvalOptions")
        .def(py::init<>())
        .def_readwrite("interleaved", &EvalOptions::interleaved)
        .def_readwrite("repeats", &EvalOptions::repeats)
        .def_readwrite("temperature", &EvalOptions::temperature)
        .def_readwrite("max_new_tokens", &EvalOptions::max_new_tokens)
        .def_readwrite("seed", &EvalOptions::seed);

    py::class_<EvalOutcome>(m, "EvalOutcome")
        .def_readonly("report", &EvalOutcome::report)
        .def_property_readonly("trace", [](const EvalOutcome& o) {
            py::list rows;
            for (const Json& row : o.trace) rows.append(json_to_py(row));
            return rows;
        });

    m.def("run_eval", &run_eval, py::arg("model"), py::arg("vocab"),
          py::arg("config"), py::arg("items"), py::arg("options"));
    m.def("render_report", &render_report, py::arg("report"),
          py::arg("condition"));
    m.def(
        "report_to_dict",
        [](const MetricsReport& report, const std::string& condition) {
            return json_to_py(report_to_json(report, condition));
        },
        py::arg("report"), py::arg("condition"));

    // --- persistence -----------------------------------------------------
    py::class_<Checkpoint>(m, "Checkpoint")
        .def_readonly("model", &Checkpoint::model)
        .def_readonly("vocab", &Checkpoint::vocab);

    m.def("write_checkpoint", &write_checkpoint, py::arg("path"),
          py::arg("model"), py::arg("vocab"));
    m.def("read_checkpoint", &read_checkpoint, py::arg("path"));
}
