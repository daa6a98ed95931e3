#include "weave/forge.hpp"

#include <algorithm>
#include <numeric>

#include "weave/rephrase_client.hpp"
#include "weave/textmatch.hpp"

namespace weave {

namespace {

using textmatch::contains_word;
using textmatch::lower;

std::size_t count_placeholders(const std::string& text) {
    std::size_t n = 0, pos = 0;
    while ((pos = text.find("[AUDIO]", pos)) != std::string::npos) {
        ++n;
        pos += 7;
    }
    return n;
}

Json audio_to_json(const AudioClipRef& a) {
    return Json{{"id", a.id},
                {"feature_path", a.feature_path},
                {"duration_s", a.duration_s}};
}

AudioClipRef audio_from_json(const Json& j) {
    AudioClipRef a;
    a.id = j.value("id", "");
    a.feature_path = j.at("feature_path").get<std::string>();
    a.duration_s = j.value("duration_s", 10.0);
    return a;
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const std::string& p : parts) {
        if (!out.empty()) out += ", ";
        out += p;
    }
    return out;
}

ForgeRecord make_candidate(const SourceRecord& src, std::string revised,
                           ForgeBackend backend, double temperature) {
    ForgeRecord out;
    out.id = src.id;
    out.audio = src.audio;
    out.original_prompt = src.original_prompt;
    out.interleaved_prompt = std::move(revised);
    out.answer = src.answer;
    out.task_type = src.task_type;
    out.backend = backend;
    out.temperature_used = temperature;
    return out;
}

// Candidate rewrites for an open-ended prompt: cue replacement first (the
// earliest cue occurrence, longer cue winning ties), then the wrap fallback.
std::vector<std::string> open_ended_rewrites(const std::string& original,
                                             const TemplateBank& bank) {
    std::vector<std::string> out;
    const std::string hay = lower(original);
    std::size_t best_pos = std::string::npos;
    std::size_t best_len = 0;
    for (const std::string& cue : bank.open_ended_cues) {
        const std::size_t pos = hay.find(lower(cue));
        if (pos == std::string::npos) continue;
        if (pos < best_pos || (pos == best_pos && cue.size() > best_len)) {
            best_pos = pos;
            best_len = cue.size();
        }
    }
    if (best_pos != std::string::npos) {
        std::string replaced = original;
        replaced.replace(best_pos, best_len, "[AUDIO]");
        out.push_back(std::move(replaced));
    }
    out.push_back("Based on [AUDIO], " + original);
    return out;
}

} // namespace

std::string task_type_name(TaskType t) {
    switch (t) {
        case TaskType::LabelClassification: return "label_classification";
        case TaskType::AcousticFeature: return "acoustic_feature";
        case TaskType::OpenEnded: return "open_ended";
    }
    throw ConfigError("unknown task type");
}

TaskType task_type_from_name(const std::string& name) {
    if (name == "label_classification") return TaskType::LabelClassification;
    if (name == "acoustic_feature") return TaskType::AcousticFeature;
    if (name == "open_ended") return TaskType::OpenEnded;
    throw SchemaError("unknown task type '" + name + "'");
}

SourceRecord SourceRecord::from_json(const Json& j) {
    require_keys(j, {"id", "audio", "original_prompt", "answer", "task_type"},
                 "source record");
    SourceRecord r;
    r.id = j["id"].get<std::string>();
    r.audio = audio_from_json(j["audio"]);
    r.original_prompt = j["original_prompt"].get<std::string>();
    r.answer = j["answer"].get<std::string>();
    r.task_type = task_type_from_name(j["task_type"].get<std::string>());
    return r;
}

Json SourceRecord::to_json() const {
    return Json{{"id", id},
                {"audio", audio_to_json(audio)},
                {"original_prompt", original_prompt},
                {"answer", answer},
                {"task_type", task_type_name(task_type)}};
}

ForgeRecord ForgeRecord::from_json(const Json& j) {
    require_keys(j,
                 {"id", "audio", "original_prompt", "interleaved_prompt",
                  "answer", "task_type", "backend", "temperature_used"},
                 "forge record");
    ForgeRecord r;
    r.id = j["id"].get<std::string>();
    r.audio = audio_from_json(j["audio"]);
    r.original_prompt = j["original_prompt"].get<std::string>();
    r.interleaved_prompt = j["interleaved_prompt"].get<std::string>();
    r.answer = j["answer"].get<std::string>();
    r.task_type = task_type_from_name(j["task_type"].get<std::string>());
    const std::string b = j["backend"].get<std::string>();
    if (b == "offline") {
        r.backend = ForgeBackend::Offline;
    } else if (b == "external") {
        r.backend = ForgeBackend::External;
    } else {
        throw SchemaError("unknown forge backend '" + b + "'");
    }
    r.temperature_used = j["temperature_used"].get<double>();
    return r;
}

Json ForgeRecord::to_json() const {
    return Json{{"id", id},
                {"audio", audio_to_json(audio)},
                {"original_prompt", original_prompt},
                {"interleaved_prompt", interleaved_prompt},
                {"answer", answer},
                {"task_type", task_type_name(task_type)},
                {"backend",
                 backend == ForgeBackend::Offline ? "offline" : "external"},
                {"temperature_used", temperature_used}};
}

const std::vector<std::string>& banned_words() {
    static const std::vector<std::string> words = {"clip", "recording",
                                                   "audio file"};
    return words;
}

TemplateBank TemplateBank::standard() {
    TemplateBank bank;
    bank.label_templates = {
        "After you hear [AUDIO], what are the appropriate classification "
        "labels?",
        "Listen to this: [AUDIO]. Now, list the corresponding tags.",
        "Consider [AUDIO]. What are its corresponding labels?",
        "Reflect on the contents of [AUDIO] and enumerate the relevant "
        "categories it represents.",
        "Can you list the labels based on [AUDIO]?",
    };
    bank.acoustic_templates = {
        "Listen to this: [AUDIO]. For each component you identify, list its "
        "label and describe its acoustic features.",
        "Regarding [AUDIO], what labels are suitable, and what are their key "
        "sound properties?",
        "Analyze what you hear in [AUDIO]. Return a list of labels paired "
        "with their distinguishing acoustic qualities.",
        "Consider [AUDIO] and enumerate all discernible sound categories, "
        "specifying for each both an appropriate label and a detailed "
        "account of its auditory characteristics.",
    };
    bank.open_ended_cues = {
        "this audio signal",
        "the audio clip",
        "the recording",
        "this audio",
    };
    bank.variety_instructions = {
        "Use creative and varied language.",
        "Employ different sentence structures and word choices.",
        "Be innovative in your phrasing while maintaining clarity.",
        "Use diverse vocabulary and avoid repetitive patterns.",
        "Create unique formulations while keeping the core meaning.",
        "Vary your word choice and sentence construction.",
        "Express the same concept using different linguistic approaches.",
        "Be original in your expression while preserving the instruction's "
        "purpose.",
    };
    return bank;
}

RephrasePrompt build_rephrase_prompt(TaskType task,
                                     const std::string& original_prompt,
                                     const std::string& variety_instruction) {
    const std::string important =
        "IMPORTANT: " + variety_instruction +
        "  Make each instruction distinct and avoid formulaic responses. "
        "Use different words and sentence structures even when the meaning "
        "is similar.";
    RephrasePrompt p;
    switch (task) {
        case TaskType::LabelClassification:
            p.system =
                "You are an expert AI assistant specializing in revising "
                "prompts for multimodal language models. Your task is to "
                "rewrite a given prompt into a new, interleaved format.\n\n"
                "Your Rules:\n"
                "1. You must take the user's 'Old Prompt' and rephrase it "
                "into an abstract, interleaved instruction.\n"
                "2. The new prompt must contain the exact placeholder "
                "[AUDIO] one and only one time.\n"
                "3. The new prompt must avoid words that explicitly refer "
                "to a media file, such as \"clip,\" \"recording,\" or "
                "\"audio file.\"\n"
                "4. The new prompt must be completely general and "
                "scenario-agnostic.\n"
                "5. Your final output must be a single JSON object with one "
                "key: \"revised_prompt\". Do not include any other text.\n\n" +
                important;
            p.user =
                "I need to revise the following prompt for a simple audio "
                "classification task. The goal is to ask for a list of "
                "labels.\n\n"
                "Old Prompt: \"" + original_prompt + "\"\n\n"
                "Please revise it into a new, single-string interleaved "
                "prompt.\n\n"
                "Good Revision Examples:\n"
                "- \"After you hear [AUDIO], what are the appropriate "
                "classification labels?\"\n"
                "- \"Listen to this: [AUDIO]. Now, list the corresponding "
                "tags.\"\n"
                "- \"Consider [AUDIO]. What are its corresponding "
                "labels?\"\n\n"
                "Provide your output as a single JSON object with the key "
                "\"revised_prompt\".";
            break;
        case TaskType::AcousticFeature:
            p.system =
                "You are an expert AI assistant specializing in revising "
                "prompts for multimodal language models. Your task is to "
                "rewrite a given prompt into a new, interleaved format for "
                "a complex audio classification task that requires acoustic "
                "descriptions.\n\n"
                "Your Rules:\n"
                "1. You must take the user's 'Old Prompt' and rephrase it "
                "into an abstract, interleaved instruction.\n"
                "2. The new prompt must contain the exact placeholder "
                "[AUDIO] one and only one time.\n"
                "3. The prompt must explicitly ask for both a label AND a "
                "description of its acoustic features.\n"
                "4. The new prompt must avoid words that explicitly refer "
                "to a media file, such as \"clip,\" \"recording,\" or "
                "\"audio file.\"\n"
                "5. The new prompt must be completely general and "
                "scenario-agnostic.\n"
                "6. Your final output must be a single JSON object with one "
                "key: revised_prompt, e.g. {'revised_prompt': '...'}. Do "
                "not include any other text.\n\n" +
                important;
            p.user =
                "I need to revise the following prompt for a complex audio "
                "classification task. The goal is to ask for a list of "
                "labels, each with a description of its acoustic "
                "properties.\n\n"
                "Old Prompt: \"" + original_prompt + "\"\n\n"
                "Please revise it into a new, single-string interleaved "
                "prompt.\n\n"
                "Good Revision Examples:\n"
                "- \"Listen to this: [AUDIO]. For each component you "
                "identify, list its label and describe its acoustic "
                "features.\"\n"
                "- \"Regarding [AUDIO], what labels are suitable, and what "
                "are their key sound properties?\"\n"
                "- \"Analyze what you hear in [AUDIO]. Return a list of "
                "labels paired with their distinguishing acoustic "
                "qualities.\"\n\n"
                "Provide your output as a single JSON object with the key "
                "revised_prompt, e.g. {'revised_prompt': '...'}.";
            break;
        case TaskType::OpenEnded:
            p.system =
                "You are an expert AI assistant specializing in revising "
                "prompts for multimodal language models. Your task is to "
                "rewrite a given open-ended question into a new, "
                "interleaved format.\n\n"
                "Your Rules:\n"
                "1. You must take the user's 'Old Prompt' and rephrase it "
                "by naturally integrating the [AUDIO] placeholder into the "
                "question.\n"
                "2. The new prompt must preserve the full intent and "
                "meaning of the original question.\n"
                "3. The new prompt must contain the exact placeholder "
                "[AUDIO] one and only one time.\n"
                "4. The new prompt must avoid words that explicitly refer "
                "to a media file, such as \"clip,\" \"recording,\" or "
                "\"audio file.\"\n"
                "5. The resulting prompt should be a single, grammatically "
                "correct, and natural-sounding question.\n"
                "6. Your final output must be a single JSON object with one "
                "key: \"revised_prompt\". Do not include any other "
                "text.\n\n" +
                important;
            p.user =
                "I need to revise the following prompt for an open-ended "
                "audio question-answering task. The goal is to rephrase the "
                "question to include an audio placeholder.\n\n"
                "Old Prompt: \"" + original_prompt + "\"\n\n"
                "Please revise it into a new, single-string interleaved "
                "prompt.\n\n"
                "Good Revision Examples:\n"
                "- Old: \"What other sound events, if any, can be heard in "
                "the audio clip?\" -> New: \"What other sound events, if "
                "any, can be heard in [AUDIO]?\"\n"
                "- Old: \"Based on the acoustic features, can you tell the "
                "type of vacuum cleaner?\" -> New: \"Based on [AUDIO], can "
                "you tell the type of vacuum cleaner?\"\n"
                "- Old: \"Describe the environment where this sound was "
                "likely recorded.\" -> New: \"Based on what you hear in "
                "[AUDIO], describe the environment where it was likely "
                "recorded.\"\n\n"
                "Provide your output as a single JSON object with the key "
                "\"revised_prompt\".";
            break;
    }
    return p;
}

std::vector<std::string> validate_record(const ForgeRecord& candidate,
                                         const SourceRecord& source) {
    std::vector<std::string> violations;
    const std::size_t n = count_placeholders(candidate.interleaved_prompt);
    if (n == 0) violations.push_back("MissingPlaceholder");
    if (n > 1) violations.push_back("ExtraPlaceholder");
    for (const std::string& word : banned_words()) {
        if (contains_word(candidate.interleaved_prompt, word)) {
            violations.push_back("BannedWord(" + word + ")");
        }
    }
    if (candidate.answer != source.answer) {
        violations.push_back("AnswerChanged");
    }
    if (candidate.audio.id != source.audio.id ||
        candidate.audio.feature_path != source.audio.feature_path ||
        candidate.audio.duration_s != source.audio.duration_s) {
        violations.push_back("AudioChanged");
    }
    return violations;
}

ForgeRecord forge_offline(const SourceRecord& record, const TemplateBank& bank,
                          std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::string> candidates;
    if (record.task_type == TaskType::OpenEnded) {
        candidates = open_ended_rewrites(record.original_prompt, bank);
    } else {
        const auto& templates = record.task_type == TaskType::LabelClassification
                                    ? bank.label_templates
                                    : bank.acoustic_templates;
        if (templates.empty()) {
            throw ForgeRejected("record " + record.id +
                                ": template bank is empty");
        }
        // seeded first choice, then the rest as fallbacks
        std::vector<std::size_t> order(templates.size());
        std::iota(order.begin(), order.end(), 0);
        std::rotate(order.begin(),
                    order.begin() + static_cast<std::ptrdiff_t>(
                                        rng.below(order.size())),
                    order.end());
        for (std::size_t i : order) candidates.push_back(templates[i]);
    }
    std::string last_reason;
    for (const std::string& text : candidates) {
        ForgeRecord out =
            make_candidate(record, text, ForgeBackend::Offline, 0.0);
        const auto violations = validate_record(out, record);
        if (violations.empty()) return out;
        last_reason = join(violations);
    }
    throw ForgeRejected("record " + record.id +
                        ": no rewrite passed validation: " + last_reason);
}

ForgeRecord forge_external(const SourceRecord& record,
                           RephrasingClient& client, double temperature,
                           const TemplateBank& bank, std::uint64_t seed,
                           double min_temperature, double max_temperature) {
    if (temperature < min_temperature || temperature > max_temperature) {
        throw ConfigError("forge_external: temperature " +
                          std::to_string(temperature) + " outside [" +
                          std::to_string(min_temperature) + ", " +
                          std::to_string(max_temperature) + "]");
    }
    Rng rng(seed);
    std::string last_reason;
    constexpr int kRetries = 3; // retries after the first attempt
    for (int attempt = 0; attempt <= kRetries; ++attempt) {
        const auto& instruction = bank.variety_instructions[rng.below(
            bank.variety_instructions.size())];
        const RephrasePrompt p = build_rephrase_prompt(
            record.task_type, record.original_prompt, instruction);
        const std::string revised =
            client.rephrase({p.system, p.user, temperature});
        ForgeRecord out =
            make_candidate(record, revised, ForgeBackend::External,
                           temperature);
        const auto violations = validate_record(out, record);
        if (violations.empty()) return out;
        last_reason = join(violations);
    }
    throw ForgeRejected("record " + record.id + ": validation failed after " +
                        std::to_string(kRetries + 1) +
                        " attempts: " + last_reason);
}

ForgeBatchResult forge_batch_offline(const std::vector<SourceRecord>& records,
                                     const TemplateBank& bank,
                                     std::uint64_t seed) {
    ForgeBatchResult result;
    Rng rng(seed);
    for (const SourceRecord& rec : records) {
        const std::uint64_t rec_seed = rng.fork_seed();
        try {
            result.accepted.push_back(forge_offline(rec, bank, rec_seed));
        } catch (const ForgeRejected& e) {
            result.quarantined.push_back({rec, e.what()});
        }
    }
    return result;
}

ForgeBatchResult forge_batch_external(const std::vector<SourceRecord>& records,
                                      RephrasingClient& client,
                                      const TemplateBank& bank,
                                      std::uint64_t seed,
                                      double min_temperature,
                                      double max_temperature) {
    ForgeBatchResult result;
    Rng rng(seed);
    for (const SourceRecord& rec : records) {
        const std::uint64_t rec_seed = rng.fork_seed();
        const double temperature =
            rng.uniform(min_temperature, max_temperature);
        try {
            result.accepted.push_back(
                forge_external(rec, client, temperature, bank, rec_seed,
                               min_temperature, max_temperature));
        } catch (const ForgeRejected& e) {
            result.quarantined.push_back({rec, e.what()});
        }
    }
    return result;
}

} // namespace weave
