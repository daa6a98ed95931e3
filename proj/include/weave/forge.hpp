#pragma once

#include <optional>
#include <string>
#include <vector>

#include "weave/audio_frontend.hpp"
#include "weave/jsonl.hpp"
#include "weave/rng.hpp"

namespace weave {

enum class TaskType { LabelClassification, AcousticFeature, OpenEnded };
enum class ForgeBackend { Offline, External };

std::string task_type_name(TaskType t);
TaskType task_type_from_name(const std::string& name);

// Source QA record (non-interleaved, LTU-style) prior to forging.
struct SourceRecord {
    std::string id;
    AudioClipRef audio;
    std::string original_prompt;
    std::string answer;
    TaskType task_type = TaskType::OpenEnded;

    static SourceRecord from_json(const Json& j);
    Json to_json() const;
};

struct ForgeRecord {
    std::string id;
    AudioClipRef audio;
    std::string original_prompt;
    std::string interleaved_prompt;
    std::string answer; // byte-identical to the source's
    TaskType task_type = TaskType::OpenEnded;
    ForgeBackend backend = ForgeBackend::Offline;
    double temperature_used = 0.0;

    static ForgeRecord from_json(const Json& j);
    Json to_json() const;
};

// Words the interleaved prompt must not contain (whole-word,
// case-insensitive), per the generation rules.
const std::vector<std::string>& banned_words();

// Rewrite templates per task plus the eight variety instructions appended to
// system prompts for linguistic diversity.
struct TemplateBank {
    std::vector<std::string> label_templates;
    std::vector<std::string> acoustic_templates;
    // modality-cue phrases replaced by "[AUDIO]" in open-ended prompts,
    // longest first
    std::vector<std::string> open_ended_cues;
    std::vector<std::string> variety_instructions;

    static TemplateBank standard();
};

// Exact system/user prompt pair sent to the external rephrasing service
// (instruction slot already filled).
struct RephrasePrompt {
    std::string system;
    std::string user;
};
RephrasePrompt build_rephrase_prompt(TaskType task,
                                     const std::string& original_prompt,
                                     const std::string& variety_instruction);

// Empty list = valid. Violations are named like "MissingPlaceholder",
// "ExtraPlaceholder", "BannedWord(clip)", "AnswerChanged", "AudioChanged".
std::vector<std::string> validate_record(const ForgeRecord& candidate,
                                         const SourceRecord& source);

// Pure function of (record, bank, seed). Throws ForgeRejected when no
// rewrite passes validation.
ForgeRecord forge_offline(const SourceRecord& record, const TemplateBank& bank,
                          std::uint64_t seed);

class RephrasingClient; // see rephrase_client.hpp

// Sends the Appendix-style system/user pair over the client, parses the
// revised prompt, validates; retries up to 3 times before ForgeRejected.
// Temperature outside [min,max] → ConfigError.
ForgeRecord forge_external(const SourceRecord& record,
                           RephrasingClient& client, double temperature,
                           const TemplateBank& bank, std::uint64_t seed,
                           double min_temperature = 0.7,
                           double max_temperature = 1.1);

struct QuarantinedRecord {
    SourceRecord source;
    std::string reason;
};

struct ForgeBatchResult {
    std::vector<ForgeRecord> accepted;
    std::vector<QuarantinedRecord> quarantined;
};

// Every input lands in exactly one of accepted/quarantined.
ForgeBatchResult forge_batch_offline(const std::vector<SourceRecord>& records,
                                     const TemplateBank& bank,
                                     std::uint64_t seed);
ForgeBatchResult forge_batch_external(const std::vector<SourceRecord>& records,
                                      RephrasingClient& client,
                                      const TemplateBank& bank,
                                      std::uint64_t seed,
                                      double min_temperature = 0.7,
                                      double max_temperature = 1.1);

} // namespace weave
