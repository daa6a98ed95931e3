#pragma once

#include <optional>
#include <string>
#include <vector>

#include "weave/audio_frontend.hpp"
#include "weave/jsonl.hpp"

namespace weave {

enum class Relation { Identity, Synonym, Hypernym };
enum class SoundClass { Anthrophony, Biophony, Geophony };
enum class Parsed { Yes, No, Unparsed };

std::string relation_name(Relation r);
Relation relation_from_name(const std::string& name);
std::string sound_class_name(SoundClass c);
SoundClass sound_class_from_name(const std::string& name);

struct ShardItem {
    std::string word;
    Relation relation = Relation::Identity;
    // the synonym/hypernym or distractor; absent for identity items
    std::optional<std::string> candidate;
    AudioClipRef audio;
    // "Yes"/"No" for relation items, the canonical label for identity
    std::string truth;
    SoundClass sound_class = SoundClass::Anthrophony;

    static ShardItem from_json(const Json& j);
    Json to_json() const;
};

struct Decision {
    std::string raw_response;
    Parsed parsed = Parsed::Unparsed;
    std::optional<std::string> matched_span;
};

struct RelationMetrics {
    long long tp = 0, fp = 0, tn = 0, fn = 0;
    long long unparsed_count = 0;
    double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
    // zero-denominator metrics are reported as 0 with the flag cleared
    bool precision_defined = false, recall_defined = false,
         f1_defined = false;
    long long total() const { return tp + fp + tn + fn; }
};

struct MetricsReport {
    RelationMetrics synonym;
    RelationMetrics hypernym;
    long long identity_total = 0;
    long long identity_correct = 0;
    double identity_accuracy = 0.0;
};

// The exact evaluation prompt template for a relation/format cell;
// {synonym}/{hypernym} is the candidate slot for relation templates.
const std::string& shard_template(Relation relation, bool interleaved);

struct Query {
    std::size_t item_index = 0;
    int repeat = 0;
    std::string prompt;
};

// Each item expands into `repeats` prompt instances from its template cell.
std::vector<Query> build_queries(const std::vector<ShardItem>& items,
                                 bool interleaved, int repeats = 4);

// Whole-word scan for a binary decision. Negative phrases: no, not,
// does not, is not, isn't, doesn't. Affirmative: yes, does, is similar,
// is a type. Earliest match wins; at equal starts the longer phrase wins;
// no match → Unparsed.
Decision extract_decision(const std::string& response);

// True iff any canonical label occurs in the response as a case-insensitive
// whole-phrase match.
bool score_identity(const std::string& response,
                    const std::vector<std::string>& canonical_labels);

// One scored trial: Yes-prediction comes from the decision, with Unparsed
// counting as a No prediction (and tallied separately).
struct RelationTrial {
    Decision decision;
    bool truth_yes = false;
};

RelationMetrics compute_relation_metrics(
    const std::vector<RelationTrial>& trials);

MetricsReport compute_metrics(const std::vector<RelationTrial>& synonym_trials,
                              const std::vector<RelationTrial>& hypernym_trials,
                              long long identity_correct,
                              long long identity_total);

} // namespace weave
