#include "weave/shard.hpp"

#include "weave/textmatch.hpp"

namespace weave {

namespace {

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

std::string fill_slot(std::string tmpl, const std::string& slot,
                      const std::string& value) {
    const std::size_t pos = tmpl.find(slot);
    if (pos != std::string::npos) tmpl.replace(pos, slot.size(), value);
    return tmpl;
}

const std::vector<std::string>& negative_phrases() {
    static const std::vector<std::string> v = {"no",     "not",   "does not",
                                               "is not", "isn't", "doesn't"};
    return v;
}

const std::vector<std::string>& affirmative_phrases() {
    static const std::vector<std::string> v = {"yes", "does", "is similar",
                                               "is a type"};
    return v;
}

} // namespace

std::string relation_name(Relation r) {
    switch (r) {
        case Relation::Identity: return "identity";
        case Relation::Synonym: return "synonym";
        case Relation::Hypernym: return "hypernym";
    }
    throw ConfigError("unknown relation");
}

Relation relation_from_name(const std::string& name) {
    if (name == "identity") return Relation::Identity;
    if (name == "synonym") return Relation::Synonym;
    if (name == "hypernym") return Relation::Hypernym;
    throw SchemaError("unknown relation '" + name + "'");
}

std::string sound_class_name(SoundClass c) {
    switch (c) {
        case SoundClass::Anthrophony: return "anthrophony";
        case SoundClass::Biophony: return "biophony";
        case SoundClass::Geophony: return "geophony";
    }
    throw ConfigError("unknown sound class");
}

SoundClass sound_class_from_name(const std::string& name) {
    if (name == "anthrophony") return SoundClass::Anthrophony;
    if (name == "biophony") return SoundClass::Biophony;
    if (name == "geophony") return SoundClass::Geophony;
    throw SchemaError("unknown sound class '" + name + "'");
}

ShardItem ShardItem::from_json(const Json& j) {
    require_keys(j, {"word", "relation", "audio", "truth", "sound_class"},
                 "shard item");
    ShardItem item;
    item.word = j["word"].get<std::string>();
    item.relation = relation_from_name(j["relation"].get<std::string>());
    if (j.contains("candidate") && !j["candidate"].is_null()) {
        item.candidate = j["candidate"].get<std::string>();
    }
    item.audio = audio_from_json(j["audio"]);
    item.truth = j["truth"].get<std::string>();
    item.sound_class =
        sound_class_from_name(j["sound_class"].get<std::string>());
    if (item.relation != Relation::Identity && !item.candidate) {
        throw SchemaError("shard item for '" + item.word +
                          "': relation item without candidate");
    }
    if (item.relation == Relation::Identity && item.candidate) {
        throw SchemaError("shard item for '" + item.word +
                          "': identity item with candidate");
    }
    return item;
}

Json ShardItem::to_json() const {
    Json j{{"word", word},
           {"relation", relation_name(relation)},
           {"audio", audio_to_json(audio)},
           {"truth", truth},
           {"sound_class", sound_class_name(sound_class)}};
    j["candidate"] = candidate ? Json(*candidate) : Json(nullptr);
    return j;
}

const std::string& shard_template(Relation relation, bool interleaved) {
    static const std::string identity_ni =
        "Can you list the labels based on this audio file?";
    static const std::string identity_il =
        "Can you list the labels based on [AUDIO]?";
    static const std::string synonym_ni =
        "Is the sound of the object in this audio signal similar to "
        "{synonym}?";
    static const std::string synonym_il = "Is [AUDIO] similar to {synonym}?";
    static const std::string hypernym_ni =
        "Is the sound of the object in this audio signal a type of "
        "{hypernym}?";
    static const std::string hypernym_il = "Is [AUDIO] a type of {hypernym}?";
    switch (relation) {
        case Relation::Identity: return interleaved ? identity_il : identity_ni;
        case Relation::Synonym: return interleaved ? synonym_il : synonym_ni;
        case Relation::Hypernym:
            return interleaved ? hypernym_il : hypernym_ni;
    }
    throw ConfigError("unknown relation");
}

std::vector<Query> build_queries(const std::vector<ShardItem>& items,
                                 bool interleaved, int repeats) {
    if (repeats < 1) throw ConfigError("build_queries: repeats must be >= 1");
    std::vector<Query> out;
    out.reserve(items.size() * static_cast<std::size_t>(repeats));
    for (std::size_t i = 0; i < items.size(); ++i) {
        const ShardItem& item = items[i];
        std::string prompt = shard_template(item.relation, interleaved);
        if (item.relation != Relation::Identity) {
            if (!item.candidate) {
                throw SchemaError("build_queries: relation item for '" +
                                  item.word + "' has no candidate");
            }
            const std::string slot = item.relation == Relation::Synonym
                                         ? "{synonym}"
                                         : "{hypernym}";
            prompt = fill_slot(prompt, slot, *item.candidate);
        }
        for (int r = 0; r < repeats; ++r) {
            out.push_back({i, r, prompt});
        }
    }
    return out;
}

Decision extract_decision(const std::string& response) {
    Decision d;
    d.raw_response = response;
    std::size_t best_pos = std::string::npos;
    std::size_t best_len = 0;
    Parsed best = Parsed::Unparsed;
    auto consider = [&](const std::vector<std::string>& phrases, Parsed tag) {
        for (const std::string& phrase : phrases) {
            const std::size_t pos = textmatch::find_word(response, phrase);
            if (pos == std::string::npos) continue;
            if (pos < best_pos ||
                (pos == best_pos && phrase.size() > best_len)) {
                best_pos = pos;
                best_len = phrase.size();
                best = tag;
            }
        }
    };
    consider(negative_phrases(), Parsed::No);
    consider(affirmative_phrases(), Parsed::Yes);
    if (best_pos != std::string::npos) {
        d.parsed = best;
        d.matched_span = response.substr(best_pos, best_len);
    }
    return d;
}

bool score_identity(const std::string& response,
                    const std::vector<std::string>& canonical_labels) {
    if (canonical_labels.empty()) {
        throw ConfigError("score_identity: no canonical labels");
    }
    for (const std::string& label : canonical_labels) {
        if (textmatch::contains_word(response, label)) return true;
    }
    return false;
}

RelationMetrics compute_relation_metrics(
    const std::vector<RelationTrial>& trials) {
    RelationMetrics m;
    for (const RelationTrial& t : trials) {
        const bool predicted_yes = t.decision.parsed == Parsed::Yes;
        if (t.decision.parsed == Parsed::Unparsed) ++m.unparsed_count;
        if (predicted_yes && t.truth_yes) ++m.tp;
        if (predicted_yes && !t.truth_yes) ++m.fp;
        if (!predicted_yes && !t.truth_yes) ++m.tn;
        if (!predicted_yes && t.truth_yes) ++m.fn;
    }
    const long long total = m.total();
    m.accuracy = total > 0
                     ? static_cast<double>(m.tp + m.tn) /
                           static_cast<double>(total)
                     : 0.0;
    if (m.tp + m.fp > 0) {
        m.precision =
            static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
        m.precision_defined = true;
    }
    if (m.tp + m.fn > 0) {
        m.recall =
            static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
        m.recall_defined = true;
    }
    if (m.precision + m.recall > 0.0) {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
        m.f1_defined = true;
    }
    return m;
}

MetricsReport compute_metrics(const std::vector<RelationTrial>& synonym_trials,
                              const std::vector<RelationTrial>& hypernym_trials,
                              long long identity_correct,
                              long long identity_total) {
    MetricsReport report;
    report.synonym = compute_relation_metrics(synonym_trials);
    report.hypernym = compute_relation_metrics(hypernym_trials);
    report.identity_total = identity_total;
    report.identity_correct = identity_correct;
    report.identity_accuracy =
        identity_total > 0 ? static_cast<double>(identity_correct) /
                                 static_cast<double>(identity_total)
                           : 0.0;
    return report;
}

} // namespace weave
