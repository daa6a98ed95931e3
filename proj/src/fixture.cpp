#include "weave/fixture.hpp"

#include <filesystem>
#include <unordered_map>

namespace weave {

namespace {

std::vector<LexiconEntry> make_lexicon() {
    using SC = SoundClass;
    std::vector<LexiconEntry> lex = {
        // anthrophony
        {"siren", SC::Anthrophony, {"alarm", "blare"}, {"warning sound", "alert"}},
        {"engine", SC::Anthrophony, {"motor", "powertrain"}, {"machine", "machinery"}},
        {"horn", SC::Anthrophony, {"honk", "klaxon"}, {"signal", "traffic sound"}},
        {"bell", SC::Anthrophony, {"chime", "toll"}, {"ringer", "metal sound"}},
        {"drum", SC::Anthrophony, {"snare", "tom tom"}, {"percussion", "instrument"}},
        {"guitar", SC::Anthrophony, {"six string", "strummer"}, {"string instrument", "instrument"}},
        {"piano", SC::Anthrophony, {"grand", "upright"}, {"keyboard instrument", "instrument"}},
        {"speech", SC::Anthrophony, {"talking", "speaking"}, {"voice", "human sound"}},
        {"laughter", SC::Anthrophony, {"laughing", "giggle"}, {"vocal expression", "human sound"}},
        {"applause", SC::Anthrophony, {"clapping", "ovation"}, {"crowd sound", "human sound"}},
        {"footsteps", SC::Anthrophony, {"footfalls", "treading"}, {"walking sound", "human sound"}},
        {"hammering", SC::Anthrophony, {"pounding", "banging"}, {"tool sound", "construction sound"}},
        {"drilling", SC::Anthrophony, {"boring", "augering"}, {"power tool sound", "construction sound"}},
        {"sawing", SC::Anthrophony, {"slicing", "rasping"}, {"carpentry sound", "construction sound"}},
        {"train", SC::Anthrophony, {"locomotive", "railcar"}, {"vehicle", "transport"}},
        {"truck", SC::Anthrophony, {"lorry", "semi"}, {"vehicle", "transport"}},
        {"motorcycle", SC::Anthrophony, {"motorbike", "moped"}, {"vehicle", "transport"}},
        {"helicopter", SC::Anthrophony, {"chopper", "rotorcraft"}, {"aircraft", "flying machine"}},
        {"airplane", SC::Anthrophony, {"plane", "jetliner"}, {"aircraft", "flying machine"}},
        {"whistle", SC::Anthrophony, {"toot", "shrill call"}, {"signal", "sharp sound"}},
        {"doorbell", SC::Anthrophony, {"buzzer", "door chime"}, {"signal", "household sound"}},
        {"typing", SC::Anthrophony, {"keystrokes", "tapping"}, {"office sound", "mechanical sound"}},
        {"vacuum", SC::Anthrophony, {"hoover", "suction cleaner"}, {"appliance", "household sound"}},
        {"chainsaw", SC::Anthrophony, {"power saw", "timber saw"}, {"power tool", "machine"}},
        {"gunshot", SC::Anthrophony, {"gunfire", "rifle shot"}, {"weapon sound", "blast"}},
        {"fireworks", SC::Anthrophony, {"firecrackers", "pyrotechnics"}, {"explosion", "celebration sound"}},
        // biophony
        {"bark", SC::Biophony, {"woof", "yap"}, {"dog sound", "animal call"}},
        {"meow", SC::Biophony, {"mew", "miaow"}, {"cat sound", "animal call"}},
        {"chirp", SC::Biophony, {"cheep", "peep"}, {"bird call", "animal call"}},
        {"roar", SC::Biophony, {"bellow", "outcry"}, {"big cat sound", "animal call"}},
        {"howl", SC::Biophony, {"wail", "baying"}, {"wolf sound", "animal call"}},
        {"croak", SC::Biophony, {"ribbit", "gronk"}, {"frog sound", "animal call"}},
        {"buzz", SC::Biophony, {"drone", "whirring"}, {"insect sound", "wing sound"}},
        {"moo", SC::Biophony, {"lowing", "mooing"}, {"cow sound", "farm animal sound"}},
        {"neigh", SC::Biophony, {"whinny", "nicker"}, {"horse sound", "farm animal sound"}},
        {"bleat", SC::Biophony, {"baa", "maa"}, {"sheep sound", "farm animal sound"}},
        {"oink", SC::Biophony, {"grunt", "snuffle"}, {"pig sound", "farm animal sound"}},
        {"quack", SC::Biophony, {"quacking", "gabble"}, {"duck sound", "waterfowl sound"}},
        {"hiss", SC::Biophony, {"sibilance", "sizzle"}, {"snake sound", "reptile sound"}},
        {"growl", SC::Biophony, {"snarl", "grumble"}, {"threat sound", "animal call"}},
        {"tweet", SC::Biophony, {"twitter", "warble"}, {"songbird sound", "bird call"}},
        {"caw", SC::Biophony, {"cawing", "kraa"}, {"crow sound", "bird call"}},
        {"hoot", SC::Biophony, {"whoo", "toowit"}, {"owl sound", "bird call"}},
        {"purr", SC::Biophony, {"thrum", "murmur"}, {"cat comfort sound", "contentment sound"}},
        {"bray", SC::Biophony, {"heehaw", "donkey laugh"}, {"donkey sound", "farm animal sound"}},
        {"cluck", SC::Biophony, {"clucking", "cackle"}, {"hen sound", "poultry sound"}},
        {"gobble", SC::Biophony, {"gobbling", "gulping call"}, {"turkey sound", "poultry sound"}},
        {"squeak", SC::Biophony, {"squeaking", "scritch"}, {"mouse sound", "rodent sound"}},
        {"chatter", SC::Biophony, {"chattering", "jabber"}, {"monkey sound", "primate sound"}},
        {"trumpeting", SC::Biophony, {"trumpet call", "loud bugle"}, {"elephant sound", "large animal sound"}},
        {"snort", SC::Biophony, {"snorting", "huff"}, {"nose sound", "animal breath"}},
        {"screech", SC::Biophony, {"screeching", "shriek"}, {"alarm call", "harsh cry"}},
        // geophony
        {"thunder", SC::Geophony, {"thunderclap", "sky rumble"}, {"storm sound", "weather sound"}},
        {"rain", SC::Geophony, {"rainfall", "shower"}, {"precipitation", "weather sound"}},
        {"wind", SC::Geophony, {"breeze", "draft"}, {"air movement", "weather sound"}},
        {"waves", SC::Geophony, {"surf", "breakers"}, {"ocean sound", "water sound"}},
        {"waterfall", SC::Geophony, {"cascade", "cataract"}, {"falling water", "water sound"}},
        {"earthquake", SC::Geophony, {"tremor", "quake"}, {"ground movement", "seismic sound"}},
        {"avalanche", SC::Geophony, {"snowslide", "slab release"}, {"snow movement", "mountain sound"}},
        {"hail", SC::Geophony, {"hailstones", "ice pellets"}, {"frozen precipitation", "weather sound"}},
        {"storm", SC::Geophony, {"tempest", "squall"}, {"weather event", "atmospheric sound"}},
        {"river", SC::Geophony, {"current flow", "watercourse"}, {"flowing water", "water sound"}},
        {"stream", SC::Geophony, {"brook", "creek"}, {"flowing water", "water sound"}},
        {"volcano", SC::Geophony, {"eruption", "outgassing"}, {"geological sound", "earth sound"}},
        {"lightning", SC::Geophony, {"bolt crack", "air snap"}, {"storm sound", "electrical discharge"}},
        {"blizzard", SC::Geophony, {"snowstorm", "whiteout"}, {"winter storm", "weather event"}},
        {"tide", SC::Geophony, {"tidal flow", "ebb"}, {"ocean movement", "water sound"}},
        {"gust", SC::Geophony, {"wind burst", "flurry"}, {"air movement", "weather sound"}},
        {"drizzle", SC::Geophony, {"light rain", "sprinkle"}, {"precipitation", "weather sound"}},
        {"downpour", SC::Geophony, {"deluge", "cloudburst"}, {"heavy rain", "weather sound"}},
        {"rumble", SC::Geophony, {"low roll", "deep boom"}, {"ground sound", "distant sound"}},
        {"splash", SC::Geophony, {"plop", "splatter"}, {"water impact", "water sound"}},
        {"crackle", SC::Geophony, {"fire crack", "snapping"}, {"fire sound", "burning sound"}},
        {"bubbling", SC::Geophony, {"gurgle", "burble"}, {"geyser sound", "water sound"}},
        {"echo", SC::Geophony, {"reverberation", "sound reflection"}, {"acoustic effect", "canyon sound"}},
        {"landslide", SC::Geophony, {"rockslide", "debris flow"}, {"ground movement", "mountain sound"}},
        {"geyser", SC::Geophony, {"hot spring jet", "water spout"}, {"thermal sound", "earth sound"}},
        {"sleet", SC::Geophony, {"icy rain", "slush fall"}, {"frozen precipitation", "winter weather sound"}},
    };

    // Cross-class candidate collisions would make distractor truth labels
    // wrong, so fail construction outright if one sneaks in.
    std::unordered_map<std::string, SoundClass> owner;
    for (const LexiconEntry& e : lex) {
        if (e.synonyms.size() != 2 || e.hypernyms.size() != 2) {
            throw FixtureError("lexicon entry '" + e.word +
                               "' must have 2 synonyms and 2 hypernyms");
        }
        for (const auto& lists : {e.synonyms, e.hypernyms}) {
            for (const std::string& c : lists) {
                auto [it, inserted] = owner.emplace(c, e.sound_class);
                if (!inserted && it->second != e.sound_class) {
                    throw FixtureError("lexicon candidate '" + c +
                                       "' appears in two sound classes");
                }
            }
        }
    }
    return lex;
}

// words picked round-robin across classes so counts differ by at most one
std::vector<const LexiconEntry*> pick_words(int words) {
    const auto& lex = mini_lexicon();
    if (words < 1) throw FixtureError("fixture: words must be >= 1");
    std::vector<const LexiconEntry*> by_class[3];
    for (const LexiconEntry& e : lex) {
        by_class[static_cast<int>(e.sound_class)].push_back(&e);
    }
    std::vector<const LexiconEntry*> picked;
    for (int i = 0; i < words; ++i) {
        auto& pool = by_class[i % 3];
        const std::size_t idx = static_cast<std::size_t>(i / 3);
        if (idx >= pool.size()) {
            throw FixtureError("fixture: lexicon exhausted at " +
                               std::to_string(words) + " words");
        }
        picked.push_back(pool[idx]);
    }
    return picked;
}

// distractor pool: synonyms or hypernyms of every other-class entry
std::vector<std::string> cross_class_pool(const LexiconEntry& entry,
                                          bool synonyms) {
    std::vector<std::string> pool;
    for (const LexiconEntry& other : mini_lexicon()) {
        if (other.sound_class == entry.sound_class) continue;
        const auto& src = synonyms ? other.synonyms : other.hypernyms;
        pool.insert(pool.end(), src.begin(), src.end());
    }
    return pool;
}

// One clip: per-word Gaussian mean + small per-frame noise, written once.
AudioClipRef write_clip(const std::string& out_dir, const FrontendConfig& cfg,
                        const LexiconEntry& entry, int word_index, int clip,
                        std::uint64_t seed) {
    const std::string dir = out_dir + "/features";
    std::filesystem::create_directories(dir);
    AudioClipRef ref;
    ref.id = entry.word + "_" + std::to_string(clip);
    ref.feature_path = dir + "/" + ref.id + ".aftr";
    ref.duration_s = 10.0;

    Rng mean_rng(seed ^ (0x5EEDF00Dull + 977ull * static_cast<std::uint64_t>(
                                             word_index)));
    std::vector<double> mean(static_cast<std::size_t>(cfg.d_audio));
    for (double& v : mean) v = mean_rng.normal();

    Rng clip_rng = mean_rng.fork(static_cast<std::uint64_t>(clip) + 1);
    const int frames = std::max(cfg.audio_slot_count, 12);
    std::vector<std::vector<double>> rows(
        static_cast<std::size_t>(frames),
        std::vector<double>(static_cast<std::size_t>(cfg.d_audio)));
    for (auto& row : rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            row[j] = mean[j] + 0.05 * clip_rng.normal();
        }
    }
    write_feature_file(ref.feature_path, rows);
    return ref;
}

std::string fill(std::string tmpl, const std::string& slot,
                 const std::string& value) {
    const std::size_t pos = tmpl.find(slot);
    if (pos != std::string::npos) tmpl.replace(pos, slot.size(), value);
    return tmpl;
}

} // namespace

const std::vector<LexiconEntry>& mini_lexicon() {
    static const std::vector<LexiconEntry> lex = make_lexicon();
    return lex;
}

std::vector<ShardItem> build_shard_fixture(const std::string& out_dir,
                                           const FrontendConfig& cfg,
                                           std::uint64_t seed, int words,
                                           int per_word_audio) {
    if (per_word_audio < 1) {
        throw FixtureError("fixture: per_word_audio must be >= 1");
    }
    const auto picked = pick_words(words);
    std::vector<ShardItem> items;
    Rng rng(seed);
    for (int w = 0; w < static_cast<int>(picked.size()); ++w) {
        const LexiconEntry& entry = *picked[static_cast<std::size_t>(w)];
        const auto syn_pool = cross_class_pool(entry, true);
        const auto hyp_pool = cross_class_pool(entry, false);
        for (int c = 0; c < per_word_audio; ++c) {
            const AudioClipRef clip =
                write_clip(out_dir, cfg, entry, w, c, seed);
            Rng item_rng = rng.fork(static_cast<std::uint64_t>(w) * 131 +
                                    static_cast<std::uint64_t>(c));
            ShardItem identity;
            identity.word = entry.word;
            identity.relation = Relation::Identity;
            identity.audio = clip;
            identity.truth = entry.word;
            identity.sound_class = entry.sound_class;
            items.push_back(identity);

            auto add_relation = [&](Relation rel, const std::string& cand,
                                    bool truth_yes) {
                ShardItem it;
                it.word = entry.word;
                it.relation = rel;
                it.candidate = cand;
                it.audio = clip;
                it.truth = truth_yes ? "Yes" : "No";
                it.sound_class = entry.sound_class;
                items.push_back(it);
            };
            for (const std::string& s : entry.synonyms) {
                add_relation(Relation::Synonym, s, true);
            }
            for (int n = 0; n < 2; ++n) {
                add_relation(Relation::Synonym,
                             syn_pool[item_rng.below(syn_pool.size())],
                             false);
            }
            for (const std::string& h : entry.hypernyms) {
                add_relation(Relation::Hypernym, h, true);
            }
            for (int n = 0; n < 2; ++n) {
                add_relation(Relation::Hypernym,
                             hyp_pool[item_rng.below(hyp_pool.size())],
                             false);
            }
        }
    }
    return items;
}

std::vector<SourceRecord> make_source_records(const std::string& out_dir,
                                              const FrontendConfig& cfg,
                                              std::uint64_t seed, int words,
                                              int per_word_audio) {
    if (per_word_audio < 1) {
        throw FixtureError("fixture: per_word_audio must be >= 1");
    }
    const auto picked = pick_words(words);
    std::vector<SourceRecord> records;
    Rng rng(seed);
    const std::string long_syn = shard_template(Relation::Synonym, false);
    const std::string short_syn = "Is this audio similar to {synonym}?";
    const std::string long_hyp = shard_template(Relation::Hypernym, false);
    const std::string short_hyp = "Is this audio a type of {hypernym}?";
    for (int w = 0; w < static_cast<int>(picked.size()); ++w) {
        const LexiconEntry& entry = *picked[static_cast<std::size_t>(w)];
        const auto syn_pool = cross_class_pool(entry, true);
        const auto hyp_pool = cross_class_pool(entry, false);
        for (int c = 0; c < per_word_audio; ++c) {
            const AudioClipRef clip =
                write_clip(out_dir, cfg, entry, w, c, seed);
            Rng rec_rng = rng.fork(static_cast<std::uint64_t>(w) * 257 +
                                   static_cast<std::uint64_t>(c));
            const std::string base_id =
                entry.word + "_" + std::to_string(c) + "_";

            SourceRecord identity;
            identity.id = base_id + "identity";
            identity.audio = clip;
            identity.original_prompt =
                rec_rng.below(2) == 0
                    ? shard_template(Relation::Identity, false)
                    : "Analyze audio events in clip given.";
            identity.answer = "Labels: " + entry.word;
            identity.task_type = TaskType::LabelClassification;
            records.push_back(identity);

            auto add_relation = [&](const std::string& id_suffix,
                                    const std::string& long_tmpl,
                                    const std::string& short_tmpl,
                                    const std::string& slot,
                                    const std::string& cand, bool yes) {
                SourceRecord r;
                r.id = base_id + id_suffix;
                r.audio = clip;
                const bool use_long = rec_rng.below(2) == 0;
                r.original_prompt =
                    fill(use_long ? long_tmpl : short_tmpl, slot, cand);
                r.answer = yes ? "Yes." : "No.";
                r.task_type = TaskType::OpenEnded;
                records.push_back(r);
            };
            add_relation("syn_pos", long_syn, short_syn, "{synonym}",
                         entry.synonyms[rec_rng.below(2)], true);
            add_relation("syn_neg", long_syn, short_syn, "{synonym}",
                         syn_pool[rec_rng.below(syn_pool.size())], false);
            add_relation("hyp_pos", long_hyp, short_hyp, "{hypernym}",
                         entry.hypernyms[rec_rng.below(2)], true);
            add_relation("hyp_neg", long_hyp, short_hyp, "{hypernym}",
                         hyp_pool[rec_rng.below(hyp_pool.size())], false);
        }
    }
    return records;
}

std::vector<std::string> lexicon_corpus_lines() {
    std::vector<std::string> lines;
    for (const LexiconEntry& e : mini_lexicon()) {
        lines.push_back(e.word);
        for (const std::string& s : e.synonyms) lines.push_back(s);
        for (const std::string& h : e.hypernyms) lines.push_back(h);
        lines.push_back("Labels: " + e.word);
    }
    for (Relation r :
         {Relation::Identity, Relation::Synonym, Relation::Hypernym}) {
        lines.push_back(shard_template(r, false));
        lines.push_back(shard_template(r, true));
    }
    lines.push_back("Is this audio similar to {synonym}?");
    lines.push_back("Is this audio a type of {hypernym}?");
    lines.push_back("Analyze audio events in clip given.");
    const TemplateBank bank = TemplateBank::standard();
    for (const std::string& t : bank.label_templates) lines.push_back(t);
    for (const std::string& t : bank.acoustic_templates) lines.push_back(t);
    lines.push_back("Based on [AUDIO], ");
    lines.push_back("Yes.");
    lines.push_back("No.");
    return lines;
}

} // namespace weave
