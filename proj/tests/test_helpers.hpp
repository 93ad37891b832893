#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "statbench/statute_core.hpp"
#include "statbench/usc_probe.hpp"
#include "statbench/util.hpp"

namespace test_helpers {

inline std::filesystem::path golden_dir() { return STATBENCH_GOLDEN_DIR; }
inline std::filesystem::path fixture_dir() { return STATBENCH_FIXTURE_DIR; }

/// Golden files end with one trailing newline; rendered text does not.
inline std::string read_golden(const std::string& name) {
    std::string text = statbench::read_text_file(golden_dir() / name);
    if (!text.empty() && text.back() == '\n') text.pop_back();
    return text;
}

// Known trees, terms listed level by level.

inline statbench::DefTree rolang_tree() {
    statbench::StatuteSpec spec;
    spec.width = 2;
    spec.depth = 2;
    return statbench::tree_from_terms(spec, {"rolang", "soultratessly", "parkinse", "oxideney",
                                             "chastiles", "portle", "frestes"});
}

inline statbench::DefTree infarber_tree() {
    statbench::StatuteSpec spec;
    spec.width = 2;
    spec.depth = 2;
    return statbench::tree_from_terms(spec, {"infarber", "purentiable", "digirderasters", "packle",
                                             "amperseced", "artion", "irtityrating"});
}

inline statbench::DefTree bowlery_tree() {
    statbench::StatuteSpec spec;
    spec.width = 2;
    spec.depth = 3;
    return statbench::tree_from_terms(
        spec, {"bowlery",      "waitormenteed", "kiterrupider", "redeba",    "dischieviders",
               "bruselers",    "fashiple",      "ersubs",       "pushotyptopses", "nookede",
               "chastiles",    "legimetar",     "exematess",    "tanded",    "goghts"});
}

inline statbench::DefTree morlith_tree() {
    statbench::StatuteSpec spec;
    spec.width = 3;
    spec.depth = 2;
    return statbench::tree_from_terms(
        spec, {"morlith", "parnelt", "quoshin", "ralbex", "stemvick", "tublore", "umbrins",
               "vexolet", "windrab", "xandrip", "yorbele", "zuthers", "arbinak"});
}

inline statbench::Citation cite(const std::string& text) { return statbench::parse_citation(text); }

/// Deterministic pseudo-statutory prose over a small vocabulary.
inline std::string fixture_prose(statbench::Rng& rng, int words) {
    static const std::vector<std::string> vocab = {
        "person",  "employer",  "wages",    "calendar", "year",    "taxable",  "income",
        "return",  "spouse",    "household", "service",  "performed", "employee", "amount",
        "paid",    "individual", "term",     "means",    "chapter",  "respect",  "quarter",
        "deduction", "allowed",  "computed", "status",   "close",    "shall",    "imposed",
        "tax",     "gross"};
    std::string out;
    for (int i = 0; i < words; ++i) {
        if (i > 0) out += (i % 12 == 0) ? ". " : " ";
        out += vocab[rng.below(vocab.size())];
    }
    out += ".";
    return out;
}

/// Three-title fixture corpus; every title gets `per_title` sections of
/// 100-1000 words plus one 40-word section the sampler must skip.
inline std::vector<statbench::UscSection> fixture_corpus(std::uint64_t seed, int per_title = 7) {
    statbench::Rng rng(seed);
    std::vector<statbench::UscSection> corpus;
    for (int title : {5, 17, 26}) {
        for (int i = 0; i < per_title; ++i) {
            statbench::UscSection section;
            section.title = title;
            section.section = std::to_string(101 + i);
            section.heading = "Fixture section " + section.section;
            section.body = fixture_prose(rng, 100 + static_cast<int>(rng.below(400)));
            section.word_count = statbench::whitespace_token_count(section.body);
            corpus.push_back(std::move(section));
        }
        statbench::UscSection runt;
        runt.title = title;
        runt.section = "9001";
        runt.heading = "Too short to sample";
        runt.body = fixture_prose(rng, 40);
        runt.word_count = statbench::whitespace_token_count(runt.body);
        corpus.push_back(std::move(runt));
    }
    return corpus;
}

}  // namespace test_helpers
