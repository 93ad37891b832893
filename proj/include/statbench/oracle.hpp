#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "statbench/statute_core.hpp"

namespace statbench {

enum class Gender { kFemale, kMale };

std::string to_string(Gender g);
Gender gender_from_string(std::string_view s);

struct PersonName {
    std::string name;
    Gender gender;
};

/// The bundled 30-name list (15 female, 15 male).
const std::vector<PersonName>& bundled_names();
std::vector<PersonName> load_names(const std::filesystem::path& file);

struct Fact {
    std::string person_name;
    Gender gender = Gender::kFemale;
    std::string fact_term;
};

/// "<Name> is <a/an> <term>."
std::string fact_sentence(const Fact& fact);

struct GroundTruth {
    bool applicable = false;
    std::optional<Definition> supporting_definition;  // present iff applicable
};

/// True iff `fact_term` appears on the right-hand side of a definition housed
/// within the target provision. Throws DataError for unknown terms or
/// citations that do not resolve to a provision of this statute.
GroundTruth applies(const DefTree& tree, const Citation& target, const std::string& fact_term);
GroundTruth applies(const DefTree& tree, int sentence_index, const std::string& fact_term);

/// Definitions applied bottom-up from `term` to the root term.
std::vector<Definition> derivation_chain(const DefTree& tree, const std::string& term);

/// Same verdict as `applies`, computed only from rendered text. Independent
/// oracle: it never sees the tree.
bool brute_force_applies(const ParsedRendering& rendering, const Citation& target,
                         const std::string& fact_term);
bool brute_force_applies(const ParsedRendering& rendering, int sentence_index,
                         const std::string& fact_term);
bool brute_force_applies(const RenderedStatute& rendered, const Citation& target,
                         const std::string& fact_term);
bool brute_force_applies(const RenderedSentences& rendered, int sentence_index,
                         const std::string& fact_term);

enum class RenderingKind { kStatute, kSentence };

std::string to_string(RenderingKind kind);
RenderingKind rendering_from_string(std::string_view s);

/// One benchmark instance. The target is always an atomic definitional
/// provision, carried both as a citation and as a sentence index so either
/// rendering can be evaluated.
struct TestItem {
    int index = 0;
    DefTree tree;
    RenderingKind rendering = RenderingKind::kStatute;
    Fact fact;
    Citation target_citation;
    int target_sentence_index = 0;
    std::string phrasing_id = "P1";
    GroundTruth label;
    std::uint64_t item_seed = 0;
};

/// Exactly n/2 positive and n/2 negative items, each over a fresh tree.
/// Deterministic for a fixed (spec, rng) pair; each item records the seed of
/// its own splittable generator.
std::vector<TestItem> sample_batch(const StatuteSpec& spec, int n, Rng& rng,
                                   const std::vector<PersonName>& names, const WordList& words,
                                   RenderingKind rendering = RenderingKind::kStatute);
std::vector<TestItem> sample_batch(const StatuteSpec& spec, int n, Rng& rng,
                                   RenderingKind rendering = RenderingKind::kStatute);

nlohmann::json item_to_json(const TestItem& item);
TestItem item_from_json(const nlohmann::json& j);

void write_items_jsonl(const std::filesystem::path& path, const std::vector<TestItem>& items);
std::vector<TestItem> read_items_jsonl(const std::filesystem::path& path);

}  // namespace statbench
