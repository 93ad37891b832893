#include "statbench/oracle.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace statbench {

using nlohmann::json;

std::string to_string(Gender g) { return g == Gender::kFemale ? "female" : "male"; }

Gender gender_from_string(std::string_view s) {
    if (s == "female") return Gender::kFemale;
    if (s == "male") return Gender::kMale;
    throw DataError("unknown gender tag: " + std::string(s));
}

std::vector<PersonName> load_names(const std::filesystem::path& file) {
    std::vector<PersonName> names;
    for (const auto& raw : split_lines(read_text_file(file))) {
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto parts = split_ws(line);
        if (parts.size() != 2) throw DataError("bad name entry: " + line);
        names.push_back(PersonName{parts[0], gender_from_string(parts[1])});
    }
    if (names.size() != 30) {
        throw DataError("name list must contain 30 entries, got " + std::to_string(names.size()));
    }
    return names;
}

const std::vector<PersonName>& bundled_names() {
    static const std::vector<PersonName> names = load_names(data_dir() / "names.txt");
    return names;
}

std::string fact_sentence(const Fact& fact) {
    return fact.person_name + " is " + indefinite_article(fact.fact_term) + " " + fact.fact_term + ".";
}

namespace {

/// Returns the definition whose right-hand side lists `term`, or nullopt for
/// the root term (which appears on no right-hand side).
std::optional<Definition> parent_definition(const std::vector<Definition>& defs,
                                            const std::string& term) {
    for (const auto& def : defs) {
        if (std::find(def.rhs_terms.begin(), def.rhs_terms.end(), term) != def.rhs_terms.end()) {
            return def;
        }
    }
    return std::nullopt;
}

/// Every provision path of the statute: each definition's citation, all of
/// its prefixes, and the item provisions housing the right-hand-side lines.
std::set<std::vector<CitationPart>> all_provision_paths(const std::vector<Definition>& defs) {
    std::set<std::vector<CitationPart>> paths;
    paths.insert(std::vector<CitationPart>{});  // the section itself
    for (const auto& def : defs) {
        for (std::size_t len = 1; len <= def.citation.path.size(); ++len) {
            paths.insert(
                std::vector<CitationPart>(def.citation.path.begin(), def.citation.path.begin() + len));
        }
        const LevelKind item_level = level_at(static_cast<int>(def.citation.path.size()));
        for (std::size_t k = 0; k < def.rhs_terms.size(); ++k) {
            auto item = def.citation.path;
            item.push_back({item_level, level_label(item_level, static_cast<int>(k) + 1)});
            paths.insert(std::move(item));
        }
    }
    return paths;
}

void require_target(const std::vector<Definition>& defs, const Citation& target) {
    if (target.section_number != 1001) {
        throw DataError("citation names a different section: " + format_citation(target));
    }
    if (!all_provision_paths(defs).count(target.path)) {
        throw DataError("citation does not resolve to a provision: " + format_citation(target));
    }
}

}  // namespace

GroundTruth applies(const DefTree& tree, const Citation& target, const std::string& fact_term) {
    if (!tree.contains(fact_term)) throw DataError("unknown term: " + fact_term);
    const auto defs = layout_definitions(tree);
    require_target(defs, target);
    const auto parent = parent_definition(defs, fact_term);
    GroundTruth truth;
    if (parent && citation_contains(target, parent->citation)) {
        truth.applicable = true;
        truth.supporting_definition = parent;
    }
    return truth;
}

GroundTruth applies(const DefTree& tree, int sentence_index, const std::string& fact_term) {
    if (!tree.contains(fact_term)) throw DataError("unknown term: " + fact_term);
    const auto defs = layout_definitions(tree);
    if (sentence_index < 1 || sentence_index > static_cast<int>(defs.size())) {
        throw DataError("sentence index out of range: " + std::to_string(sentence_index));
    }
    const auto parent = parent_definition(defs, fact_term);
    GroundTruth truth;
    if (parent && parent->sentence_index == sentence_index) {
        truth.applicable = true;
        truth.supporting_definition = parent;
    }
    return truth;
}

std::vector<Definition> derivation_chain(const DefTree& tree, const std::string& term) {
    if (!tree.contains(term)) throw DataError("unknown term: " + term);
    if (term == tree.root().term) throw DataError("derivation chain of the root term is empty");
    const auto defs = layout_definitions(tree);
    std::map<std::string, const Definition*> by_definiendum;
    for (const auto& def : defs) by_definiendum[def.definiendum] = &def;

    std::vector<Definition> chain;
    const DefNode* node = tree.parent_of(term);
    while (node != nullptr) {
        chain.push_back(*by_definiendum.at(node->term));
        node = tree.parent_of(node->term);
    }
    return chain;
}

namespace {

std::set<std::vector<CitationPart>> parsed_provision_paths(const std::vector<ParsedDefinition>& defs) {
    std::set<std::vector<CitationPart>> paths;
    paths.insert(std::vector<CitationPart>{});
    for (const auto& def : defs) {
        for (std::size_t len = 1; len <= def.citation.path.size(); ++len) {
            paths.insert(
                std::vector<CitationPart>(def.citation.path.begin(), def.citation.path.begin() + len));
        }
        const LevelKind item_level = level_at(static_cast<int>(def.citation.path.size()));
        for (std::size_t k = 0; k < def.rhs_terms.size(); ++k) {
            auto item = def.citation.path;
            item.push_back({item_level, level_label(item_level, static_cast<int>(k) + 1)});
            paths.insert(std::move(item));
        }
    }
    return paths;
}

}  // namespace

bool brute_force_applies(const ParsedRendering& rendering, const Citation& target,
                         const std::string& fact_term) {
    if (!rendering.statute_mode) {
        throw DataError("citation target used against a sentence rendering");
    }
    if (!parsed_provision_paths(rendering.definitions).count(target.path)) {
        throw DataError("citation does not resolve to a provision: " + format_citation(target));
    }
    for (const auto& def : rendering.definitions) {
        if (!citation_contains(target, def.citation)) continue;
        for (const auto& rhs : def.rhs_terms) {
            if (rhs == fact_term) return true;
        }
    }
    return false;
}

bool brute_force_applies(const ParsedRendering& rendering, int sentence_index,
                         const std::string& fact_term) {
    bool found = false;
    for (const auto& def : rendering.definitions) {
        if (def.sentence_index != sentence_index) continue;
        found = true;
        for (const auto& rhs : def.rhs_terms) {
            if (rhs == fact_term) return true;
        }
    }
    if (!found) throw DataError("sentence index out of range: " + std::to_string(sentence_index));
    return false;
}

bool brute_force_applies(const RenderedStatute& rendered, const Citation& target,
                         const std::string& fact_term) {
    return brute_force_applies(parse_rendered_statute(rendered.text), target, fact_term);
}

bool brute_force_applies(const RenderedSentences& rendered, int sentence_index,
                         const std::string& fact_term) {
    return brute_force_applies(parse_rendered_sentences(rendered.text), sentence_index, fact_term);
}

std::string to_string(RenderingKind kind) {
    return kind == RenderingKind::kStatute ? "statute" : "sentence";
}

RenderingKind rendering_from_string(std::string_view s) {
    if (s == "statute") return RenderingKind::kStatute;
    if (s == "sentence" || s == "sentences") return RenderingKind::kSentence;
    throw ConfigError("unknown rendering: " + std::string(s));
}

std::vector<TestItem> sample_batch(const StatuteSpec& spec, int n, Rng& rng,
                                   const std::vector<PersonName>& names, const WordList& words,
                                   RenderingKind rendering) {
    validate_spec(spec);
    if (n <= 0 || n % 2 != 0) {
        throw ConfigError("batch size must be a positive even number, got " + std::to_string(n));
    }
    if (names.empty()) throw ConfigError("empty name list");

    std::vector<bool> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n / 2; ++i) labels[static_cast<std::size_t>(i)] = true;
    Rng label_rng = rng.split(0x1ABE15);
    label_rng.shuffle(labels);

    std::vector<TestItem> items;
    items.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rng item_rng = rng.split(static_cast<std::uint64_t>(i) + 1);
        TestItem item;
        item.index = i;
        item.item_seed = item_rng.state();
        StatuteSpec item_spec = spec;
        item_spec.seed = item.item_seed;
        item.tree = generate_tree(item_spec, item_rng, words);
        item.rendering = rendering;

        const auto defs = layout_definitions(item.tree);
        const auto& target = defs[item_rng.below(defs.size())];
        item.target_citation = target.citation;
        item.target_sentence_index = target.sentence_index;

        const bool want_positive = labels[static_cast<std::size_t>(i)];
        std::vector<std::string> candidates;
        if (want_positive) {
            candidates = target.rhs_terms;
        } else {
            const std::set<std::string> excluded(target.rhs_terms.begin(), target.rhs_terms.end());
            for (const auto& term : item.tree.all_terms()) {
                if (term == item.tree.root().term) continue;
                if (excluded.count(term)) continue;
                candidates.push_back(term);
            }
        }
        if (candidates.empty()) {
            throw ConfigError("no term realizes the requested label for target " +
                              format_citation(target.citation));
        }
        const auto& person = names[item_rng.below(names.size())];
        item.fact.person_name = person.name;
        item.fact.gender = person.gender;
        item.fact.fact_term = candidates[item_rng.below(candidates.size())];

        item.label = applies(item.tree, item.target_citation, item.fact.fact_term);
        if (item.label.applicable != want_positive) {
            throw std::logic_error("sampled label disagrees with the oracle");
        }
        items.push_back(std::move(item));
    }
    return items;
}

std::vector<TestItem> sample_batch(const StatuteSpec& spec, int n, Rng& rng, RenderingKind rendering) {
    return sample_batch(spec, n, rng, bundled_names(), WordList::bundled(), rendering);
}

json item_to_json(const TestItem& item) {
    json j;
    j["index"] = item.index;
    j["meta"] = {{"width", item.tree.spec().width},
                 {"depth", item.tree.spec().depth},
                 {"term_mode", to_string(item.tree.spec().term_mode)},
                 {"seed", item.item_seed}};
    j["tree"] = tree_to_json(item.tree);
    j["rendering"] = to_string(item.rendering);
    j["fact"] = {{"name", item.fact.person_name},
                 {"gender", to_string(item.fact.gender)},
                 {"term", item.fact.fact_term}};
    j["target"] = {{"citation", format_citation(item.target_citation)},
                   {"sentence_index", item.target_sentence_index}};
    j["phrasing"] = item.phrasing_id;
    json label;
    label["applicable"] = item.label.applicable;
    if (item.label.supporting_definition) {
        label["supporting_citation"] = format_citation(item.label.supporting_definition->citation);
        label["supporting_sentence"] = item.label.supporting_definition->sentence_index;
    }
    j["label"] = label;
    j["statute_text"] = render_statute(item.tree).text;
    j["sentences_text"] = render_sentences(item.tree).text;
    return j;
}

TestItem item_from_json(const json& j) {
    TestItem item;
    item.index = j.at("index").get<int>();
    item.tree = tree_from_json(j.at("tree"));
    item.item_seed = j.at("meta").at("seed").get<std::uint64_t>();
    item.rendering = rendering_from_string(j.at("rendering").get<std::string>());
    item.fact.person_name = j.at("fact").at("name").get<std::string>();
    item.fact.gender = gender_from_string(j.at("fact").at("gender").get<std::string>());
    item.fact.fact_term = j.at("fact").at("term").get<std::string>();
    item.target_citation = parse_citation(j.at("target").at("citation").get<std::string>());
    item.target_sentence_index = j.at("target").at("sentence_index").get<int>();
    item.phrasing_id = j.at("phrasing").get<std::string>();
    item.label = applies(item.tree, item.target_citation, item.fact.fact_term);
    if (item.label.applicable != j.at("label").at("applicable").get<bool>()) {
        throw DataError("stored label disagrees with the oracle for item " + std::to_string(item.index));
    }
    return item;
}

void write_items_jsonl(const std::filesystem::path& path, const std::vector<TestItem>& items) {
    std::string out;
    for (const auto& item : items) {
        out += item_to_json(item).dump();
        out += '\n';
    }
    write_text_file_atomic(path, out);
}

std::vector<TestItem> read_items_jsonl(const std::filesystem::path& path) {
    std::vector<TestItem> items;
    for (const auto& line : split_lines(read_text_file(path))) {
        if (trim(line).empty()) continue;
        items.push_back(item_from_json(json::parse(line)));
    }
    return items;
}

}  // namespace statbench
