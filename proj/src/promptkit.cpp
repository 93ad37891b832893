#include "statbench/promptkit.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

namespace statbench {

using nlohmann::json;

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::kYes: return "Yes";
        case Verdict::kNo: return "No";
        case Verdict::kEntailment: return "Entailment";
        case Verdict::kContradiction: return "Contradiction";
        case Verdict::kIndeterminate: return "Indeterminate";
    }
    return "Indeterminate";
}

const PhrasingSet& PhrasingSet::bundled() {
    static const PhrasingSet set = PhrasingSet::load(data_dir() / "phrasings.json");
    return set;
}

PhrasingSet PhrasingSet::load(const std::filesystem::path& file) {
    const json j = json::parse(read_text_file(file));
    PhrasingSet set;
    for (int i = 1; i <= 7; ++i) {
        const std::string id = "P" + std::to_string(i);
        if (!j.contains(id)) throw DataError("phrasing file missing " + id + ": " + file.string());
        set.variants_.push_back(PhrasingVariant{id, j.at(id).get<std::string>()});
    }
    return set;
}

const PhrasingVariant& PhrasingSet::get(const std::string& id) const {
    for (const auto& v : variants_) {
        if (v.id == id) return v;
    }
    throw ConfigError("unknown phrasing id: " + id);
}

std::string expand_phrasing(const PhrasingVariant& phrasing, const std::string& provision_ref,
                            const std::string& person_name, Gender gender,
                            const std::string& root_term) {
    std::string q = phrasing.question_template;
    q = replace_all(std::move(q), "{S}", provision_ref);
    q = replace_all(std::move(q), "{N}", person_name);
    q = replace_all(std::move(q), "{T}", root_term);
    q = replace_all(std::move(q), "{a(n)}", indefinite_article(root_term));
    q = replace_all(std::move(q), "{her/him}", gender == Gender::kFemale ? "her" : "him");
    return q;
}

std::string provision_reference(const TestItem& item) {
    if (item.rendering == RenderingKind::kStatute) return format_citation(item.target_citation);
    return "sentence " + std::to_string(item.target_sentence_index);
}

namespace {

std::string rendering_text(const TestItem& item) {
    if (item.rendering == RenderingKind::kStatute) return render_statute(item.tree).text;
    return render_sentences(item.tree).text;
}

}  // namespace

PromptBundle build_zero_shot(const TestItem& item, const PhrasingVariant& phrasing) {
    const std::string question = expand_phrasing(phrasing, provision_reference(item),
                                                 item.fact.person_name, item.fact.gender,
                                                 item.tree.root().term);
    PromptBundle bundle;
    bundle.stage1_prompt = rendering_text(item) + "\n\n" + fact_sentence(item.fact) + " " + question +
                           " " + std::string(kStepByStep);
    bundle.extraction_suffix = std::string(kYesNoExtractionSuffix);
    bundle.expects = Expects::kYesNo;
    return bundle;
}

PromptBundle build_zero_shot(const TestItem& item) {
    return build_zero_shot(item, PhrasingSet::bundled().get(item.phrasing_id));
}

TwoShotPlan sample_two_shot_plan(const TestItem& item, Rng& rng,
                                 const std::vector<PersonName>& names) {
    const auto defs = layout_definitions(item.tree);
    std::vector<const Definition*> candidates;
    for (const auto& def : defs) {
        if (def.citation != item.target_citation) candidates.push_back(&def);
    }
    if (candidates.empty()) {
        throw ConfigError("statute too small: no example provision distinct from the test target");
    }
    const Definition& example = *candidates[rng.below(candidates.size())];

    TwoShotPlan plan;
    plan.example_citation = example.citation;

    std::vector<std::string> yes_terms;
    for (const auto& t : example.rhs_terms) {
        if (t != item.fact.fact_term) yes_terms.push_back(t);
    }
    std::vector<std::string> no_terms;
    const std::set<std::string> rhs(example.rhs_terms.begin(), example.rhs_terms.end());
    for (const auto& t : item.tree.all_terms()) {
        if (t == item.tree.root().term || rhs.count(t) || t == item.fact.fact_term) continue;
        no_terms.push_back(t);
    }
    if (yes_terms.empty() || no_terms.empty()) {
        throw ConfigError("statute too small: cannot pick distinct example fact terms");
    }
    plan.yes_term = yes_terms[rng.below(yes_terms.size())];
    plan.no_term = no_terms[rng.below(no_terms.size())];

    std::vector<const PersonName*> name_pool;
    for (const auto& p : names) {
        if (p.name != item.fact.person_name) name_pool.push_back(&p);
    }
    if (name_pool.size() < 2) throw ConfigError("name list too small for a two-shot prompt");
    const std::size_t first = rng.below(name_pool.size());
    std::size_t second = rng.below(name_pool.size() - 1);
    if (second >= first) ++second;
    plan.yes_name = name_pool[first]->name;
    plan.no_name = name_pool[second]->name;
    plan.yes_first = rng.coin();
    return plan;
}

namespace {

std::string example_block(const Citation& cite, const Definition& def, const std::string& name,
                          const std::string& term, bool positive) {
    const std::string cite_str = format_citation(cite);
    std::string block = name + " is " + indefinite_article(term) + " " + term + ". Is " + cite_str +
                        " applicable to " + name + "? " + capitalize(cite_str) + " says that " +
                        def.definiendum + " means " + conjoin_any(def.rhs_terms) + ". ";
    if (positive) {
        block += name + " is " + indefinite_article(term) + " " + term + ", so " + cite_str +
                 " does apply to " + name + ".";
    } else {
        block += name + " is none of these, so " + cite_str + " does NOT apply to " + name + ".";
    }
    return block;
}

}  // namespace

PromptBundle build_two_shot(const TestItem& item, const TwoShotPlan& plan) {
    if (item.rendering != RenderingKind::kStatute) {
        throw ConfigError("two-shot prompts require the statute rendering");
    }
    if (item.tree.spec().term_mode != TermMode::kNonce) {
        throw ConfigError("two-shot prompts require nonce terms");
    }
    if (plan.example_citation == item.target_citation) {
        throw ConfigError("two-shot example provision equals the test provision");
    }
    const auto defs = layout_definitions(item.tree);
    const Definition* example = nullptr;
    for (const auto& def : defs) {
        if (def.citation == plan.example_citation) example = &def;
    }
    if (!example) {
        throw ConfigError("example citation is not a definitional provision: " +
                          format_citation(plan.example_citation));
    }

    const std::string yes_block =
        example_block(plan.example_citation, *example, plan.yes_name, plan.yes_term, true);
    const std::string no_block =
        example_block(plan.example_citation, *example, plan.no_name, plan.no_term, false);

    const std::string question = "Is " + format_citation(item.target_citation) + " applicable to " +
                                 item.fact.person_name + "?";

    PromptBundle bundle;
    bundle.stage1_prompt = render_statute(item.tree).text + "\n\n" +
                           (plan.yes_first ? yes_block : no_block) + "\n\n" +
                           (plan.yes_first ? no_block : yes_block) + "\n\n" +
                           fact_sentence(item.fact) + " " + question;
    bundle.extraction_suffix = std::string(kYesNoExtractionSuffix);
    bundle.expects = Expects::kYesNo;
    return bundle;
}

PromptBundle build_two_shot(const TestItem& item, Rng& rng) {
    return build_two_shot(item, sample_two_shot_plan(item, rng, bundled_names()));
}

std::string build_extraction(const std::string& stage1_prompt, const std::string& response,
                             Expects expects) {
    const std::string_view suffix =
        expects == Expects::kYesNo ? kYesNoExtractionSuffix : kEntailContraExtractionSuffix;
    return stage1_prompt + response + "\n" + std::string(suffix);
}

namespace {

int count_occurrences(const std::string& haystack, const std::string& needle) {
    int count = 0;
    std::size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

}  // namespace

ExtractedAnswer parse_answer(std::string_view text, Expects expects) {
    ExtractedAnswer answer;
    const std::string lower = to_lower(text);
    if (expects == Expects::kYesNo) {
        const int pos_phrases = count_occurrences(lower, "does apply");
        const int neg_phrases = count_occurrences(lower, "does not apply");
        if (pos_phrases > 0 && neg_phrases == 0) {
            answer.verdict = Verdict::kYes;
            return answer;
        }
        if (neg_phrases > 0 && pos_phrases == 0) {
            answer.verdict = Verdict::kNo;
            return answer;
        }
        if (pos_phrases > 0 && neg_phrases > 0) return answer;  // ambiguous

        int yes = 0, no = 0;
        for (const auto& tok : word_tokens(text)) {
            if (tok == "yes") ++yes;
            if (tok == "no") ++no;
        }
        if (yes > 0 && no == 0) answer.verdict = Verdict::kYes;
        if (no > 0 && yes == 0) answer.verdict = Verdict::kNo;
        return answer;
    }

    int entail = 0, contra = 0;
    for (const auto& tok : word_tokens(text)) {
        if (tok == "entailment") ++entail;
        if (tok == "contradiction") ++contra;
    }
    if (entail > 0 && contra == 0) answer.verdict = Verdict::kEntailment;
    if (contra > 0 && entail == 0) answer.verdict = Verdict::kContradiction;
    return answer;
}

Verdict expected_verdict(const TestItem& item) {
    return item.label.applicable ? Verdict::kYes : Verdict::kNo;
}

}  // namespace statbench
