#include <doctest.h>

#include <set>

#include <nlohmann/json.hpp>

#include "statbench/promptkit.hpp"
#include "test_helpers.hpp"

using namespace statbench;
using test_helpers::cite;
using test_helpers::read_golden;

namespace {

TestItem rolang_item() {
    TestItem item;
    item.tree = test_helpers::rolang_tree();
    item.rendering = RenderingKind::kStatute;
    item.fact = {"Alexis", Gender::kFemale, "portle"};
    item.target_citation = cite("section 1001(b)");
    item.target_sentence_index = 2;
    item.label = applies(item.tree, item.target_citation, item.fact.fact_term);
    return item;
}

TestItem infarber_item() {
    TestItem item;
    item.tree = test_helpers::infarber_tree();
    item.rendering = RenderingKind::kSentence;
    item.fact = {"Emma", Gender::kFemale, "artion"};
    item.target_citation = cite("section 1001(b)");
    item.target_sentence_index = 2;
    item.label = applies(item.tree, item.target_sentence_index, item.fact.fact_term);
    return item;
}

TestItem bowlery_item() {
    TestItem item;
    item.tree = test_helpers::bowlery_tree();
    item.rendering = RenderingKind::kStatute;
    item.fact = {"Nicholas", Gender::kMale, "pushotyptopses"};
    item.target_citation = cite("section 1001(c)(2)");
    item.target_sentence_index = 6;
    item.label = applies(item.tree, item.target_citation, item.fact.fact_term);
    return item;
}

}  // namespace

TEST_CASE("the seven phrasings expand to their documented examples") {
    const auto& set = PhrasingSet::bundled();
    const std::string S = "section 1001(b)";
    auto expand = [&](const std::string& id) {
        return expand_phrasing(set.get(id), S, "Alexis", Gender::kFemale, "rolang");
    };
    CHECK(expand("P1") == "Is section 1001(b) applicable to Alexis?");
    CHECK(expand("P2") == "Does section 1001(b) apply to Alexis?");
    CHECK(expand("P3") == "Does section 1001(b) apply to Alexis, making her a rolang?");
    CHECK(expand("P4") == "Does section 1001(b) apply to make Alexis a rolang?");
    CHECK(expand("P5") == "Is Alexis a rolang because of section 1001(b)?");
    CHECK(expand("P6") == "Is Alexis a rolang owing to section 1001(b)?");
    CHECK(expand("P7") == "Is Alexis a rolang as per section 1001(b)?");
}

TEST_CASE("phrasings pick the pronoun and article from the item") {
    const auto& p3 = PhrasingSet::bundled().get("P3");
    CHECK(expand_phrasing(p3, "section 1001(b)", "Nicholas", Gender::kMale, "rolang") ==
          "Does section 1001(b) apply to Nicholas, making him a rolang?");
    CHECK(expand_phrasing(p3, "section 1001(b)", "Emma", Gender::kFemale, "artion") ==
          "Does section 1001(b) apply to Emma, making her an artion?");
}

TEST_CASE("zero-shot statute prompt matches the golden bytes") {
    const auto bundle = build_zero_shot(rolang_item(), PhrasingSet::bundled().get("P1"));
    CHECK(bundle.stage1_prompt == read_golden("rolang_zero_shot_prompt.txt"));
    CHECK(bundle.expects == Expects::kYesNo);
    CHECK(bundle.extraction_suffix == "Therefore, the answer (Yes or No) is");
}

TEST_CASE("zero-shot sentence prompt matches the golden bytes") {
    const auto bundle = build_zero_shot(infarber_item(), PhrasingSet::bundled().get("P1"));
    CHECK(bundle.stage1_prompt == read_golden("infarber_zero_shot_prompt.txt"));
}

TEST_CASE("sentence-mode questions swap the provision slot") {
    const auto q2 = build_zero_shot(infarber_item(), PhrasingSet::bundled().get("P2"));
    CHECK(q2.stage1_prompt.find("Does sentence 2 apply to Emma?") != std::string::npos);
}

TEST_CASE("every zero-shot prompt ends with the step-by-step cue") {
    StatuteSpec spec;
    spec.width = 2;
    spec.depth = 2;
    spec.seed = 404;
    Rng rng(spec.seed);
    const auto items = sample_batch(spec, 10, rng);
    for (const auto& phrasing : PhrasingSet::bundled().all()) {
        for (auto item : items) {
            for (RenderingKind kind : {RenderingKind::kStatute, RenderingKind::kSentence}) {
                item.rendering = kind;
                const auto bundle = build_zero_shot(item, phrasing);
                const std::string& p = bundle.stage1_prompt;
                REQUIRE(p.size() > kStepByStep.size());
                CHECK(p.compare(p.size() - kStepByStep.size(), kStepByStep.size(), kStepByStep) == 0);
            }
        }
    }
}

TEST_CASE("two-shot prompt with the known example assignments matches the golden bytes") {
    TwoShotPlan plan;
    plan.example_citation = cite("section 1001(c)(3)");
    plan.yes_name = "Alyssa";
    plan.yes_term = "goghts";
    plan.no_name = "Hannah";
    plan.no_term = "chastiles";
    plan.yes_first = false;
    const auto bundle = build_two_shot(bowlery_item(), plan);
    CHECK(bundle.stage1_prompt == read_golden("bowlery_two_shot_prompt.txt"));
}

TEST_CASE("two-shot prompts respect the sampling constraints") {
    StatuteSpec spec;
    spec.width = 2;
    spec.depth = 3;
    spec.seed = 2025;
    Rng rng(spec.seed);
    const auto items = sample_batch(spec, 20, rng);
    int yes_first = 0;
    for (int round = 0; round < 50; ++round) {
        for (const auto& item : items) {
            Rng plan_rng(static_cast<std::uint64_t>(round) * 1000 + item.index);
            const auto plan = sample_two_shot_plan(item, plan_rng, bundled_names());
            CHECK(plan.example_citation != item.target_citation);
            CHECK(plan.yes_name != plan.no_name);
            CHECK(plan.yes_name != item.fact.person_name);
            CHECK(plan.no_name != item.fact.person_name);
            const std::set<std::string> terms{plan.yes_term, plan.no_term, item.fact.fact_term};
            CHECK(terms.size() == 3);
            yes_first += plan.yes_first ? 1 : 0;
        }
    }
    // Yes-example first with probability one half.
    CHECK(std::abs(yes_first / 1000.0 - 0.5) < 0.1);
}

TEST_CASE("two-shot prompts contain one worked example of each polarity") {
    StatuteSpec spec;
    spec.width = 3;
    spec.depth = 2;
    spec.seed = 808;
    Rng rng(spec.seed);
    const auto items = sample_batch(spec, 10, rng);
    for (const auto& item : items) {
        Rng plan_rng(item.item_seed);
        const auto bundle = build_two_shot(item, plan_rng);
        const std::string& p = bundle.stage1_prompt;
        const std::size_t question_pos = p.rfind("\n\n");
        const std::string before_test = p.substr(0, question_pos);
        int pos = 0, neg = 0;
        for (std::size_t at = before_test.find(" does apply"); at != std::string::npos;
             at = before_test.find(" does apply", at + 1)) {
            ++pos;
        }
        for (std::size_t at = before_test.find(" does NOT apply"); at != std::string::npos;
             at = before_test.find(" does NOT apply", at + 1)) {
            ++neg;
        }
        CHECK(pos == 1);
        CHECK(neg == 1);
    }
}

TEST_CASE("two-shot rejects sentence renderings and id terms") {
    auto item = bowlery_item();
    item.rendering = RenderingKind::kSentence;
    Rng rng(1);
    CHECK_THROWS_AS(build_two_shot(item, rng), ConfigError);

    StatuteSpec spec;
    spec.width = 2;
    spec.depth = 2;
    spec.term_mode = TermMode::kIds;
    spec.seed = 3;
    Rng batch_rng(spec.seed);
    const auto ids_items = sample_batch(spec, 2, batch_rng);
    Rng rng2(2);
    CHECK_THROWS_AS(build_two_shot(ids_items[0], rng2), ConfigError);
}

TEST_CASE("extraction prompts append response and suffix") {
    CHECK(build_extraction("PROMPT", " RESPONSE", Expects::kYesNo) ==
          "PROMPT RESPONSE\nTherefore, the answer (Yes or No) is");
    CHECK(build_extraction("PROMPT", "", Expects::kEntailContra) ==
          "PROMPT\nTherefore, the answer (Entailment or Contradiction) is");
}

TEST_CASE("parse_answer handles canonical completions") {
    CHECK(parse_answer(" Yes.", Expects::kYesNo).verdict == Verdict::kYes);
    CHECK(parse_answer(" No.", Expects::kYesNo).verdict == Verdict::kNo);
    CHECK(parse_answer("yes", Expects::kYesNo).verdict == Verdict::kYes);
    CHECK(parse_answer("Section 1001(c)(2) says that redeba means any ersubs or any "
                       "pushotyptopses. Nicholas is a pushotyptopses, so section 1001(c)(2) does "
                       "apply to Nicholas.",
                       Expects::kYesNo)
              .verdict == Verdict::kYes);
    CHECK(parse_answer("Hannah is none of these, so section 1001(c)(3) does NOT apply to Hannah.",
                       Expects::kYesNo)
              .verdict == Verdict::kNo);
    CHECK(parse_answer("It depends on the facts.", Expects::kYesNo).verdict ==
          Verdict::kIndeterminate);
    CHECK(parse_answer(" Entailment", Expects::kEntailContra).verdict == Verdict::kEntailment);
    CHECK(parse_answer("The answer is Contradiction.", Expects::kEntailContra).verdict ==
          Verdict::kContradiction);
}

TEST_CASE("parse_answer respects token boundaries and ambiguity") {
    // "None" must not read as "No", "yesterday" must not read as "Yes".
    CHECK(parse_answer("None of these are relevant.", Expects::kYesNo).verdict ==
          Verdict::kIndeterminate);
    CHECK(parse_answer("Yesterday it rained.", Expects::kYesNo).verdict == Verdict::kIndeterminate);
    CHECK(parse_answer("Yes and no.", Expects::kYesNo).verdict == Verdict::kIndeterminate);
    CHECK(parse_answer("it does apply but also does not apply", Expects::kYesNo).verdict ==
          Verdict::kIndeterminate);
    CHECK(parse_answer("Entailment or Contradiction?", Expects::kEntailContra).verdict ==
          Verdict::kIndeterminate);
    // Phrase patterns win over stray tokens.
    CHECK(parse_answer("No doubt: section 1001(b) does apply to Ryan.", Expects::kYesNo).verdict ==
          Verdict::kYes);
}

TEST_CASE("parse_answer is total over arbitrary bytes") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        std::string garbage;
        const std::size_t len = rng.below(64);
        for (std::size_t i = 0; i < len; ++i) {
            garbage.push_back(static_cast<char>(rng.below(256)));
        }
        CHECK_NOTHROW(parse_answer(garbage, Expects::kYesNo));
        CHECK_NOTHROW(parse_answer(garbage, Expects::kEntailContra));
    }
}

TEST_CASE("expected verdicts of a balanced batch are half Yes half No") {
    StatuteSpec spec;
    spec.width = 2;
    spec.depth = 2;
    spec.seed = 61;
    Rng rng(spec.seed);
    const auto items = sample_batch(spec, 30, rng);
    int yes = 0;
    for (const auto& item : items) yes += expected_verdict(item) == Verdict::kYes ? 1 : 0;
    CHECK(yes == 15);
}
