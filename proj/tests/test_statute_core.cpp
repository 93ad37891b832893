#include <doctest.h>

#include <regex>
#include <set>

#include <nlohmann/json.hpp>

#include "test_helpers.hpp"

using namespace statbench;
using test_helpers::cite;
using test_helpers::read_golden;

TEST_CASE("structural count formulas") {
    CHECK(node_count(2, 2) == 7);
    CHECK(node_count(3, 3) == 40);
    CHECK(definition_count(2, 2) == 3);
    CHECK(definition_count(3, 3) == 13);
    CHECK(definition_count(2, 3) == 7);
}

TEST_CASE("spec validation rejects out-of-range shapes") {
    StatuteSpec spec;
    spec.width = 1;
    CHECK_THROWS_AS(validate_spec(spec), ConfigError);
    spec.width = 5;
    CHECK_THROWS_AS(validate_spec(spec), ConfigError);
    spec.width = 2;
    spec.depth = 1;
    CHECK_THROWS_AS(validate_spec(spec), ConfigError);
    spec.depth = 6;
    CHECK_THROWS_AS(validate_spec(spec), ConfigError);
}

TEST_CASE("id terms match the letter-plus-doubled-digit pattern") {
    Rng rng(42);
    const auto terms = generate_terms(TermMode::kIds, 4, rng);
    REQUIRE(terms.size() == 4);
    const std::regex id_re("[a-z]([0-9])\\1");
    for (const auto& t : terms) CHECK(std::regex_match(t, id_re));
    const std::set<std::string> unique(terms.begin(), terms.end());
    CHECK(unique.size() == 4);
}

TEST_CASE("zero terms is an empty list") {
    Rng rng(1);
    CHECK(generate_terms(TermMode::kNonce, 0, rng).empty());
}

TEST_CASE("id term space exhausts above 260") {
    Rng rng(1);
    CHECK_THROWS_AS(generate_terms(TermMode::kIds, 261, rng), ConfigError);
    CHECK_NOTHROW(generate_terms(TermMode::kIds, 260, rng));
}

TEST_CASE("nonces are lowercase, sized 5-16, distinct, and not English words") {
    Rng rng(2024);
    const auto terms = generate_terms(TermMode::kNonce, 100, rng);
    REQUIRE(terms.size() == 100);
    const auto& words = WordList::bundled();
    std::set<std::string> unique;
    for (const auto& t : terms) {
        CHECK(t.size() >= 5);
        CHECK(t.size() <= 16);
        for (char c : t) CHECK((c >= 'a' && c <= 'z'));
        CHECK_FALSE(words.contains(t));
        unique.insert(t);
    }
    CHECK(unique.size() == 100);
}

TEST_CASE("generated trees are balanced with distinct terms") {
    for (int width = 2; width <= 4; ++width) {
        for (int depth = 2; depth <= 3; ++depth) {
            StatuteSpec spec;
            spec.width = width;
            spec.depth = depth;
            spec.seed = 99;
            Rng rng(spec.seed);
            const DefTree tree = generate_tree(spec, rng);
            const auto terms = tree.all_terms();
            CHECK(static_cast<long long>(terms.size()) == node_count(width, depth));
            CHECK(std::set<std::string>(terms.begin(), terms.end()).size() == terms.size());
            // Every leaf at the same depth, every non-leaf with `width` children.
            for (const auto& term : terms) {
                const DefNode* node = tree.find(term);
                REQUIRE(node != nullptr);
                if (node->is_leaf()) {
                    CHECK(tree.term_depth(term) == depth);
                } else {
                    CHECK(static_cast<int>(node->children.size()) == width);
                }
            }
        }
    }
}

TEST_CASE("identical spec and seed give identical trees and renderings") {
    StatuteSpec spec;
    spec.width = 3;
    spec.depth = 3;
    spec.seed = 123456;
    Rng rng_a(spec.seed);
    Rng rng_b(spec.seed);
    const DefTree a = generate_tree(spec, rng_a);
    const DefTree b = generate_tree(spec, rng_b);
    CHECK(a.all_terms() == b.all_terms());
    CHECK(render_statute(a).text == render_statute(b).text);
    CHECK(render_sentences(a).text == render_sentences(b).text);
    CHECK(tree_to_json(a) == tree_to_json(b));
}

TEST_CASE("renders the rolang statute byte-exactly") {
    CHECK(render_statute(test_helpers::rolang_tree()).text == read_golden("rolang_statute.txt"));
}

TEST_CASE("renders the bowlery statute byte-exactly") {
    CHECK(render_statute(test_helpers::bowlery_tree()).text == read_golden("bowlery_statute.txt"));
}

TEST_CASE("renders the infarber sentences byte-exactly") {
    CHECK(render_sentences(test_helpers::infarber_tree()).text ==
          read_golden("infarber_sentences.txt"));
}

TEST_CASE("renders a width-3 statute against the hand-written golden") {
    CHECK(render_statute(test_helpers::morlith_tree()).text == read_golden("morlith_statute.txt"));
}

TEST_CASE("sentence count equals definition count and order is pre-order") {
    const DefTree tree = test_helpers::bowlery_tree();
    const auto sentences = render_sentences(tree);
    CHECK(sentences.definitions.size() == 7);
    CHECK(sentences.definitions[1].definiendum == "waitormenteed");
    for (std::size_t i = 0; i < sentences.definitions.size(); ++i) {
        CHECK(sentences.definitions[i].sentence_index == static_cast<int>(i) + 1);
    }
}

TEST_CASE("definition citations follow the numbering scheme") {
    const auto defs = layout_definitions(test_helpers::bowlery_tree());
    REQUIRE(defs.size() == 7);
    CHECK(format_citation(defs[0].citation) == "section 1001(a)");
    CHECK(defs[0].definiendum == "bowlery");
    CHECK(format_citation(defs[1].citation) == "section 1001(b)(1)");
    CHECK(defs[1].definiendum == "waitormenteed");
    CHECK(format_citation(defs[2].citation) == "section 1001(b)(2)");
    CHECK(defs[2].definiendum == "redeba");
    CHECK(format_citation(defs[5].citation) == "section 1001(c)(2)");
    CHECK(defs[5].definiendum == "bruselers");
    CHECK(format_citation(defs[6].citation) == "section 1001(c)(3)");
    CHECK(defs[6].definiendum == "fashiple");
}

TEST_CASE("depth-4 and depth-5 layouts recurse through clause and subclause") {
    StatuteSpec spec;
    spec.width = 2;
    spec.depth = 5;
    spec.seed = 5;
    Rng rng(spec.seed);
    const DefTree tree = generate_tree(spec, rng);
    const auto rendered = render_statute(tree);
    CHECK(rendered.definitions.size() == static_cast<std::size_t>(definition_count(2, 5)));
    // Deepest definitions live in clause-level provisions with subclause items.
    bool saw_clause_def = false;
    for (const auto& def : rendered.definitions) {
        if (def.citation.path.size() == 4) {
            saw_clause_def = true;
            CHECK(def.citation.path.back().level == LevelKind::kClause);
        }
    }
    CHECK(saw_clause_def);
    CHECK(rendered.text.find("(i) General rule") != std::string::npos);
    CHECK(rendered.text.find("(I) any ") != std::string::npos);
    // The rendering still re-parses to the same definitions.
    const auto reparsed = parse_rendered_statute(rendered.text);
    CHECK(reparsed.definitions.size() == rendered.definitions.size());
}

TEST_CASE("format_citation") {
    CHECK(format_citation(Citation{}) == "section 1001");
    CHECK(format_citation(cite("section 1001(b)")) == "section 1001(b)");
    CHECK(format_citation(cite("section 1001(c)(2)")) == "section 1001(c)(2)");
}

TEST_CASE("parse_citation") {
    const Citation c = parse_citation("section 1001(c)(3)");
    REQUIRE(c.path.size() == 2);
    CHECK(c.path[0].level == LevelKind::kSubsection);
    CHECK(c.path[0].label == "c");
    CHECK(c.path[1].level == LevelKind::kParagraph);
    CHECK(c.path[1].label == "3");

    const Citation deep = parse_citation("section 1001(b)(2)(A)");
    REQUIRE(deep.path.size() == 3);
    CHECK(deep.path[2].level == LevelKind::kSubparagraph);
    CHECK(deep.path[2].label == "A");

    const Citation full = parse_citation("section 1001(a)(1)(A)(i)(I)");
    REQUIRE(full.path.size() == 5);
    CHECK(full.path[3].level == LevelKind::kClause);
    CHECK(full.path[4].level == LevelKind::kSubclause);
    CHECK(format_citation(full) == "section 1001(a)(1)(A)(i)(I)");

    CHECK(parse_citation("SECTION 1001(b)") == parse_citation("section 1001(b)"));
    CHECK_THROWS_AS(parse_citation("section 1001(a)(1)(A)(i)(I)(1)"), ParseError);  // too deep
    CHECK_THROWS_AS(parse_citation("article 1001(b)"), ParseError);
    CHECK_THROWS_AS(parse_citation("section"), ParseError);
    CHECK_THROWS_AS(parse_citation("section 1001(b"), ParseError);
    CHECK_THROWS_AS(parse_citation("section 1001(b)(x)"), ParseError);  // paragraph must be digits
    CHECK_THROWS_AS(parse_citation("section 1001(b)(2)(a)"), ParseError);
}

TEST_CASE("citation round-trip over every provision of random trees") {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        StatuteSpec spec;
        spec.width = 2 + static_cast<int>(rng.below(3));
        spec.depth = 2 + static_cast<int>(rng.below(3));
        spec.seed = rng.next();
        Rng tree_rng(spec.seed);
        const DefTree tree = generate_tree(spec, tree_rng);
        std::set<std::string> seen;
        const auto defs = layout_definitions(tree);
        for (const auto& def : defs) {
            const std::string formatted = format_citation(def.citation);
            CHECK(parse_citation(formatted) == def.citation);
            seen.insert(formatted);
        }
        // Distinct definitional provisions have distinct citations.
        CHECK(seen.size() == defs.size());
    }
}

TEST_CASE("indefinite articles") {
    CHECK(indefinite_article("artion") == "an");
    CHECK(indefinite_article("portle") == "a");
    CHECK(indefinite_article("f77") == "an");
    CHECK(indefinite_article("s88") == "an");
    CHECK(indefinite_article("m55") == "an");
    CHECK(indefinite_article("b33") == "a");
    CHECK(indefinite_article("u22") == "a");  // "yoo" starts with a consonant sound
    CHECK(indefinite_article("goghts") == "a");
}

TEST_CASE("statute re-parsing recovers the definitions exactly") {
    for (int width = 2; width <= 4; ++width) {
        for (int depth = 2; depth <= 3; ++depth) {
            StatuteSpec spec;
            spec.width = width;
            spec.depth = depth;
            spec.seed = static_cast<std::uint64_t>(width * 100 + depth);
            Rng rng(spec.seed);
            const DefTree tree = generate_tree(spec, rng);

            const auto rendered = render_statute(tree);
            const auto parsed = parse_rendered_statute(rendered.text);
            REQUIRE(parsed.definitions.size() == rendered.definitions.size());
            for (std::size_t i = 0; i < parsed.definitions.size(); ++i) {
                CHECK(parsed.definitions[i].definiendum == rendered.definitions[i].definiendum);
                CHECK(parsed.definitions[i].rhs_terms == rendered.definitions[i].rhs_terms);
                CHECK(parsed.definitions[i].citation == rendered.definitions[i].citation);
                CHECK(parsed.definitions[i].sentence_index == rendered.definitions[i].sentence_index);
            }

            const auto sentences = render_sentences(tree);
            const auto parsed_sentences = parse_rendered_sentences(sentences.text);
            REQUIRE(parsed_sentences.definitions.size() == sentences.definitions.size());
            for (std::size_t i = 0; i < parsed_sentences.definitions.size(); ++i) {
                CHECK(parsed_sentences.definitions[i].definiendum ==
                      sentences.definitions[i].definiendum);
                CHECK(parsed_sentences.definitions[i].rhs_terms == sentences.definitions[i].rhs_terms);
            }
        }
    }
}

TEST_CASE("statute parser rejects malformed text") {
    CHECK_THROWS_AS(parse_rendered_statute(""), ParseError);
    CHECK_THROWS_AS(parse_rendered_statute("not a statute"), ParseError);
    CHECK_THROWS_AS(parse_rendered_statute("Section 1001.  Definition of X.\n(a) General rule"),
                    ParseError);
    CHECK_THROWS_AS(parse_rendered_sentences("Sentence 2: The term \"x\" means any a or any b."),
                    ParseError);  // numbering must start at 1
}

TEST_CASE("the statute parser never crashes on mutated input") {
    StatuteSpec spec;
    spec.width = 2;
    spec.depth = 3;
    spec.seed = 1313;
    Rng rng(spec.seed);
    const std::string pristine = render_statute(generate_tree(spec, rng)).text;
    Rng fuzz(4242);
    for (int trial = 0; trial < 300; ++trial) {
        std::string text = pristine;
        const int edits = 1 + static_cast<int>(fuzz.below(4));
        for (int e = 0; e < edits; ++e) {
            const std::size_t at = fuzz.below(text.size());
            switch (fuzz.below(3)) {
                case 0: text[at] = static_cast<char>(fuzz.below(128)); break;
                case 1: text.erase(at, 1 + fuzz.below(5)); break;
                default: text.insert(at, 1, static_cast<char>(32 + fuzz.below(95))); break;
            }
        }
        try {
            parse_rendered_statute(text);
        } catch (const DataError&) {
            // Malformed text must be rejected, never crash.
        }
        try {
            parse_rendered_sentences(text);
        } catch (const DataError&) {
        }
    }
    CHECK(true);
}

TEST_CASE("tree JSON round-trips") {
    const DefTree tree = test_helpers::bowlery_tree();
    const DefTree back = tree_from_json(tree_to_json(tree));
    CHECK(back.all_terms() == tree.all_terms());
    CHECK(back.spec() == tree.spec());
    CHECK(render_statute(back).text == render_statute(tree).text);
}

TEST_CASE("conjunction style by width") {
    CHECK(conjoin_any({"a", "b"}) == "any a or any b");
    CHECK(conjoin_any({"a", "b", "c"}) == "any a, any b, or any c");
    CHECK(conjoin_any({"a", "b", "c", "d"}) == "any a, any b, any c, or any d");
}
