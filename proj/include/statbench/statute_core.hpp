#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "statbench/util.hpp"

namespace statbench {

enum class TermMode { kNonce, kIds };

std::string to_string(TermMode mode);
TermMode term_mode_from_string(std::string_view s);

/// Shape of a synthetic statute: every defined term expands into `width`
/// terms, and definitions nest `depth` levels below the root term.
struct StatuteSpec {
    int width = 2;                          // 2..4
    int depth = 2;                          // 2..5
    TermMode term_mode = TermMode::kNonce;
    std::uint64_t seed = 0;

    bool operator==(const StatuteSpec&) const = default;
};

void validate_spec(const StatuteSpec& spec);  // throws ConfigError

/// Closed forms for a perfectly balanced tree.
long long node_count(int width, int depth);
long long definition_count(int width, int depth);

struct DefNode {
    std::string term;
    std::vector<DefNode> children;  // empty iff leaf

    bool is_leaf() const { return children.empty(); }
};

/// Immutable balanced definition tree plus a term index.
class DefTree {
public:
    DefTree() = default;
    DefTree(StatuteSpec spec, DefNode root);
    DefTree(const DefTree& other);
    DefTree& operator=(const DefTree& other);
    DefTree(DefTree&& other) noexcept;
    DefTree& operator=(DefTree&& other) noexcept;

    const StatuteSpec& spec() const { return spec_; }
    const DefNode& root() const { return root_; }

    bool contains(const std::string& term) const;
    const DefNode* find(const std::string& term) const;
    /// Node whose definition lists `term` on its right-hand side; nullptr
    /// for the root term.
    const DefNode* parent_of(const std::string& term) const;
    /// Distance from the root; root() has depth 0.
    int term_depth(const std::string& term) const;
    /// All terms in pre-order.
    std::vector<std::string> all_terms() const;

private:
    void rebuild_index();

    StatuteSpec spec_;
    DefNode root_;
    struct Entry {
        const DefNode* node = nullptr;
        const DefNode* parent = nullptr;
        int depth = 0;
    };
    std::map<std::string, Entry> index_;
};

// --- Citations -------------------------------------------------------------

enum class LevelKind { kSubsection, kParagraph, kSubparagraph, kClause, kSubclause };

constexpr int kLevelCount = 5;
LevelKind level_at(int index);               // 0 -> subsection ... 4 -> subclause
std::string level_label(LevelKind kind, int index1);  // 1-based position -> "a"/"1"/"A"/"i"/"I"

struct CitationPart {
    LevelKind level;
    std::string label;

    bool operator==(const CitationPart&) const = default;
    auto operator<=>(const CitationPart&) const = default;
};

/// Path into section 1001, e.g. {(subsection,"b"),(paragraph,"2")}.
struct Citation {
    int section_number = 1001;
    std::vector<CitationPart> path;

    bool operator==(const Citation&) const = default;
    auto operator<=>(const Citation&) const = default;
};

std::string format_citation(const Citation& c);
/// Inverse of format_citation; accepts a case-insensitive "section" keyword.
/// Throws ParseError on malformed input.
Citation parse_citation(std::string_view s);
/// True when `inner` is `outer` or nested anywhere inside it.
bool citation_contains(const Citation& outer, const Citation& inner);

// --- Definitions and renderings ---------------------------------------------

struct Definition {
    std::string definiendum;
    std::vector<std::string> rhs_terms;
    Citation citation;        // atomic provision housing the definition
    int sentence_index = 0;   // 1-based, pre-order

    bool operator==(const Definition&) const = default;
};

/// All definitions in pre-order with their citations and sentence indices.
std::vector<Definition> layout_definitions(const DefTree& tree);

struct RenderedStatute {
    std::string text;
    std::vector<Definition> definitions;
};

struct RenderedSentences {
    std::string text;
    std::vector<Definition> definitions;
};

RenderedStatute render_statute(const DefTree& tree);
RenderedSentences render_sentences(const DefTree& tree);

/// "any a or any b" for width 2; "any a, any b, or any c" beyond.
std::string conjoin_any(const std::vector<std::string>& terms);

/// "a" or "an" for the given term. Id-shaped terms (letter + doubled digit)
/// use the sound of the letter's name; nonces use their first letter.
std::string indefinite_article(const std::string& term);

std::string capitalize(std::string_view term);

// --- Term generation ---------------------------------------------------------

/// English words the nonce generator must avoid.
class WordList {
public:
    static const WordList& bundled();  // loaded once from the data directory
    explicit WordList(std::set<std::string> words) : words_(std::move(words)) {}
    static WordList load(const std::filesystem::path& file);
    bool contains(const std::string& w) const { return words_.count(w) > 0; }
    std::size_t size() const { return words_.size(); }

private:
    std::set<std::string> words_;
};

std::vector<std::string> generate_terms(TermMode mode, int count, Rng& rng, const WordList& words);
std::vector<std::string> generate_terms(TermMode mode, int count, Rng& rng);

DefTree generate_tree(const StatuteSpec& spec, Rng& rng, const WordList& words);
DefTree generate_tree(const StatuteSpec& spec, Rng& rng);

/// Builds a tree from terms listed level by level (root first). Used to
/// reconstruct known trees exactly.
DefTree tree_from_terms(const StatuteSpec& spec, const std::vector<std::string>& level_order_terms);

// --- Tree serialization ------------------------------------------------------

nlohmann::json tree_to_json(const DefTree& tree);
DefTree tree_from_json(const nlohmann::json& j);

// --- Re-parsing of rendered text ----------------------------------------------
// Reads the definitions back out of rendered text. This is the text-only
// route used by the brute-force oracle and the mock backends; it never
// touches DefTree.

struct ParsedDefinition {
    std::string definiendum;
    std::vector<std::string> rhs_terms;
    Citation citation;        // empty path in sentence mode
    int sentence_index = 0;
};

struct ParsedRendering {
    bool statute_mode = true;
    std::vector<ParsedDefinition> definitions;
};

ParsedRendering parse_rendered_statute(std::string_view text);
ParsedRendering parse_rendered_sentences(std::string_view text);

}  // namespace statbench
