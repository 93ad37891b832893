#include "statbench/statute_core.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <sstream>

#include <nlohmann/json.hpp>

namespace statbench {

using nlohmann::json;

std::string to_string(TermMode mode) { return mode == TermMode::kNonce ? "nonce" : "ids"; }

TermMode term_mode_from_string(std::string_view s) {
    if (s == "nonce") return TermMode::kNonce;
    if (s == "ids") return TermMode::kIds;
    throw ConfigError("unknown term mode: " + std::string(s));
}

void validate_spec(const StatuteSpec& spec) {
    if (spec.width < 2 || spec.width > 4) {
        throw ConfigError("width must be in [2,4], got " + std::to_string(spec.width));
    }
    if (spec.depth < 2 || spec.depth > 5) {
        throw ConfigError("depth must be in [2,5], got " + std::to_string(spec.depth));
    }
}

long long node_count(int width, int depth) {
    long long total = 0, level = 1;
    for (int d = 0; d <= depth; ++d) {
        total += level;
        level *= width;
    }
    return total;
}

long long definition_count(int width, int depth) {
    // Non-leaf nodes only.
    return node_count(width, depth - 1);
}

// --- DefTree -----------------------------------------------------------------

DefTree::DefTree(StatuteSpec spec, DefNode root) : spec_(spec), root_(std::move(root)) {
    rebuild_index();
}

DefTree::DefTree(const DefTree& other) : spec_(other.spec_), root_(other.root_) { rebuild_index(); }

DefTree& DefTree::operator=(const DefTree& other) {
    if (this != &other) {
        spec_ = other.spec_;
        root_ = other.root_;
        rebuild_index();
    }
    return *this;
}

DefTree::DefTree(DefTree&& other) noexcept : spec_(other.spec_), root_(std::move(other.root_)) {
    rebuild_index();
}

DefTree& DefTree::operator=(DefTree&& other) noexcept {
    if (this != &other) {
        spec_ = other.spec_;
        root_ = std::move(other.root_);
        rebuild_index();
    }
    return *this;
}

void DefTree::rebuild_index() {
    index_.clear();
    struct Frame {
        const DefNode* node;
        const DefNode* parent;
        int depth;
    };
    std::vector<Frame> stack{{&root_, nullptr, 0}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (index_.count(f.node->term)) {
            throw DataError("duplicate term in tree: " + f.node->term);
        }
        index_[f.node->term] = Entry{f.node, f.parent, f.depth};
        for (auto it = f.node->children.rbegin(); it != f.node->children.rend(); ++it) {
            stack.push_back({&*it, f.node, f.depth + 1});
        }
    }
}

bool DefTree::contains(const std::string& term) const { return index_.count(term) > 0; }

const DefNode* DefTree::find(const std::string& term) const {
    auto it = index_.find(term);
    return it == index_.end() ? nullptr : it->second.node;
}

const DefNode* DefTree::parent_of(const std::string& term) const {
    auto it = index_.find(term);
    if (it == index_.end()) throw DataError("unknown term: " + term);
    return it->second.parent;
}

int DefTree::term_depth(const std::string& term) const {
    auto it = index_.find(term);
    if (it == index_.end()) throw DataError("unknown term: " + term);
    return it->second.depth;
}

std::vector<std::string> DefTree::all_terms() const {
    std::vector<std::string> out;
    struct Walker {
        std::vector<std::string>& out;
        void walk(const DefNode& n) {
            out.push_back(n.term);
            for (const auto& c : n.children) walk(c);
        }
    } walker{out};
    walker.walk(root_);
    return out;
}

// --- Citations ---------------------------------------------------------------

LevelKind level_at(int index) {
    switch (index) {
        case 0: return LevelKind::kSubsection;
        case 1: return LevelKind::kParagraph;
        case 2: return LevelKind::kSubparagraph;
        case 3: return LevelKind::kClause;
        case 4: return LevelKind::kSubclause;
        default: throw std::logic_error("provision nesting deeper than subclause");
    }
}

namespace {

std::string to_roman_lower(int n) {
    static const std::pair<int, const char*> table[] = {
        {1000, "m"}, {900, "cm"}, {500, "d"}, {400, "cd"}, {100, "c"}, {90, "xc"}, {50, "l"},
        {40, "xl"},  {10, "x"},   {9, "ix"},  {5, "v"},    {4, "iv"},  {1, "i"}};
    std::string out;
    for (const auto& [value, digits] : table) {
        while (n >= value) {
            out += digits;
            n -= value;
        }
    }
    return out;
}

int from_roman_lower(const std::string& s) {
    static const std::map<char, int> values = {{'i', 1},   {'v', 5},   {'x', 10},  {'l', 50},
                                               {'c', 100}, {'d', 500}, {'m', 1000}};
    int total = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto it = values.find(s[i]);
        if (it == values.end()) throw ParseError("bad roman numeral: " + s);
        const int v = it->second;
        if (i + 1 < s.size()) {
            auto jt = values.find(s[i + 1]);
            if (jt != values.end() && jt->second > v) {
                total -= v;
                continue;
            }
        }
        total += v;
    }
    if (total <= 0 || to_roman_lower(total) != s) throw ParseError("bad roman numeral: " + s);
    return total;
}

std::string letters_label(int index1, char base) {
    // a..z, then aa, ab, ... (bijective base 26)
    std::string out;
    while (index1 > 0) {
        const int rem = (index1 - 1) % 26;
        out.insert(out.begin(), static_cast<char>(base + rem));
        index1 = (index1 - 1) / 26;
    }
    return out;
}

bool all_lower_alpha(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return c >= 'a' && c <= 'z'; });
}

bool all_upper_alpha(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return c >= 'A' && c <= 'Z'; });
}

void validate_part(const CitationPart& part) {
    switch (part.level) {
        case LevelKind::kSubsection:
            if (!all_lower_alpha(part.label)) throw ParseError("bad subsection label: " + part.label);
            break;
        case LevelKind::kParagraph:
            if (!is_ascii_digits(part.label)) throw ParseError("bad paragraph label: " + part.label);
            break;
        case LevelKind::kSubparagraph:
            if (!all_upper_alpha(part.label)) throw ParseError("bad subparagraph label: " + part.label);
            break;
        case LevelKind::kClause:
            if (!all_lower_alpha(part.label)) throw ParseError("bad clause label: " + part.label);
            from_roman_lower(part.label);
            break;
        case LevelKind::kSubclause: {
            if (!all_upper_alpha(part.label)) throw ParseError("bad subclause label: " + part.label);
            from_roman_lower(to_lower(part.label));
            break;
        }
    }
}

}  // namespace

std::string level_label(LevelKind kind, int index1) {
    if (index1 < 1) throw std::logic_error("label index must be >= 1");
    switch (kind) {
        case LevelKind::kSubsection: return letters_label(index1, 'a');
        case LevelKind::kParagraph: return std::to_string(index1);
        case LevelKind::kSubparagraph: return letters_label(index1, 'A');
        case LevelKind::kClause: return to_roman_lower(index1);
        case LevelKind::kSubclause: {
            std::string s = to_roman_lower(index1);
            for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            return s;
        }
    }
    throw std::logic_error("unreachable");
}

std::string format_citation(const Citation& c) {
    std::string out = "section " + std::to_string(c.section_number);
    for (const auto& part : c.path) out += "(" + part.label + ")";
    return out;
}

Citation parse_citation(std::string_view s) {
    const std::string text = trim(s);
    const std::string lower = to_lower(text);
    if (lower.rfind("section ", 0) != 0) throw ParseError("citation must start with 'section': " + text);
    std::size_t pos = 8;
    while (pos < text.size() && text[pos] == ' ') ++pos;
    std::size_t digits_end = pos;
    while (digits_end < text.size() && std::isdigit(static_cast<unsigned char>(text[digits_end]))) ++digits_end;
    if (digits_end == pos) throw ParseError("citation missing section number: " + text);
    Citation c;
    c.section_number = std::stoi(text.substr(pos, digits_end - pos));
    pos = digits_end;
    while (pos < text.size()) {
        if (text[pos] != '(') throw ParseError("unexpected character in citation: " + text);
        const std::size_t close = text.find(')', pos);
        if (close == std::string::npos) throw ParseError("unbalanced parenthesis in citation: " + text);
        const std::string label = text.substr(pos + 1, close - pos - 1);
        if (label.empty()) throw ParseError("empty label in citation: " + text);
        const int level_index = static_cast<int>(c.path.size());
        if (level_index >= kLevelCount) throw ParseError("citation nests too deep: " + text);
        CitationPart part{level_at(level_index), label};
        validate_part(part);
        c.path.push_back(std::move(part));
        pos = close + 1;
    }
    return c;
}

bool citation_contains(const Citation& outer, const Citation& inner) {
    if (outer.section_number != inner.section_number) return false;
    if (outer.path.size() > inner.path.size()) return false;
    return std::equal(outer.path.begin(), outer.path.end(), inner.path.begin());
}

// --- Layout and rendering -----------------------------------------------------

std::string capitalize(std::string_view term) {
    std::string out(term);
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

std::string conjoin_any(const std::vector<std::string>& terms) {
    std::string out;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i > 0) out += terms.size() > 2 ? ", " : " ";
        if (i + 1 == terms.size()) out += "or ";
        out += "any " + terms[i];
    }
    return out;
}

std::string indefinite_article(const std::string& term) {
    if (term.empty()) throw DataError("indefinite_article on empty term");
    const char first = static_cast<char>(std::tolower(static_cast<unsigned char>(term[0])));
    const bool id_shaped = term.size() == 3 && std::isalpha(static_cast<unsigned char>(term[0])) &&
                           std::isdigit(static_cast<unsigned char>(term[1])) && term[1] == term[2];
    if (id_shaped) {
        // Letters whose spoken names start with a vowel sound.
        static const std::string vowel_names = "aefhilmnorsx";
        return vowel_names.find(first) != std::string::npos ? "an" : "a";
    }
    static const std::string vowels = "aeiou";
    return vowels.find(first) != std::string::npos ? "an" : "a";
}

namespace {

struct LayoutBuilder {
    const StatuteSpec& spec;
    std::vector<std::string> lines{};
    std::vector<Definition> definitions{};
    bool emit_lines = true;

    static std::string indent_for(std::size_t path_len) {
        // Subsection lines flush left, then 4 spaces per deeper level.
        return std::string(path_len >= 1 ? 4 * (path_len - 1) : 0, ' ');
    }

    void provision_line(const std::vector<CitationPart>& path, const std::string& text) {
        if (emit_lines) {
            lines.push_back(indent_for(path.size()) + "(" + path.back().label + ") " + text);
        }
    }

    void body_line(const std::vector<CitationPart>& path, const std::string& text) {
        if (emit_lines) lines.push_back(indent_for(path.size()) + text);
    }

    void emit_definition(const DefNode& node, const std::vector<CitationPart>& housing) {
        body_line(housing, "The term \"" + node.term + "\" means-");
        const LevelKind item_level = level_at(static_cast<int>(housing.size()));
        const std::size_t n = node.children.size();
        Definition def;
        def.definiendum = node.term;
        def.citation.path = housing;
        def.sentence_index = static_cast<int>(definitions.size()) + 1;
        for (std::size_t k = 0; k < n; ++k) {
            def.rhs_terms.push_back(node.children[k].term);
            if (emit_lines) {
                std::string text = "any " + node.children[k].term;
                if (k + 2 == n) {
                    text += ", or";
                } else if (k + 1 == n) {
                    text += ".";
                } else {
                    text += ",";
                }
                auto item_path = housing;
                item_path.push_back({item_level, level_label(item_level, static_cast<int>(k) + 1)});
                provision_line(item_path, text);
            }
        }
        definitions.push_back(std::move(def));
    }

    // `node` is a non-leaf term whose container provision is `container`
    // ([] for the root term, whose container is the section itself).
    // `height` counts definitional levels in the subtree (1 = children are leaves).
    void emit_subtree(const DefNode& node, const std::vector<CitationPart>& container, int height) {
        if (height == 1) {
            emit_definition(node, container);
            return;
        }
        const LevelKind sub_level = level_at(static_cast<int>(container.size()));
        auto rule_path = container;
        rule_path.push_back({sub_level, level_label(sub_level, 1)});
        provision_line(rule_path, "General rule");
        emit_definition(node, rule_path);
        for (std::size_t j = 0; j < node.children.size(); ++j) {
            const DefNode& child = node.children[j];
            auto child_path = container;
            child_path.push_back({sub_level, level_label(sub_level, static_cast<int>(j) + 2)});
            provision_line(child_path, capitalize(child.term));
            emit_subtree(child, child_path, height - 1);
        }
    }

    void run(const DefTree& tree) {
        if (emit_lines) {
            lines.push_back("Section 1001.  Definition of " + capitalize(tree.root().term) + ".");
        }
        emit_subtree(tree.root(), {}, tree.spec().depth);
    }
};

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i > 0) out += '\n';
        out += lines[i];
    }
    return out;
}

}  // namespace

std::vector<Definition> layout_definitions(const DefTree& tree) {
    LayoutBuilder builder{tree.spec()};
    builder.emit_lines = false;
    builder.run(tree);
    return std::move(builder.definitions);
}

RenderedStatute render_statute(const DefTree& tree) {
    LayoutBuilder builder{tree.spec()};
    builder.run(tree);
    return RenderedStatute{join_lines(builder.lines), std::move(builder.definitions)};
}

RenderedSentences render_sentences(const DefTree& tree) {
    auto defs = layout_definitions(tree);
    std::vector<std::string> lines;
    lines.reserve(defs.size());
    for (const auto& def : defs) {
        lines.push_back("Sentence " + std::to_string(def.sentence_index) + ": The term \"" +
                        def.definiendum + "\" means " + conjoin_any(def.rhs_terms) + ".");
    }
    return RenderedSentences{join_lines(lines), std::move(defs)};
}

// --- Term generation -----------------------------------------------------------

const WordList& WordList::bundled() {
    static const WordList list = WordList::load(data_dir() / "english_words.txt");
    return list;
}

WordList WordList::load(const std::filesystem::path& file) {
    std::set<std::string> words;
    for (const auto& raw : split_lines(read_text_file(file))) {
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        words.insert(to_lower(line));
    }
    return WordList(std::move(words));
}

namespace {

const std::vector<std::string>& nonce_onsets() {
    static const std::vector<std::string> v = {
        "b",  "c",  "d",  "f",  "g",  "h",  "j",  "k",  "l",  "m",  "n",  "p",  "r",
        "s",  "t",  "v",  "w",  "y",  "z",  "bl", "br", "ch", "cl", "cr", "dr", "fl",
        "fr", "gl", "gr", "pl", "pr", "qu", "sc", "sh", "sk", "sl", "sm", "sn", "sp",
        "st", "str", "sw", "th", "tr", "vr"};
    return v;
}

const std::vector<std::string>& nonce_nuclei() {
    static const std::vector<std::string> v = {"a",  "e",  "i",  "o",  "u",  "a",  "e", "i",
                                               "o",  "ai", "ea", "ee", "ie", "io", "oa", "oo",
                                               "ou", "au", "ui"};
    return v;
}

const std::vector<std::string>& nonce_codas() {
    static const std::vector<std::string> v = {"b",  "ck", "d",  "g",  "l",  "ll", "m", "n",
                                               "nd", "ng", "nt", "p",  "r",  "rb", "rn", "rs",
                                               "sh", "st", "t",  "th", "x"};
    return v;
}

std::string make_nonce(Rng& rng) {
    const int syllables = 2 + static_cast<int>(rng.below(3));
    std::string word;
    for (int s = 0; s < syllables; ++s) {
        word += nonce_onsets()[rng.below(nonce_onsets().size())];
        word += nonce_nuclei()[rng.below(nonce_nuclei().size())];
    }
    if (rng.below(100) < 60) word += nonce_codas()[rng.below(nonce_codas().size())];
    if (word.back() != 's' && rng.below(100) < 35) word += 's';
    return word;
}

}  // namespace

std::vector<std::string> generate_terms(TermMode mode, int count, Rng& rng, const WordList& words) {
    if (count < 0) throw ConfigError("term count must be >= 0");
    std::vector<std::string> out;
    std::set<std::string> seen;
    if (mode == TermMode::kIds) {
        if (count > 26 * 10) {
            throw ConfigError("id term space exhausted: need " + std::to_string(count) +
                              " of 260 possible ids");
        }
        while (static_cast<int>(out.size()) < count) {
            const char letter = static_cast<char>('a' + rng.below(26));
            const char digit = static_cast<char>('0' + rng.below(10));
            const std::string id{letter, digit, digit};
            if (seen.insert(id).second) out.push_back(id);
        }
        return out;
    }
    int attempts = 0;
    while (static_cast<int>(out.size()) < count) {
        if (++attempts > 200000) throw DataError("nonce generation failed to converge");
        std::string w = make_nonce(rng);
        if (w.size() < 5 || w.size() > 16) continue;
        if (words.contains(w)) continue;
        if (!seen.insert(w).second) continue;
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<std::string> generate_terms(TermMode mode, int count, Rng& rng) {
    return generate_terms(mode, count, rng, WordList::bundled());
}

DefTree tree_from_terms(const StatuteSpec& spec, const std::vector<std::string>& level_order_terms) {
    validate_spec(spec);
    const long long expected = node_count(spec.width, spec.depth);
    if (static_cast<long long>(level_order_terms.size()) != expected) {
        throw ConfigError("expected " + std::to_string(expected) + " terms, got " +
                          std::to_string(level_order_terms.size()));
    }
    std::size_t cursor = 0;
    std::vector<DefNode*> frontier;
    DefNode root{level_order_terms[cursor++], {}};
    frontier.push_back(&root);
    for (int d = 1; d <= spec.depth; ++d) {
        std::vector<DefNode*> next;
        for (DefNode* parent : frontier) {
            parent->children.reserve(static_cast<std::size_t>(spec.width));
            for (int w = 0; w < spec.width; ++w) {
                parent->children.push_back(DefNode{level_order_terms[cursor++], {}});
            }
        }
        for (DefNode* parent : frontier) {
            for (auto& child : parent->children) next.push_back(&child);
        }
        frontier = std::move(next);
    }
    return DefTree(spec, std::move(root));
}

DefTree generate_tree(const StatuteSpec& spec, Rng& rng, const WordList& words) {
    validate_spec(spec);
    const auto terms =
        generate_terms(spec.term_mode, static_cast<int>(node_count(spec.width, spec.depth)), rng, words);
    return tree_from_terms(spec, terms);
}

DefTree generate_tree(const StatuteSpec& spec, Rng& rng) {
    return generate_tree(spec, rng, WordList::bundled());
}

// --- Serialization ---------------------------------------------------------------

namespace {

json node_to_json(const DefNode& node) {
    json j;
    j["term"] = node.term;
    j["children"] = json::array();
    for (const auto& c : node.children) j["children"].push_back(node_to_json(c));
    return j;
}

DefNode node_from_json(const json& j) {
    DefNode node;
    node.term = j.at("term").get<std::string>();
    if (j.contains("children")) {
        for (const auto& c : j.at("children")) node.children.push_back(node_from_json(c));
    }
    return node;
}

}  // namespace

json tree_to_json(const DefTree& tree) {
    json j;
    j["width"] = tree.spec().width;
    j["depth"] = tree.spec().depth;
    j["term_mode"] = to_string(tree.spec().term_mode);
    j["seed"] = tree.spec().seed;
    j["root"] = node_to_json(tree.root());
    return j;
}

DefTree tree_from_json(const json& j) {
    StatuteSpec spec;
    spec.width = j.at("width").get<int>();
    spec.depth = j.at("depth").get<int>();
    spec.term_mode = term_mode_from_string(j.at("term_mode").get<std::string>());
    spec.seed = j.at("seed").get<std::uint64_t>();
    return DefTree(spec, node_from_json(j.at("root")));
}

// --- Re-parsing ---------------------------------------------------------------------

namespace {

std::size_t leading_spaces(std::string_view line) {
    std::size_t n = 0;
    while (n < line.size() && line[n] == ' ') ++n;
    return n;
}

bool valid_term_chars(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
               return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
           });
}

// "any soultratessly, or" -> "soultratessly"
std::string parse_item_term(std::string_view text) {
    if (text.rfind("any ", 0) != 0) throw ParseError("item line must start with 'any ': " + std::string(text));
    std::string rest(text.substr(4));
    if (rest.size() >= 4 && rest.compare(rest.size() - 4, 4, ", or") == 0) {
        rest.resize(rest.size() - 4);
    } else if (!rest.empty() && (rest.back() == ',' || rest.back() == '.')) {
        rest.pop_back();
    } else {
        throw ParseError("item line missing terminator: " + std::string(text));
    }
    if (!valid_term_chars(rest)) throw ParseError("bad term in item line: " + rest);
    return rest;
}

}  // namespace

ParsedRendering parse_rendered_statute(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty()) throw ParseError("empty statute text");
    if (lines[0].rfind("Section ", 0) != 0) throw ParseError("missing section header: " + lines[0]);

    ParsedRendering out;
    out.statute_mode = true;
    std::vector<CitationPart> path;
    bool def_open = false;
    ParsedDefinition current;

    auto close_def = [&] {
        if (!def_open) return;
        if (current.rhs_terms.empty()) {
            throw ParseError("definition of \"" + current.definiendum + "\" has no right-hand side");
        }
        current.sentence_index = static_cast<int>(out.definitions.size()) + 1;
        out.definitions.push_back(std::move(current));
        current = ParsedDefinition{};
        def_open = false;
    };

    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::string& line = lines[li];
        if (trim(line).empty()) continue;
        const std::size_t indent = leading_spaces(line);
        if (indent % 4 != 0) throw ParseError("indentation not a multiple of 4: " + line);
        const int level_index = static_cast<int>(indent / 4);
        const std::string rest = line.substr(indent);

        if (rest.size() >= 2 && rest[0] == '(') {
            const std::size_t close = rest.find(')');
            if (close == std::string::npos) throw ParseError("unclosed label: " + line);
            const std::string label = rest.substr(1, close - 1);
            if (close + 2 > rest.size() || rest[close + 1] != ' ') {
                throw ParseError("missing space after label: " + line);
            }
            const std::string body = rest.substr(close + 2);
            CitationPart part{level_at(level_index), label};
            validate_part(part);
            if (static_cast<std::size_t>(level_index) > path.size()) {
                throw ParseError("provision skips a level: " + line);
            }
            path.resize(static_cast<std::size_t>(level_index));
            path.push_back(part);

            if (body.rfind("any ", 0) == 0) {
                if (!def_open) throw ParseError("item line outside a definition: " + line);
                if (path.size() != current.citation.path.size() + 1) {
                    throw ParseError("item nested at unexpected level: " + line);
                }
                current.rhs_terms.push_back(parse_item_term(body));
            } else {
                // Heading: "General rule" or a capitalized term.
                close_def();
            }
            continue;
        }

        if (rest.rfind("The term \"", 0) == 0) {
            close_def();
            const std::size_t quote_end = rest.find('"', 10);
            if (quote_end == std::string::npos) throw ParseError("unterminated term quote: " + line);
            const std::string term = rest.substr(10, quote_end - 10);
            if (!valid_term_chars(term)) throw ParseError("bad definiendum: " + term);
            if (rest.substr(quote_end) != "\" means-") {
                throw ParseError("definition lead-in must end with 'means-': " + line);
            }
            if (path.empty()) throw ParseError("definition outside any provision: " + line);
            if (indent != 4 * (path.size() - 1)) {
                throw ParseError("definition lead-in at unexpected indent: " + line);
            }
            def_open = true;
            current.definiendum = term;
            current.citation.path = path;
            continue;
        }

        throw ParseError("unrecognized statute line: " + line);
    }
    close_def();
    if (out.definitions.empty()) throw ParseError("statute text contains no definitions");
    return out;
}

ParsedRendering parse_rendered_sentences(std::string_view text) {
    ParsedRendering out;
    out.statute_mode = false;
    int expected_index = 1;
    for (const auto& raw : split_lines(text)) {
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.rfind("Sentence ", 0) != 0) throw ParseError("bad sentence line: " + line);
        std::size_t pos = 9;
        std::size_t num_end = pos;
        while (num_end < line.size() && std::isdigit(static_cast<unsigned char>(line[num_end]))) ++num_end;
        if (num_end == pos) throw ParseError("missing sentence number: " + line);
        const int index = std::stoi(line.substr(pos, num_end - pos));
        if (index != expected_index) throw ParseError("sentence numbering gap at: " + line);
        ++expected_index;
        const std::string marker = ": The term \"";
        if (line.compare(num_end, marker.size(), marker) != 0) {
            throw ParseError("bad sentence lead-in: " + line);
        }
        std::size_t term_begin = num_end + marker.size();
        const std::size_t term_end = line.find('"', term_begin);
        if (term_end == std::string::npos) throw ParseError("unterminated term quote: " + line);
        ParsedDefinition def;
        def.definiendum = line.substr(term_begin, term_end - term_begin);
        if (!valid_term_chars(def.definiendum)) throw ParseError("bad definiendum: " + def.definiendum);
        const std::string means = "\" means ";
        if (line.compare(term_end, means.size(), means) != 0) {
            throw ParseError("sentence missing 'means': " + line);
        }
        std::string rhs = line.substr(term_end + means.size());
        if (rhs.empty() || rhs.back() != '.') throw ParseError("sentence must end with '.': " + line);
        rhs.pop_back();

        // "any a or any b" / "any a, any b, or any c"
        std::size_t p = 0;
        while (p < rhs.size()) {
            if (rhs.compare(p, 4, "any ") != 0) throw ParseError("expected 'any ' in: " + line);
            p += 4;
            std::size_t q = p;
            while (q < rhs.size() && (std::islower(static_cast<unsigned char>(rhs[q])) ||
                                      std::isdigit(static_cast<unsigned char>(rhs[q])))) {
                ++q;
            }
            if (q == p) throw ParseError("empty term in: " + line);
            def.rhs_terms.push_back(rhs.substr(p, q - p));
            p = q;
            if (p == rhs.size()) break;
            if (rhs.compare(p, 5, ", or ") == 0) {
                p += 5;
            } else if (rhs.compare(p, 2, ", ") == 0) {
                p += 2;
            } else if (rhs.compare(p, 4, " or ") == 0) {
                p += 4;
            } else {
                throw ParseError("bad conjunction in: " + line);
            }
        }
        if (def.rhs_terms.size() < 2) throw ParseError("sentence lists fewer than two terms: " + line);
        def.sentence_index = index;
        out.definitions.push_back(std::move(def));
    }
    if (out.definitions.empty()) throw ParseError("no sentences found");
    return out;
}

}  // namespace statbench
