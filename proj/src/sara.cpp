#include "statbench/sara.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <regex>
#include <set>

namespace statbench {

using nlohmann::json;

std::string to_string(SaraLabel label) {
    return label == SaraLabel::kEntailment ? "Entailment" : "Contradiction";
}

std::string to_string(SaraSplit split) { return split == SaraSplit::kTrain ? "train" : "test"; }

std::string to_string(SaraMode mode) {
    switch (mode) {
        case SaraMode::kDynamic4: return "dynamic4";
        case SaraMode::kZero: return "zero";
        case SaraMode::kCot10: return "cot10";
    }
    return "zero";
}

SaraMode sara_mode_from_string(std::string_view s) {
    if (s == "dynamic4") return SaraMode::kDynamic4;
    if (s == "zero") return SaraMode::kZero;
    if (s == "cot10") return SaraMode::kCot10;
    throw ConfigError("unknown SARA mode: " + std::string(s));
}

namespace {

std::string squeeze_spaces(const std::string& s) {
    std::string out;
    bool prev_space = false;
    for (char c : s) {
        const bool space = std::isspace(static_cast<unsigned char>(c));
        if (space && prev_space) continue;
        out.push_back(space ? ' ' : c);
        prev_space = space;
    }
    return trim(out);
}

struct RawCase {
    std::string premise;
    std::string question;  // hypothesis + final label token
};

RawCase parse_case_file(const std::filesystem::path& file) {
    enum class State { kNone, kText, kQuestion } state = State::kNone;
    std::string premise, question;
    for (const auto& raw : split_lines(read_text_file(file))) {
        const std::string line = trim(raw);
        if (line.empty() || line[0] != '%') {
            if (state == State::kQuestion && !question.empty()) break;
            continue;
        }
        const std::string comment = trim(line.substr(1));
        if (comment == "Text") {
            state = State::kText;
            continue;
        }
        if (comment == "Question") {
            state = State::kQuestion;
            continue;
        }
        if (state == State::kText) {
            premise += comment + " ";
        } else if (state == State::kQuestion) {
            question += comment + " ";
        }
    }
    RawCase out;
    out.premise = squeeze_spaces(premise);
    out.question = squeeze_spaces(question);
    if (out.premise.empty() || out.question.empty()) {
        throw DataError("malformed case file (missing Text/Question blocks): " + file.string());
    }
    return out;
}

std::set<std::string> read_id_list(const std::filesystem::path& file) {
    std::set<std::string> ids;
    for (const auto& raw : split_lines(read_text_file(file))) {
        std::string id = trim(raw);
        if (id.empty() || id[0] == '#') continue;
        if (id.size() > 3 && id.compare(id.size() - 3, 3, ".pl") == 0) id.resize(id.size() - 3);
        ids.insert(id);
    }
    return ids;
}

}  // namespace

SaraData ingest_sara(const std::filesystem::path& root) {
    const auto statutes_dir = root / "statutes";
    const auto cases_dir = root / "cases";
    if (!std::filesystem::is_directory(statutes_dir) || !std::filesystem::is_directory(cases_dir)) {
        throw DataError("not a SARA layout (need statutes/ and cases/): " + root.string());
    }

    SaraData data;
    std::vector<std::filesystem::path> statute_files;
    for (const auto& entry : std::filesystem::directory_iterator(statutes_dir)) {
        if (entry.path().extension() == ".txt") statute_files.push_back(entry.path());
    }
    std::sort(statute_files.begin(), statute_files.end());
    for (const auto& file : statute_files) {
        std::string id = file.stem().string();
        if (id.rfind("section", 0) == 0) id = id.substr(7);
        if (id.empty()) throw DataError("cannot derive a section id from " + file.string());
        data.statutes.sections[id] = read_text_file(file.string());
    }
    if (data.statutes.sections.size() != 9) {
        throw DataError("expected exactly nine statute files, found " +
                        std::to_string(data.statutes.sections.size()));
    }

    const auto train_ids = read_id_list(root / "train.txt");
    const auto test_ids = read_id_list(root / "test.txt");

    std::vector<std::filesystem::path> case_files;
    for (const auto& entry : std::filesystem::directory_iterator(cases_dir)) {
        if (entry.path().extension() == ".pl") case_files.push_back(entry.path());
    }
    std::sort(case_files.begin(), case_files.end());
    if (case_files.empty()) throw DataError("no case files under " + cases_dir.string());

    for (const auto& file : case_files) {
        const std::string id = file.stem().string();
        const RawCase raw = parse_case_file(file);
        const auto tokens = split_ws(raw.question);
        const std::string label_token = tokens.back();

        if (label_token[0] == '$' || is_ascii_digits(label_token)) {
            ++data.dropped_tax_cases;  // dollar-answer tax case
            continue;
        }

        SaraCase c;
        c.id = id;
        c.premise = raw.premise;
        c.hypothesis = trim(raw.question.substr(0, raw.question.size() - label_token.size()));
        if (label_token == "Entailment") {
            c.label = SaraLabel::kEntailment;
        } else if (label_token == "Contradiction") {
            c.label = SaraLabel::kContradiction;
        } else {
            throw DataError("case " + id + " has an unrecognized answer token: " + label_token);
        }
        if (train_ids.count(id)) {
            c.split = SaraSplit::kTrain;
        } else if (test_ids.count(id)) {
            c.split = SaraSplit::kTest;
        } else {
            throw DataError("case " + id + " appears in neither train.txt nor test.txt");
        }
        c.numeric = classify_numeric(c.premise, c.hypothesis);
        data.cases.push_back(std::move(c));
    }

    // Sanity notes against the published SARA v1 counts.
    int train = 0, test = 0, test_numeric = 0, numeric = 0;
    for (const auto& c : data.cases) {
        if (c.split == SaraSplit::kTrain) ++train;
        if (c.split == SaraSplit::kTest) {
            ++test;
            if (c.numeric) ++test_numeric;
        }
        if (c.numeric) ++numeric;
    }
    const int total = static_cast<int>(data.cases.size());
    if (total == 276) {
        if (train != 176 || test != 100) {
            data.notes.push_back("split sizes " + std::to_string(train) + "/" + std::to_string(test) +
                                 " differ from the published 176/100");
        }
        if (numeric != 193) {
            data.notes.push_back("numeric-case count " + std::to_string(numeric) +
                                 " differs from the published 193");
        }
        if (test_numeric != 72) {
            data.notes.push_back("numeric test cases " + std::to_string(test_numeric) +
                                 " differ from the published 72");
        }
    } else {
        data.notes.push_back("dataset has " + std::to_string(total) +
                             " binary cases (full SARA v1 has 276)");
    }
    return data;
}

bool classify_numeric(const std::string& premise, const std::string& hypothesis) {
    static const std::regex citation_re(
        R"([Ss]ections?\s+[0-9][0-9A-Za-z]*(\([0-9A-Za-z]+\))*(\s*(,|and|or)\s*(\([0-9A-Za-z]+\))+)*(\s*(,|and|or)\s+[0-9][0-9A-Za-z]*(\([0-9A-Za-z]+\))*)*)");
    static const std::regex date_re(
        R"((January|February|March|April|May|June|July|August|September|October|November|December)\s+[0-9]{1,2}(st|nd|rd|th)?(,\s*[0-9]{4})?)");
    static const std::regex year_re(R"(\b(1[5-9][0-9]{2}|20[0-9]{2})\b)");

    std::string text = premise + " " + hypothesis;
    text = std::regex_replace(text, citation_re, " ");
    text = std::regex_replace(text, date_re, " ");
    text = std::regex_replace(text, year_re, " ");
    return std::any_of(text.begin(), text.end(),
                       [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::string irc_substitute(const std::string& text) {
    static const std::string prefix = "I.R.C. ";
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        const bool word_start = i == 0 || !std::isalnum(static_cast<unsigned char>(text[i - 1]));
        if (word_start && (text.compare(i, 7, "section") == 0 || text.compare(i, 7, "Section") == 0) &&
            (i + 7 == text.size() || !std::isalnum(static_cast<unsigned char>(text[i + 7])))) {
            const bool already = out.size() >= prefix.size() &&
                                 out.compare(out.size() - prefix.size(), prefix.size(), prefix) == 0;
            if (!already) out += prefix;
            out += "section";
            i += 7;
            continue;
        }
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

std::string most_relevant_section(const SaraCase& c) {
    static const std::regex section_re(R"([Ss]ections?\s+([0-9]+[0-9A-Za-z]*))");
    std::smatch m;
    if (!std::regex_search(c.hypothesis, m, section_re)) {
        throw DataError("hypothesis of case " + c.id + " cites no section");
    }
    return m[1].str();
}

namespace {

std::map<std::string, int> tf_vector(const std::string& text) {
    std::map<std::string, int> counts;
    std::string token;
    auto flush = [&] {
        if (!token.empty()) {
            ++counts[token];
            token.clear();
        }
    };
    for (char ch : text) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        } else {
            flush();
        }
    }
    flush();
    return counts;
}

double cosine(const std::map<std::string, int>& a, const std::map<std::string, int>& b) {
    double dot = 0, na = 0, nb = 0;
    for (const auto& [term, count] : a) {
        na += static_cast<double>(count) * count;
        auto it = b.find(term);
        if (it != b.end()) dot += static_cast<double>(count) * it->second;
    }
    for (const auto& [term, count] : b) nb += static_cast<double>(count) * count;
    if (na == 0 || nb == 0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

std::vector<const SaraCase*> select_dynamic_shots(const SaraCase& test_case,
                                                  const std::vector<SaraCase>& train_cases) {
    const auto query = tf_vector(test_case.premise + " " + test_case.hypothesis);
    struct Scored {
        const SaraCase* c;
        double sim;
    };
    std::vector<Scored> entail, contra;
    for (const auto& c : train_cases) {
        if (c.id == test_case.id) continue;
        const double sim = cosine(query, tf_vector(c.premise + " " + c.hypothesis));
        (c.label == SaraLabel::kEntailment ? entail : contra).push_back({&c, sim});
    }
    auto by_sim = [](const Scored& a, const Scored& b) {
        if (a.sim != b.sim) return a.sim > b.sim;
        return a.c->id < b.c->id;
    };
    std::sort(entail.begin(), entail.end(), by_sim);
    std::sort(contra.begin(), contra.end(), by_sim);
    if (entail.size() < 2 || contra.size() < 2) {
        throw DataError("need at least two training cases per label for dynamic shots");
    }
    // Alternate labels, starting with the more similar label group.
    const bool entail_first = entail[0].sim >= contra[0].sim;
    const auto& first = entail_first ? entail : contra;
    const auto& second = entail_first ? contra : entail;
    return {first[0].c, second[0].c, first[1].c, second[1].c};
}

std::string extract_subsection(const std::string& section_text, const std::string& subsection_label,
                               std::vector<std::string>* notes) {
    const std::string marker = "(" + subsection_label + ")";
    const auto lines = split_lines(section_text);
    const bool digit_label = is_ascii_digits(subsection_label);

    auto label_class = [&](const std::string& line) -> int {
        const std::string t = trim(line);
        if (t.size() < 3 || t[0] != '(') return 0;
        const std::size_t close = t.find(')');
        if (close == std::string::npos || close < 2) return 0;
        const std::string label = t.substr(1, close - 1);
        if (is_ascii_digits(label)) return 2;
        if (std::all_of(label.begin(), label.end(),
                        [](unsigned char c) { return std::islower(c); })) {
            return 1;
        }
        return 0;
    };
    const int wanted_class = digit_label ? 2 : 1;

    std::vector<std::string> collected;
    bool in_block = false;
    for (const auto& line : lines) {
        const std::string t = trim(line);
        if (!in_block) {
            if (t.rfind(marker, 0) == 0) in_block = true;
        } else if (label_class(line) == wanted_class) {
            break;  // next sibling subsection/paragraph ends the block
        }
        if (in_block) collected.push_back(line);
    }
    if (collected.empty()) {
        if (notes) {
            notes->push_back("subsection (" + subsection_label +
                             ") not found; using the full section text");
        }
        return section_text;
    }
    std::string out;
    for (std::size_t i = 0; i < collected.size(); ++i) {
        if (i > 0) out += '\n';
        out += collected[i];
    }
    return out;
}

namespace {

std::string section_header(const std::string& text) {
    const auto lines = split_lines(text);
    return lines.empty() ? std::string() : lines[0];
}

const std::string& library_section(const StatuteLibrary& statutes, const std::string& id) {
    auto it = statutes.sections.find(id);
    if (it == statutes.sections.end()) throw DataError("no statute text for section " + id);
    return it->second;
}

std::string cot10_statute_block(const StatuteLibrary& statutes, std::vector<std::string>* notes) {
    // The fixed chain-of-thought set: 2(b), 63(c)(1) and (6), 152, 3306(a), 7703.
    std::vector<std::string> parts;
    const std::string& s2 = library_section(statutes, "2");
    parts.push_back(section_header(s2) + "\n" + extract_subsection(s2, "b", notes));
    const std::string& s63 = library_section(statutes, "63");
    const std::string s63c = extract_subsection(s63, "c", notes);
    parts.push_back(section_header(s63) + "\n" + extract_subsection(s63c, "1", notes) + "\n" +
                    extract_subsection(s63c, "6", notes));
    parts.push_back(library_section(statutes, "152"));
    const std::string& s3306 = library_section(statutes, "3306");
    parts.push_back(section_header(s3306) + "\n" + extract_subsection(s3306, "a", notes));
    parts.push_back(library_section(statutes, "7703"));

    std::string block;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) block += "\n\n";
        block += trim(parts[i]);
    }
    return block;
}

std::string case_block(const std::string& premise, const std::string& hypothesis,
                       const std::string& answer) {
    std::string block = "Premise: " + premise + "\n\nHypothesis: " + hypothesis + "\n\nAnswer:";
    if (!answer.empty()) block += " " + answer;
    return block;
}

std::filesystem::path default_cot_asset() { return data_dir() / "sara_cot10.txt"; }

}  // namespace

PromptBundle build_sara_prompt(const SaraCase& test_case, const SaraConfig& config,
                               const std::vector<const SaraCase*>& shots,
                               const StatuteLibrary& statutes, std::vector<std::string>* notes) {
    auto premise_of = [&](const SaraCase& c) {
        return config.include_statute ? c.premise : irc_substitute(c.premise);
    };
    auto hypothesis_of = [&](const SaraCase& c) {
        return config.include_statute ? c.hypothesis : irc_substitute(c.hypothesis);
    };

    std::vector<std::string> blocks;
    if (config.include_statute) {
        if (config.mode == SaraMode::kCot10) {
            blocks.push_back(cot10_statute_block(statutes, notes));
        } else {
            blocks.push_back(trim(library_section(statutes, most_relevant_section(test_case))));
        }
    }

    if (config.mode == SaraMode::kDynamic4) {
        if (shots.size() != 4) throw ConfigError("dynamic4 prompts need exactly four shots");
        for (const SaraCase* shot : shots) {
            blocks.push_back(case_block(premise_of(*shot), hypothesis_of(*shot), to_string(shot->label)));
        }
    } else if (config.mode == SaraMode::kCot10) {
        const auto asset = config.cot_asset.empty() ? default_cot_asset() : config.cot_asset;
        std::string text = read_text_file(asset);
        while (!text.empty() && text.back() == '\n') text.pop_back();
        blocks.push_back(text);
    }

    std::string tail = case_block(premise_of(test_case), hypothesis_of(test_case), "");
    if (config.step_by_step && config.mode != SaraMode::kCot10) {
        tail += " " + std::string(kStepByStep);
    }
    blocks.push_back(tail);

    PromptBundle bundle;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i > 0) bundle.stage1_prompt += "\n\n";
        bundle.stage1_prompt += blocks[i];
    }
    bundle.expects = Expects::kEntailContra;
    bundle.extraction_suffix = config.extraction_suffix.empty()
                                   ? std::string(kEntailContraExtractionSuffix)
                                   : config.extraction_suffix;
    return bundle;
}

namespace {

std::string now_iso() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

SaraEvalResult evaluate_sara(const SaraData& data, const SaraConfig& config, Backend& backend,
                             const std::string& model, int parallelism) {
    std::vector<const SaraCase*> test_cases;
    std::vector<SaraCase> train_cases;
    for (const auto& c : data.cases) {
        if (c.split == SaraSplit::kTest) {
            test_cases.push_back(&c);
        } else {
            train_cases.push_back(c);
        }
    }
    if (test_cases.empty()) throw DataError("no test-split cases to evaluate");

    std::vector<EvalRecord> records(test_cases.size());
    parallel_for(test_cases.size(), parallelism, [&](std::size_t i) {
        const SaraCase& c = *test_cases[i];
        json record;
        record["kind"] = "sara";
        record["index"] = static_cast<int>(i);
        record["case_id"] = c.id;
        record["stratum"] = c.numeric ? "numbers" : "no numbers";
        record["expected"] = to_string(c.label);
        record["meta"] = {{"mode", to_string(config.mode)},
                          {"include_statute", config.include_statute},
                          {"step_by_step", config.step_by_step}};
        record["turns"] = json::array();
        try {
            std::vector<const SaraCase*> shots;
            if (config.mode == SaraMode::kDynamic4) {
                shots = select_dynamic_shots(c, train_cases);
            }
            const PromptBundle bundle = build_sara_prompt(c, config, shots, data.statutes);

            CompletionRequest request;
            request.model = model;
            request.prompt = bundle.stage1_prompt;
            request.max_tokens = 256;
            std::string started = now_iso();
            CompletionResponse response = backend.complete(request);
            record["turns"].push_back(json{
                {"request", {{"model", request.model}, {"prompt", request.prompt}}},
                {"response", {{"text", response.text}, {"cached", response.cached}}},
                {"timestamps", {{"started", started}, {"finished", now_iso()}}}});

            ExtractedAnswer answer = parse_answer(response.text, Expects::kEntailContra);
            if (answer.verdict == Verdict::kIndeterminate) {
                CompletionRequest extraction;
                extraction.model = model;
                extraction.prompt = bundle.stage1_prompt + response.text + "\n" +
                                    bundle.extraction_suffix;
                extraction.max_tokens = 16;
                started = now_iso();
                CompletionResponse second = backend.complete(extraction);
                record["turns"].push_back(json{
                    {"request", {{"model", extraction.model}, {"prompt", extraction.prompt}}},
                    {"response", {{"text", second.text}, {"cached", second.cached}}},
                    {"timestamps", {{"started", started}, {"finished", now_iso()}}}});
                answer = parse_answer(second.text, Expects::kEntailContra);
                answer.via_extraction_stage = true;
            }

            const std::string verdict = to_string(answer.verdict);
            record["verdict"] = verdict;
            record["via_extraction"] = answer.via_extraction_stage;
            record["correct"] = verdict == to_string(c.label);
            record["category"] = answer.verdict == Verdict::kIndeterminate ? "indeterminate"
                                 : verdict == to_string(c.label)           ? "correct"
                                                                           : "incorrect";
        } catch (const BackendError& e) {
            record["verdict"] = "Indeterminate";
            record["via_extraction"] = false;
            record["correct"] = false;
            record["category"] = "transport_error";
            record["error"] = e.what();
        }
        records[i] = std::move(record);
    });

    SaraEvalResult result;
    result.records = records;
    result.summary = aggregate(records);
    result.summary.metadata = json{{"mode", to_string(config.mode)},
                                   {"include_statute", config.include_statute},
                                   {"step_by_step", config.step_by_step},
                                   {"test_cases", static_cast<int>(test_cases.size())}};
    return result;
}

}  // namespace statbench
