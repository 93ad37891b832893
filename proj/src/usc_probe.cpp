#include "statbench/usc_probe.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace statbench {

using nlohmann::json;

std::vector<UscSection> load_usc_corpus(const std::filesystem::path& path) {
    std::vector<UscSection> corpus;
    for (const auto& line : split_lines(read_text_file(path))) {
        if (trim(line).empty()) continue;
        const json j = json::parse(line);
        UscSection section;
        section.title = j.at("title").get<int>();
        section.section = j.at("section").get<std::string>();
        section.heading = j.value("heading", std::string());
        section.body = j.at("body").get<std::string>();
        section.word_count = whitespace_token_count(section.body);
        if (j.contains("word_count") && j["word_count"].get<int>() != section.word_count) {
            throw DataError("stored word_count disagrees with the body for " +
                            std::to_string(section.title) + " U.S.C. " + section.section);
        }
        corpus.push_back(std::move(section));
    }
    if (corpus.empty()) throw DataError("empty corpus: " + path.string());
    return corpus;
}

void write_usc_corpus(const std::filesystem::path& path, const std::vector<UscSection>& corpus) {
    std::string out;
    for (const auto& section : corpus) {
        json j;
        j["title"] = section.title;
        j["section"] = section.section;
        j["heading"] = section.heading;
        j["body"] = section.body;
        out += j.dump();
        out += '\n';
    }
    write_text_file_atomic(path, out);
}

std::vector<UscSection> sample_sections(const std::vector<UscSection>& corpus, int per_title,
                                        Rng& rng, int min_words, int max_words,
                                        std::vector<std::string>* shortfall_notes) {
    if (corpus.empty()) throw DataError("cannot sample from an empty corpus");
    if (per_title < 1) throw ConfigError("per_title must be >= 1");

    std::map<int, std::vector<const UscSection*>> qualifying;
    for (const auto& section : corpus) {
        if (section.word_count >= min_words && section.word_count <= max_words) {
            qualifying[section.title].push_back(&section);
        }
    }

    std::vector<UscSection> samples;
    for (auto& [title, sections] : qualifying) {
        std::sort(sections.begin(), sections.end(),
                  [](const UscSection* a, const UscSection* b) { return a->section < b->section; });
        if (static_cast<int>(sections.size()) <= per_title) {
            if (static_cast<int>(sections.size()) < per_title && shortfall_notes) {
                shortfall_notes->push_back("title " + std::to_string(title) + " has only " +
                                           std::to_string(sections.size()) + " qualifying sections");
            }
            for (const auto* s : sections) samples.push_back(*s);
            continue;
        }
        // Partial Fisher-Yates: uniform sample without replacement.
        std::vector<std::size_t> indices(sections.size());
        std::iota(indices.begin(), indices.end(), 0);
        for (int k = 0; k < per_title; ++k) {
            const std::size_t j = k + rng.below(indices.size() - static_cast<std::size_t>(k));
            std::swap(indices[static_cast<std::size_t>(k)], indices[j]);
            samples.push_back(*sections[indices[static_cast<std::size_t>(k)]]);
        }
    }
    return samples;
}

std::string to_string(IdentifyClass c) {
    switch (c) {
        case IdentifyClass::kNotUsc: return "not_usc";
        case IdentifyClass::kWrongTitle: return "wrong_title";
        case IdentifyClass::kRightTitleWrongSection: return "right_title_wrong_section";
        case IdentifyClass::kCorrect: return "correct";
    }
    return "not_usc";
}

namespace {

json dialogue_turn(const std::string& prompt, const std::string& response) {
    return json{{"prompt", prompt}, {"response", response}};
}

std::optional<int> first_integer_token(const std::string& text) {
    std::size_t i = 0;
    while (i < text.size()) {
        if (std::isdigit(static_cast<unsigned char>(text[i]))) {
            std::size_t j = i;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            return std::stoi(text.substr(i, j - i));
        }
        ++i;
    }
    return std::nullopt;
}

/// First token containing a digit, stripped of surrounding punctuation, so an
/// alphanumeric identifier like "280G" survives intact.
std::optional<std::string> first_section_token(const std::string& text) {
    for (std::string token : split_ws(text)) {
        if (std::none_of(token.begin(), token.end(),
                         [](unsigned char c) { return std::isdigit(c) != 0; })) {
            continue;
        }
        std::size_t b = 0, e = token.size();
        while (b < e && !std::isalnum(static_cast<unsigned char>(token[b]))) ++b;
        while (e > b && !std::isalnum(static_cast<unsigned char>(token[e - 1]))) --e;
        if (e > b) return to_lower(token.substr(b, e - b));
    }
    return std::nullopt;
}

}  // namespace

IdentifyOutcome identify_dialogue(const UscSection& section, Backend& backend,
                                  const std::string& model, int max_tokens) {
    IdentifyOutcome outcome;
    auto ask = [&](const std::string& prompt) {
        CompletionRequest request;
        request.model = model;
        request.prompt = prompt;
        request.max_tokens = max_tokens;
        const CompletionResponse response = backend.complete(request);
        outcome.turns.push_back(dialogue_turn(prompt, response.text));
        return response.text;
    };

    // Stage 1: open-ended origin question over the bare body.
    std::string transcript = section.body + "\nWhere is the text above from?";
    std::string response = ask(transcript);
    transcript += response;

    // Stage 2: is it from the U.S. Code?
    transcript += "\nSo is it from the U.S. Code? The answer (Yes or No) is";
    response = ask(transcript);
    const ExtractedAnswer yes_no = parse_answer(response, Expects::kYesNo);
    if (yes_no.verdict == Verdict::kIndeterminate) {
        outcome.flagged = true;
        outcome.cls = IdentifyClass::kNotUsc;
        return outcome;
    }
    if (yes_no.verdict == Verdict::kNo) {
        outcome.cls = IdentifyClass::kNotUsc;
        return outcome;
    }
    transcript += response;

    // Stage 3: which title?
    transcript += "\nWhat title of the U.S. Code is it from? The answer (arabic numerals) is";
    response = ask(transcript);
    outcome.predicted_title = first_integer_token(response);
    if (!outcome.predicted_title) {
        outcome.flagged = true;
        outcome.cls = IdentifyClass::kWrongTitle;
        return outcome;
    }
    if (*outcome.predicted_title != section.title) {
        outcome.cls = IdentifyClass::kWrongTitle;
        return outcome;
    }
    transcript += response;

    // Stage 4: which section of the (correct) title?
    transcript += "\nWhat section of title " + std::to_string(section.title) +
                  " of the U.S. Code is it from? The answer (arabic numerals) is";
    response = ask(transcript);
    outcome.predicted_section = first_section_token(response);
    if (!outcome.predicted_section) {
        outcome.flagged = true;
        outcome.cls = IdentifyClass::kRightTitleWrongSection;
        return outcome;
    }
    if (*outcome.predicted_section == to_lower(section.section)) {
        outcome.cls = IdentifyClass::kCorrect;
        return outcome;
    }
    outcome.cls = IdentifyClass::kRightTitleWrongSection;
    if (is_ascii_digits(*outcome.predicted_section) && is_ascii_digits(section.section)) {
        outcome.off_by = std::abs(std::stoi(*outcome.predicted_section) - std::stoi(section.section));
    }
    return outcome;
}

std::string recite_prompt(int title, const std::string& section) {
    return "The text of " + std::to_string(title) + " U.S. Code section " + section + " is:";
}

std::string recite(int title, const std::string& section, Backend& backend,
                   const std::string& model, int max_tokens) {
    CompletionRequest request;
    request.model = model;
    request.prompt = recite_prompt(title, section);
    request.max_tokens = max_tokens;
    return backend.complete(request).text;
}

// --- BLEU ---------------------------------------------------------------------

std::vector<std::string> bleu_tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    };
    for (char c : text) {
        const unsigned char uc = static_cast<unsigned char>(c);
        if (std::isspace(uc)) {
            flush();
        } else if (std::isalnum(uc)) {
            current.push_back(c);
        } else {
            flush();
            tokens.push_back(std::string(1, c));
        }
    }
    flush();
    return tokens;
}

namespace {

constexpr double kBleuEpsilon = 1e-9;
constexpr int kMaxNgramOrder = 4;

std::map<std::string, int> ngram_counts(const std::vector<std::string>& tokens, int n) {
    std::map<std::string, int> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
        std::string key;
        for (int k = 0; k < n; ++k) {
            if (k > 0) key.push_back('\x1f');
            key += tokens[i + static_cast<std::size_t>(k)];
        }
        ++counts[key];
    }
    return counts;
}

double precision_geomean(const std::vector<std::string>& cand,
                         const std::vector<std::string>& ref) {
    double log_sum = 0.0;
    for (int n = 1; n <= kMaxNgramOrder; ++n) {
        const auto cand_counts = ngram_counts(cand, n);
        const auto ref_counts = ngram_counts(ref, n);
        long long clipped = 0, total = 0;
        for (const auto& [gram, count] : cand_counts) {
            total += count;
            auto it = ref_counts.find(gram);
            if (it != ref_counts.end()) clipped += std::min(count, it->second);
        }
        const double p = (total > 0 && clipped > 0)
                             ? static_cast<double>(clipped) / static_cast<double>(total)
                             : kBleuEpsilon;
        log_sum += std::log(p);
    }
    return std::exp(log_sum / kMaxNgramOrder);
}

}  // namespace

double unpenalized_bleu(const std::string& candidate, const std::string& reference) {
    const auto cand = bleu_tokenize(candidate);
    if (cand.empty()) return 0.0;
    const auto ref = bleu_tokenize(reference);
    return 100.0 * precision_geomean(cand, ref);
}

double penalized_bleu(const std::string& candidate, const std::string& reference) {
    const auto cand = bleu_tokenize(candidate);
    if (cand.empty()) return 0.0;
    const auto ref = bleu_tokenize(reference);
    double bp = 1.0;
    if (cand.size() < ref.size()) {
        bp = std::exp(1.0 - static_cast<double>(ref.size()) / static_cast<double>(cand.size()));
    }
    return 100.0 * bp * precision_geomean(cand, ref);
}

namespace {

/// Numeric-aware identifier order: "99" < "100", "280" < "280G".
bool section_id_less(const std::string& a, const std::string& b) {
    auto leading_number = [](const std::string& s) {
        std::size_t i = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        return std::pair<long long, std::string>{i == 0 ? -1 : std::stoll(s.substr(0, i)),
                                                 s.substr(i)};
    };
    const auto [na, ra] = leading_number(a);
    const auto [nb, rb] = leading_number(b);
    if (na != nb) return na < nb;
    return ra < rb;
}

}  // namespace

RankResult rank_metrics(const std::string& candidate, const std::string& true_section,
                        const std::vector<UscSection>& title_sections) {
    if (title_sections.size() < 2) throw DataError("ranking needs at least two sections");
    struct Scored {
        const UscSection* section;
        double score;
    };
    std::vector<Scored> scored;
    scored.reserve(title_sections.size());
    bool found = false;
    for (const auto& section : title_sections) {
        scored.push_back({&section, unpenalized_bleu(candidate, section.body)});
        if (section.section == true_section) found = true;
    }
    if (!found) throw DataError("true section " + true_section + " absent from the title list");
    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return section_id_less(a.section->section, b.section->section);
    });
    RankResult result;
    result.section_count = static_cast<int>(scored.size());
    for (std::size_t i = 0; i < scored.size(); ++i) {
        if (scored[i].section->section == true_section) {
            result.rank = static_cast<int>(i) + 1;
            break;
        }
    }
    result.normalized = static_cast<double>(result.rank - 1) / (result.section_count - 1);
    return result;
}

double recall_at_k(const std::vector<RankResult>& results, int k) {
    if (results.empty()) return 0.0;
    const auto hits = std::count_if(results.begin(), results.end(),
                                    [k](const RankResult& r) { return r.rank <= k; });
    return static_cast<double>(hits) / static_cast<double>(results.size());
}

EvalRecord identify_record(const UscSection& section, const IdentifyOutcome& outcome, int index) {
    json record;
    record["kind"] = "usc_identify";
    record["index"] = index;
    record["title"] = section.title;
    record["section"] = section.section;
    record["stratum"] = "title " + std::to_string(section.title);
    record["outcome"] = to_string(outcome.cls);
    record["correct"] = outcome.cls == IdentifyClass::kCorrect;
    record["category"] = outcome.cls == IdentifyClass::kCorrect ? "correct" : "incorrect";
    if (outcome.predicted_title) record["predicted_title"] = *outcome.predicted_title;
    if (outcome.predicted_section) record["predicted_section"] = *outcome.predicted_section;
    if (outcome.off_by) record["off_by"] = *outcome.off_by;
    record["flagged"] = outcome.flagged;
    record["turns"] = outcome.turns;
    return record;
}

IdentifyTally tally_outcomes(const std::vector<EvalRecord>& records) {
    IdentifyTally tally;
    for (const auto& record : records) {
        const std::string outcome = record.value("outcome", "");
        if (outcome == "not_usc") ++tally.not_usc;
        if (outcome == "wrong_title") ++tally.wrong_title;
        if (outcome == "right_title_wrong_section") {
            ++tally.right_title_wrong_section;
            if (record.contains("predicted_section") &&
                is_ascii_digits(record["predicted_section"].get<std::string>())) {
                ++tally.numeric_predictions;
            }
            if (record.contains("off_by")) {
                const int off = record["off_by"].get<int>();
                if (off == 1) ++tally.off_by_one;
                if (off <= 9) ++tally.off_by_nine_or_less;
            }
        }
        if (outcome == "correct") ++tally.correct;
    }
    return tally;
}

std::string render_identify_table(const IdentifyTally& tally) {
    const int total = tally.total();
    auto row = [total](const char* label, int count) {
        std::ostringstream out;
        const double pct = total > 0 ? 100.0 * count / total : 0.0;
        out << label << " " << std::lround(pct) << "% (" << count << ")\n";
        return out.str();
    };
    std::string out;
    out += row("Not from U.S. Code", tally.not_usc);
    out += row("Wrong title", tally.wrong_title);
    out += row("Right title, wrong section", tally.right_title_wrong_section);
    out += row("Title and section correct", tally.correct);
    out += "numeric section guesses among right-title misses: " +
           std::to_string(tally.numeric_predictions) + "\n";
    out += "off by one: " + std::to_string(tally.off_by_one) + "\n";
    out += "off by nine or less: " + std::to_string(tally.off_by_nine_or_less) + "\n";
    return out;
}

RecitationStats recitation_stats(const std::vector<EvalRecord>& records) {
    RecitationStats stats;
    std::vector<double> bleus, ranks;
    std::vector<RankResult> rank_results;
    for (const auto& record : records) {
        if (record.value("kind", "") != "usc_recite") continue;
        bleus.push_back(record.at("unpenalized_bleu").get<double>());
        ranks.push_back(record.at("normalized_rank").get<double>());
        RankResult r;
        r.rank = record.at("rank").get<int>();
        r.normalized = record.at("normalized_rank").get<double>();
        r.section_count = record.at("section_count").get<int>();
        rank_results.push_back(r);
    }
    stats.total = static_cast<int>(bleus.size());
    if (stats.total == 0) return stats;
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    stats.mean_bleu = std::accumulate(bleus.begin(), bleus.end(), 0.0) / stats.total;
    stats.median_bleu = median(bleus);
    stats.above_20 =
        static_cast<int>(std::count_if(bleus.begin(), bleus.end(), [](double b) { return b > 20.0; }));
    stats.recall_at_1 = recall_at_k(rank_results, 1);
    stats.recall_at_5 = recall_at_k(rank_results, 5);
    stats.mean_normalized_rank = std::accumulate(ranks.begin(), ranks.end(), 0.0) / stats.total;
    stats.median_normalized_rank = median(ranks);
    return stats;
}

std::string render_recitation_table(const RecitationStats& stats) {
    std::ostringstream out;
    out << "recitations scored: " << stats.total << "\n"
        << "mean unpenalized-BLEU: " << stats.mean_bleu << "\n"
        << "median unpenalized-BLEU: " << stats.median_bleu << "\n"
        << "count above 20: " << stats.above_20 << "\n"
        << "recall@1: " << stats.recall_at_1 << "\n"
        << "recall@5: " << stats.recall_at_5 << "\n"
        << "mean normalized rank: " << stats.mean_normalized_rank << "\n"
        << "median normalized rank: " << stats.median_normalized_rank << "\n";
    return out.str();
}

}  // namespace statbench
