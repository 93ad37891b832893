#pragma once

#include <optional>
#include <string>
#include <vector>

#include "statbench/eval.hpp"

namespace statbench {

struct UscSection {
    int title = 0;
    std::string section;  // may carry letters, e.g. "280G"
    std::string heading;
    std::string body;
    int word_count = 0;  // whitespace tokens of body, computed at ingestion
};

/// JSONL corpus: one {"title","section","heading","body"} object per line.
/// A stored word_count, when present, must match the recomputed value.
std::vector<UscSection> load_usc_corpus(const std::filesystem::path& path);
void write_usc_corpus(const std::filesystem::path& path, const std::vector<UscSection>& corpus);

/// Up to per_title uniform draws per title among sections whose bodies have
/// between min_words and max_words words; titles with fewer qualifying
/// sections contribute all of them (recorded in shortfall_notes).
std::vector<UscSection> sample_sections(const std::vector<UscSection>& corpus, int per_title,
                                        Rng& rng, int min_words = 100, int max_words = 1000,
                                        std::vector<std::string>* shortfall_notes = nullptr);

enum class IdentifyClass { kNotUsc, kWrongTitle, kRightTitleWrongSection, kCorrect };

std::string to_string(IdentifyClass c);

struct IdentifyOutcome {
    IdentifyClass cls = IdentifyClass::kNotUsc;
    std::optional<int> predicted_title;
    std::optional<std::string> predicted_section;
    std::optional<int> off_by;  // |predicted - true| for numeric right-title misses
    bool flagged = false;       // an unparseable stage response was classified conservatively
    std::vector<nlohmann::json> turns;
};

/// Four-stage identification dialogue. Each stage's prompt is the full
/// concatenation of all prior prompts and responses plus the stage question.
IdentifyOutcome identify_dialogue(const UscSection& section, Backend& backend,
                                  const std::string& model = "mock", int max_tokens = 64);

std::string recite_prompt(int title, const std::string& section);
std::string recite(int title, const std::string& section, Backend& backend,
                   const std::string& model = "mock", int max_tokens = 512);

/// Tokenizer behind the BLEU scores: punctuation characters become their own
/// tokens, then the text splits on whitespace. Case-sensitive.
std::vector<std::string> bleu_tokenize(std::string_view text);

/// Geometric mean of clipped 1..4-gram precisions, scaled to [0,100], with no
/// brevity penalty. Zero-count precisions smooth to 1e-9; an empty candidate
/// scores 0.
double unpenalized_bleu(const std::string& candidate, const std::string& reference);

/// The same score multiplied by the standard brevity penalty.
double penalized_bleu(const std::string& candidate, const std::string& reference);

struct RankResult {
    int rank = 0;           // 1-based
    double normalized = 0;  // (rank-1)/(N-1)
    int section_count = 0;
};

/// Ranks every section of the title by descending unpenalized BLEU against
/// the candidate (ties broken by section identifier, numeric-aware) and
/// locates the true section.
RankResult rank_metrics(const std::string& candidate, const std::string& true_section,
                        const std::vector<UscSection>& title_sections);

double recall_at_k(const std::vector<RankResult>& results, int k);

struct IdentifyTally {
    int not_usc = 0;
    int wrong_title = 0;
    int right_title_wrong_section = 0;
    int correct = 0;
    int numeric_predictions = 0;  // right-title misses with a numeric section guess
    int off_by_one = 0;
    int off_by_nine_or_less = 0;

    int total() const { return not_usc + wrong_title + right_title_wrong_section + correct; }
};

IdentifyTally tally_outcomes(const std::vector<EvalRecord>& records);
std::string render_identify_table(const IdentifyTally& tally);

EvalRecord identify_record(const UscSection& section, const IdentifyOutcome& outcome, int index);

struct RecitationStats {
    double mean_bleu = 0;
    double median_bleu = 0;
    int above_20 = 0;
    double recall_at_1 = 0;
    double recall_at_5 = 0;
    double mean_normalized_rank = 0;
    double median_normalized_rank = 0;
    int total = 0;
};

RecitationStats recitation_stats(const std::vector<EvalRecord>& records);
std::string render_recitation_table(const RecitationStats& stats);

}  // namespace statbench
