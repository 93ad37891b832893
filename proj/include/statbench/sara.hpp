#pragma once

#include <map>
#include <string>
#include <vector>

#include "statbench/eval.hpp"

namespace statbench {

enum class SaraLabel { kEntailment, kContradiction };
enum class SaraSplit { kTrain, kTest };

std::string to_string(SaraLabel label);
std::string to_string(SaraSplit split);

struct SaraCase {
    std::string id;
    std::string premise;
    std::string hypothesis;
    SaraLabel label = SaraLabel::kEntailment;
    SaraSplit split = SaraSplit::kTrain;
    bool numeric = false;
};

/// The nine statutory sections, keyed by section identifier ("152", "7703").
struct StatuteLibrary {
    std::map<std::string, std::string> sections;
};

struct SaraData {
    std::vector<SaraCase> cases;  // binary cases only; tax cases are dropped
    StatuteLibrary statutes;
    int dropped_tax_cases = 0;
    std::vector<std::string> notes;  // count mismatches vs. the published splits
};

/// Reads a SARA v1 layout: statutes/*.txt, cases/*.pl with "% Text" /
/// "% Question" comment blocks (question block ends with the label token),
/// and train.txt/test.txt id lists.
SaraData ingest_sara(const std::filesystem::path& root);

/// True iff the case involves a number that is neither part of a statutory
/// citation nor part of a calendar date.
bool classify_numeric(const std::string& premise, const std::string& hypothesis);

/// Replaces the word "section" with "I.R.C. section" (idempotent).
std::string irc_substitute(const std::string& text);

/// Section identifier cited in the hypothesis ("152" from "section
/// 152(d)(2)(A)"). Every SARA hypothesis names one.
std::string most_relevant_section(const SaraCase& c);

/// Top-2 Entailment and top-2 Contradiction training cases by
/// term-frequency cosine over premise+hypothesis, ordered by descending
/// similarity with alternating labels.
std::vector<const SaraCase*> select_dynamic_shots(const SaraCase& test_case,
                                                  const std::vector<SaraCase>& train_cases);

enum class SaraMode { kDynamic4, kZero, kCot10 };

std::string to_string(SaraMode mode);
SaraMode sara_mode_from_string(std::string_view s);

struct SaraConfig {
    SaraMode mode = SaraMode::kZero;
    bool include_statute = true;
    bool step_by_step = false;  // ignored for cot10
    std::filesystem::path cot_asset;  // defaults to the bundled ten examples
    std::string extraction_suffix;    // defaults to the Entailment/Contradiction suffix
};

/// Extracts "(b)"-style subsections from a section text; falls back to the
/// full section (recording a note) when the marker is absent.
std::string extract_subsection(const std::string& section_text, const std::string& subsection_label,
                               std::vector<std::string>* notes = nullptr);

PromptBundle build_sara_prompt(const SaraCase& test_case, const SaraConfig& config,
                               const std::vector<const SaraCase*>& shots,
                               const StatuteLibrary& statutes,
                               std::vector<std::string>* notes = nullptr);

struct SaraEvalResult {
    std::vector<EvalRecord> records;
    RunSummary summary;
};

/// Evaluates every test-split case with the two-stage extraction protocol.
/// Strata: "numbers" and "no numbers"; the aggregate row covers all cases.
SaraEvalResult evaluate_sara(const SaraData& data, const SaraConfig& config, Backend& backend,
                             const std::string& model = "mock", int parallelism = 1);

}  // namespace statbench
