#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "statbench/oracle.hpp"

namespace statbench {

inline constexpr std::string_view kStepByStep = "Let's think step by step.";
inline constexpr std::string_view kYesNoExtractionSuffix = "Therefore, the answer (Yes or No) is";
inline constexpr std::string_view kEntailContraExtractionSuffix =
    "Therefore, the answer (Entailment or Contradiction) is";

enum class Expects { kYesNo, kEntailContra };

enum class Verdict { kYes, kNo, kEntailment, kContradiction, kIndeterminate };

std::string to_string(Verdict v);

struct ExtractedAnswer {
    Verdict verdict = Verdict::kIndeterminate;
    bool via_extraction_stage = false;
};

struct PromptBundle {
    std::string stage1_prompt;
    std::string extraction_suffix;
    Expects expects = Expects::kYesNo;
};

/// One of the seven question templates. Slots: {S} provision reference,
/// {N} person name, {T} top-level term, {a(n)} article for {T},
/// {her/him} pronoun.
struct PhrasingVariant {
    std::string id;
    std::string question_template;
};

class PhrasingSet {
public:
    static const PhrasingSet& bundled();
    static PhrasingSet load(const std::filesystem::path& file);

    const PhrasingVariant& get(const std::string& id) const;  // throws ConfigError
    const std::vector<PhrasingVariant>& all() const { return variants_; }

private:
    std::vector<PhrasingVariant> variants_;
};

std::string expand_phrasing(const PhrasingVariant& phrasing, const std::string& provision_ref,
                            const std::string& person_name, Gender gender,
                            const std::string& root_term);

/// Provision reference used in questions: the citation in statute mode,
/// "sentence <k>" in sentence mode.
std::string provision_reference(const TestItem& item);

/// statute-or-sentences + blank line + fact + question + step-by-step cue.
PromptBundle build_zero_shot(const TestItem& item, const PhrasingVariant& phrasing);
PromptBundle build_zero_shot(const TestItem& item);  // item.phrasing_id

/// Explicit choices behind a two-shot prompt, exposed so known prompts can be
/// reconstructed exactly.
struct TwoShotPlan {
    Citation example_citation;  // atomic, never the test target
    std::string yes_name;
    std::string yes_term;  // on the example definition's right-hand side
    std::string no_name;
    std::string no_term;  // not on the example definition's right-hand side
    bool yes_first = false;
};

TwoShotPlan sample_two_shot_plan(const TestItem& item, Rng& rng,
                                 const std::vector<PersonName>& names);
PromptBundle build_two_shot(const TestItem& item, const TwoShotPlan& plan);
PromptBundle build_two_shot(const TestItem& item, Rng& rng);

/// Second-stage prompt: stage-1 prompt + model response + extraction suffix.
std::string build_extraction(const std::string& stage1_prompt, const std::string& response,
                             Expects expects);

/// Total answer scan: phrase patterns ("does apply" / "does NOT apply")
/// first, then standalone keyword tokens. Exactly one family present gives a
/// verdict; both or neither give Indeterminate. Never throws.
ExtractedAnswer parse_answer(std::string_view text, Expects expects);

Verdict expected_verdict(const TestItem& item);

}  // namespace statbench
