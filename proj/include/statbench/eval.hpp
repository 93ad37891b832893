#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "statbench/llm_backend.hpp"
#include "statbench/stats_report.hpp"

namespace statbench {

/// Full transcript of one evaluation: prompts, raw completions, the extracted
/// answer and its correctness category, as one JSON object per item.
using EvalRecord = nlohmann::json;

void write_records_jsonl(const std::filesystem::path& path, const std::vector<EvalRecord>& records);
std::vector<EvalRecord> read_records_jsonl(const std::filesystem::path& path);

struct SynthEvalOptions {
    int shots = 0;  // 0 or 2
    std::optional<RenderingKind> rendering;  // overrides the items' stored mode
    std::string phrasing_id = "P1";
    std::string model = "mock";
    int max_tokens = 256;
    int extraction_max_tokens = 16;
    std::uint64_t seed = 0;  // drives two-shot example sampling
    int parallelism = 1;
};

/// Runs the two-stage protocol over every item and returns one record per
/// item, in item order. Transport failures are recorded per item rather than
/// aborting the run.
std::vector<EvalRecord> evaluate_synthetic(const std::vector<TestItem>& items,
                                           const SynthEvalOptions& options, Backend& backend);

/// Convenience: overall accuracy in percent over non-transport records.
double overall_accuracy_percent(const std::vector<EvalRecord>& records);

}  // namespace statbench
