#include "statbench/eval.hpp"

#include <chrono>

namespace statbench {

using nlohmann::json;

void write_records_jsonl(const std::filesystem::path& path, const std::vector<EvalRecord>& records) {
    std::string out;
    for (const auto& record : records) {
        out += record.dump();
        out += '\n';
    }
    write_text_file_atomic(path, out);
}

std::vector<EvalRecord> read_records_jsonl(const std::filesystem::path& path) {
    std::vector<EvalRecord> records;
    for (const auto& line : split_lines(read_text_file(path))) {
        if (trim(line).empty()) continue;
        records.push_back(json::parse(line));
    }
    return records;
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

json turn_json(const CompletionRequest& request, const CompletionResponse& response,
               const std::string& started, const std::string& finished) {
    return json{{"request",
                 {{"model", request.model},
                  {"prompt", request.prompt},
                  {"temperature", request.temperature},
                  {"top_p", request.top_p},
                  {"max_tokens", request.max_tokens}}},
                {"response",
                 {{"text", response.text},
                  {"prompt_tokens", response.usage.prompt_tokens},
                  {"completion_tokens", response.usage.completion_tokens},
                  {"backend_id", response.backend_id},
                  {"cached", response.cached}}},
                {"timestamps", {{"started", started}, {"finished", finished}}}};
}

std::string category_for(Verdict verdict, Verdict expected) {
    if (verdict == expected) return "correct";
    if (verdict == Verdict::kIndeterminate) return "indeterminate";
    if (expected == Verdict::kNo && verdict == Verdict::kYes) return "false_positive";
    if (expected == Verdict::kYes && verdict == Verdict::kNo) return "false_negative";
    return "incorrect";
}

}  // namespace

std::vector<EvalRecord> evaluate_synthetic(const std::vector<TestItem>& items,
                                           const SynthEvalOptions& options, Backend& backend) {
    if (options.shots != 0 && options.shots != 2) {
        throw ConfigError("shots must be 0 or 2, got " + std::to_string(options.shots));
    }
    const PhrasingVariant phrasing = PhrasingSet::bundled().get(options.phrasing_id);
    const Rng plan_root(options.seed);

    std::vector<EvalRecord> records(items.size());
    parallel_for(items.size(), options.parallelism, [&](std::size_t i) {
        TestItem item = items[i];
        if (options.rendering) item.rendering = *options.rendering;
        if (options.shots == 2) item.rendering = RenderingKind::kStatute;

        json record;
        record["kind"] = "synthetic";
        record["index"] = item.index;
        record["stratum"] = to_string(item.tree.spec().term_mode) + " w" +
                            std::to_string(item.tree.spec().width) + " d" +
                            std::to_string(item.tree.spec().depth) + " " +
                            to_string(item.rendering) + " " + std::to_string(options.shots) +
                            "-shot " + options.phrasing_id;
        record["meta"] = {{"width", item.tree.spec().width},
                          {"depth", item.tree.spec().depth},
                          {"term_mode", to_string(item.tree.spec().term_mode)},
                          {"rendering", to_string(item.rendering)},
                          {"shots", options.shots},
                          {"phrasing", options.phrasing_id},
                          {"item_seed", item.item_seed}};
        record["fact"] = {{"name", item.fact.person_name},
                          {"gender", to_string(item.fact.gender)},
                          {"term", item.fact.fact_term}};
        record["target"] = {{"citation", format_citation(item.target_citation)},
                            {"sentence_index", item.target_sentence_index}};

        // Stored labels are never trusted blindly.
        item.label = applies(item.tree, item.target_citation, item.fact.fact_term);
        const Verdict expected = expected_verdict(item);
        record["expected"] = to_string(expected);
        record["turns"] = json::array();

        try {
            PromptBundle bundle;
            if (options.shots == 0) {
                bundle = build_zero_shot(item, phrasing);
            } else {
                Rng plan_rng = plan_root.split(static_cast<std::uint64_t>(item.index) + 1);
                bundle = build_two_shot(item, plan_rng);
            }

            CompletionRequest request;
            request.model = options.model;
            request.prompt = bundle.stage1_prompt;
            request.max_tokens = options.max_tokens;
            std::string started = now_iso();
            CompletionResponse response = backend.complete(request);
            record["turns"].push_back(turn_json(request, response, started, now_iso()));

            ExtractedAnswer answer = parse_answer(response.text, bundle.expects);
            if (answer.verdict == Verdict::kIndeterminate) {
                CompletionRequest extraction;
                extraction.model = options.model;
                extraction.prompt =
                    build_extraction(bundle.stage1_prompt, response.text, bundle.expects);
                extraction.max_tokens = options.extraction_max_tokens;
                started = now_iso();
                CompletionResponse second = backend.complete(extraction);
                record["turns"].push_back(turn_json(extraction, second, started, now_iso()));
                answer = parse_answer(second.text, bundle.expects);
                answer.via_extraction_stage = true;
            }

            record["verdict"] = to_string(answer.verdict);
            record["via_extraction"] = answer.via_extraction_stage;
            record["correct"] = answer.verdict == expected;
            record["category"] = category_for(answer.verdict, expected);
        } catch (const BackendError& e) {
            record["verdict"] = to_string(Verdict::kIndeterminate);
            record["via_extraction"] = false;
            record["correct"] = false;
            record["category"] = "transport_error";
            record["error"] = e.what();
        }
        records[i] = std::move(record);
    });
    return records;
}

double overall_accuracy_percent(const std::vector<EvalRecord>& records) {
    int correct = 0, total = 0;
    for (const auto& record : records) {
        if (record.value("category", "") == "transport_error") continue;
        ++total;
        if (record.value("correct", false)) ++correct;
    }
    if (total == 0) return 0.0;
    return 100.0 * correct / total;
}

}  // namespace statbench
