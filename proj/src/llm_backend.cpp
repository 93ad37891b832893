#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "statbench/llm_backend.hpp"

#include <cctype>
#include <chrono>
#include <ctime>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace statbench {

using nlohmann::json;

namespace {

TokenUsage estimate_usage(const std::string& prompt, const std::string& completion) {
    TokenUsage usage;
    usage.prompt_tokens = whitespace_token_count(prompt);
    usage.completion_tokens = whitespace_token_count(completion);
    return usage;
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

CompletionResponse FixedAnswerBackend::complete(const CompletionRequest& request) {
    return CompletionResponse{text_, estimate_usage(request.prompt, text_), id(), false};
}

ScriptedBackend ScriptedBackend::from_transcript(const std::filesystem::path& jsonl) {
    std::map<std::string, std::string> by_prompt;
    auto ingest = [&](const json& turn) {
        by_prompt[turn.at("request").at("prompt").get<std::string>()] =
            turn.at("response").at("text").get<std::string>();
    };
    for (const auto& line : split_lines(read_text_file(jsonl))) {
        if (trim(line).empty()) continue;
        const json j = json::parse(line);
        if (j.contains("turns")) {
            // Evaluation record: one entry per completion turn.
            for (const auto& turn : j.at("turns")) ingest(turn);
        } else {
            ingest(j);
        }
    }
    if (by_prompt.empty()) throw DataError("transcript holds no completions: " + jsonl.string());
    return ScriptedBackend(std::move(by_prompt));
}

CompletionResponse ScriptedBackend::complete(const CompletionRequest& request) {
    auto it = by_prompt_.find(request.prompt);
    if (it == by_prompt_.end()) {
        throw BackendError("scripted backend has no response for prompt starting: " +
                           request.prompt.substr(0, 80));
    }
    return CompletionResponse{it->second, estimate_usage(request.prompt, it->second), id(), false};
}

CompletionResponse SequenceBackend::complete(const CompletionRequest& request) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (next_ >= responses_.size()) throw BackendError("sequence backend exhausted");
    const std::string& text = responses_[next_++];
    return CompletionResponse{text, estimate_usage(request.prompt, text), id(), false};
}

// --- Synthetic-prompt parsing ---------------------------------------------------

namespace {

std::vector<std::string> split_blocks(const std::string& text) {
    std::vector<std::string> blocks;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t sep = text.find("\n\n", start);
        if (sep == std::string::npos) {
            blocks.push_back(text.substr(start));
            break;
        }
        blocks.push_back(text.substr(start, sep - start));
        start = sep + 2;
    }
    return blocks;
}

struct FactQuestion {
    std::string name;
    std::string term;
    std::string question;
};

FactQuestion parse_fact_question(const std::string& text) {
    FactQuestion out;
    const std::size_t is_pos = text.find(" is ");
    if (is_pos == std::string::npos) throw BackendError("no fact sentence in prompt: " + text);
    out.name = text.substr(0, is_pos);
    std::size_t pos = is_pos + 4;
    if (text.compare(pos, 3, "an ") == 0) {
        pos += 3;
    } else if (text.compare(pos, 2, "a ") == 0) {
        pos += 2;
    } else {
        throw BackendError("fact sentence missing article: " + text);
    }
    std::size_t term_end = pos;
    while (term_end < text.size() && (std::islower(static_cast<unsigned char>(text[term_end])) ||
                                      std::isdigit(static_cast<unsigned char>(text[term_end])))) {
        ++term_end;
    }
    if (term_end == pos || term_end >= text.size() || text[term_end] != '.') {
        throw BackendError("cannot parse fact term: " + text);
    }
    out.term = text.substr(pos, term_end - pos);
    out.question = trim(text.substr(term_end + 1));
    if (out.question.empty()) throw BackendError("prompt has no question: " + text);
    return out;
}

std::variant<Citation, int> parse_question_target(const std::string& question) {
    const std::string lower = to_lower(question);
    const std::size_t sent = lower.find("sentence ");
    if (sent != std::string::npos) {
        std::size_t pos = sent + 9;
        std::size_t end = pos;
        while (end < question.size() && std::isdigit(static_cast<unsigned char>(question[end]))) ++end;
        if (end == pos) throw BackendError("cannot parse sentence number: " + question);
        return std::stoi(question.substr(pos, end - pos));
    }
    const std::size_t sec = lower.find("section ");
    if (sec == std::string::npos) throw BackendError("question names no provision: " + question);
    std::size_t end = sec + 8;
    while (end < question.size() && std::isdigit(static_cast<unsigned char>(question[end]))) ++end;
    while (end < question.size() && question[end] == '(') {
        const std::size_t close = question.find(')', end);
        if (close == std::string::npos) break;
        end = close + 1;
    }
    return parse_citation(question.substr(sec, end - sec));
}

}  // namespace

SyntheticPromptView parse_synthetic_prompt(const std::string& prompt) {
    SyntheticPromptView view;
    std::string body = prompt;
    const std::string suffix(kYesNoExtractionSuffix);
    if (body.size() >= suffix.size() &&
        body.compare(body.size() - suffix.size(), suffix.size(), suffix) == 0) {
        view.extraction_stage = true;
        body.resize(body.size() - suffix.size());
        while (!body.empty() && body.back() == '\n') body.pop_back();
    }

    std::string fact_question_text;
    const std::size_t marker = body.find(kStepByStep);
    if (marker != std::string::npos) {
        // Zero-shot: the fact and question sit between the last blank line
        // before the cue and the cue itself.
        const std::size_t block_start = body.rfind("\n\n", marker);
        if (block_start == std::string::npos) throw BackendError("malformed zero-shot prompt");
        fact_question_text = trim(body.substr(block_start + 2, marker - block_start - 2));
        const std::string rendering_text = body.substr(0, block_start);
        view.rendering = rendering_text.rfind("Section ", 0) == 0
                             ? parse_rendered_statute(rendering_text)
                             : parse_rendered_sentences(rendering_text);
    } else {
        // Two-shot: rendering, two worked examples, then the test block.
        const auto blocks = split_blocks(body);
        if (blocks.size() < 4) throw BackendError("two-shot prompt has too few blocks");
        if (blocks[1].find(" says that ") == std::string::npos ||
            blocks[2].find(" says that ") == std::string::npos) {
            throw BackendError("two-shot prompt lacks worked examples");
        }
        view.rendering = parse_rendered_statute(blocks[0]);
        std::string test_block = blocks[3];
        const std::size_t qmark = test_block.find('?');
        if (qmark == std::string::npos) throw BackendError("test block has no question");
        fact_question_text = test_block.substr(0, qmark + 1);
    }

    const FactQuestion fq = parse_fact_question(fact_question_text);
    view.person_name = fq.name;
    view.fact_term = fq.term;
    view.target = parse_question_target(fq.question);

    if (view.rendering.statute_mode != std::holds_alternative<Citation>(view.target)) {
        throw BackendError("question form does not match the rendering");
    }
    return view;
}

namespace {

const ParsedDefinition* definition_for_target(const std::vector<ParsedDefinition>& defs,
                                              const std::variant<Citation, int>& target) {
    if (std::holds_alternative<Citation>(target)) {
        const Citation& cite = std::get<Citation>(target);
        for (const auto& def : defs) {
            if (citation_contains(cite, def.citation)) return &def;
        }
        return nullptr;
    }
    const int index = std::get<int>(target);
    for (const auto& def : defs) {
        if (def.sentence_index == index) return &def;
    }
    return nullptr;
}

bool term_applies(const std::vector<ParsedDefinition>& defs,
                  const std::variant<Citation, int>& target, const std::string& term) {
    for (const auto& def : defs) {
        const bool housed = std::holds_alternative<Citation>(target)
                                ? citation_contains(std::get<Citation>(target), def.citation)
                                : def.sentence_index == std::get<int>(target);
        if (!housed) continue;
        for (const auto& rhs : def.rhs_terms) {
            if (rhs == term) return true;
        }
    }
    return false;
}

std::string target_reference(const std::variant<Citation, int>& target) {
    if (std::holds_alternative<Citation>(target)) return format_citation(std::get<Citation>(target));
    return "sentence " + std::to_string(std::get<int>(target));
}

std::string explanation_text(const std::variant<Citation, int>& asked,
                             const ParsedDefinition& quoted, const std::string& name,
                             const std::string& term, bool positive) {
    const std::string ref = target_reference(asked);
    std::string text = capitalize(ref) + " says that " + quoted.definiendum + " means " +
                       conjoin_any(quoted.rhs_terms) + ". ";
    if (positive) {
        text += name + " is " + indefinite_article(term) + " " + term + ", so " + ref +
                " does apply to " + name + ".";
    } else {
        text += name + " is none of these, so " + ref + " does NOT apply to " + name + ".";
    }
    return text;
}

}  // namespace

CompletionResponse OracleMockBackend::complete(const CompletionRequest& request) {
    const SyntheticPromptView view = parse_synthetic_prompt(request.prompt);
    const bool applicable = term_applies(view.rendering.definitions, view.target, view.fact_term);
    std::string text;
    if (view.extraction_stage) {
        text = applicable ? " Yes." : " No.";
    } else {
        const ParsedDefinition* quoted = definition_for_target(view.rendering.definitions, view.target);
        if (!quoted) throw BackendError("questioned provision houses no definition");
        text = explanation_text(view.target, *quoted, view.person_name, view.fact_term, applicable);
    }
    return CompletionResponse{text, estimate_usage(request.prompt, text), id(), false};
}

Citation sibling_provision(const std::vector<ParsedDefinition>& defs, const Citation& target) {
    if (target.path.empty()) throw BackendError("the section itself has no siblings");
    const std::size_t len = target.path.size();
    std::vector<std::vector<CitationPart>> siblings;
    for (const auto& def : defs) {
        if (def.citation.path.size() < len) continue;
        std::vector<CitationPart> prefix(def.citation.path.begin(), def.citation.path.begin() + len);
        if (!std::equal(prefix.begin(), prefix.end() - 1, target.path.begin())) continue;
        if (std::find(siblings.begin(), siblings.end(), prefix) == siblings.end()) {
            siblings.push_back(std::move(prefix));
        }
    }
    auto it = std::find(siblings.begin(), siblings.end(), target.path);
    if (it == siblings.end()) {
        throw BackendError("target provision not found in the rendering: " + format_citation(target));
    }
    ++it;
    if (it == siblings.end()) it = siblings.begin();
    Citation out;
    out.section_number = target.section_number;
    out.path = *it;
    return out;
}

int sibling_sentence(int sentence_index, int sentence_count) {
    if (sentence_count < 1) throw BackendError("no sentences to pick a sibling from");
    return sentence_index % sentence_count + 1;
}

CompletionResponse OffByOneSiblingBackend::complete(const CompletionRequest& request) {
    const SyntheticPromptView view = parse_synthetic_prompt(request.prompt);
    std::variant<Citation, int> resolved;
    if (std::holds_alternative<Citation>(view.target)) {
        resolved = sibling_provision(view.rendering.definitions, std::get<Citation>(view.target));
    } else {
        resolved = sibling_sentence(std::get<int>(view.target),
                                    static_cast<int>(view.rendering.definitions.size()));
    }
    const bool applicable = term_applies(view.rendering.definitions, resolved, view.fact_term);
    std::string text;
    if (view.extraction_stage) {
        text = applicable ? " Yes." : " No.";
    } else {
        // Quotes the asked-about provision while actually reading its sibling.
        const ParsedDefinition* quoted = definition_for_target(view.rendering.definitions, resolved);
        if (!quoted) throw BackendError("sibling provision houses no definition");
        text = explanation_text(view.target, *quoted, view.person_name, view.fact_term, applicable);
    }
    return CompletionResponse{text, estimate_usage(request.prompt, text), id(), false};
}

// --- Cache -----------------------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string ResponseCache::key(const CompletionRequest& request) {
    json j;
    j["model"] = request.model;
    j["temperature"] = request.temperature;
    j["top_p"] = request.top_p;
    j["max_tokens"] = request.max_tokens;
    j["stop"] = request.stop;
    j["prompt"] = request.prompt;
    return sha256_hex(j.dump());
}

std::filesystem::path ResponseCache::entry_path(const std::string& key) const {
    return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<CompletionResponse> ResponseCache::load(const CompletionRequest& request) const {
    const auto path = entry_path(key(request));
    if (!std::filesystem::exists(path)) return std::nullopt;
    const json j = json::parse(read_text_file(path));
    CompletionResponse response;
    response.text = j.at("response").at("text").get<std::string>();
    response.usage.prompt_tokens = j.at("response").value("prompt_tokens", 0);
    response.usage.completion_tokens = j.at("response").value("completion_tokens", 0);
    response.backend_id = j.at("response").value("backend_id", std::string("unknown"));
    response.cached = true;
    return response;
}

void ResponseCache::store(const CompletionRequest& request, const CompletionResponse& response) {
    json j;
    j["request"] = {{"model", request.model},   {"temperature", request.temperature},
                    {"top_p", request.top_p},   {"max_tokens", request.max_tokens},
                    {"stop", request.stop},     {"prompt", request.prompt}};
    j["response"] = {{"text", response.text},
                     {"prompt_tokens", response.usage.prompt_tokens},
                     {"completion_tokens", response.usage.completion_tokens},
                     {"backend_id", response.backend_id}};
    j["timestamp"] = iso_timestamp();
    std::lock_guard<std::mutex> lock(write_mutex_);
    write_text_file_atomic(entry_path(key(request)), j.dump() + "\n");
}

CompletionResponse CachingBackend::complete(const CompletionRequest& request) {
    if (auto hit = cache_->load(request)) return *hit;
    CompletionResponse response = inner_->complete(request);
    cache_->store(request, response);
    return response;
}

// --- Live HTTP backend -------------------------------------------------------------

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
    if (options_.url.empty()) throw ConfigError("http backend requires a URL");
}

void HttpBackend::rate_limit() {
    if (options_.min_request_interval_seconds <= 0) return;
    std::lock_guard<std::mutex> lock(rate_mutex_);
    const auto interval =
        std::chrono::duration<double>(options_.min_request_interval_seconds);
    const auto now = std::chrono::steady_clock::now();
    const auto earliest = last_dispatch_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval);
    if (last_dispatch_.time_since_epoch().count() != 0 && now < earliest) {
        std::this_thread::sleep_for(earliest - now);
    }
    last_dispatch_ = std::chrono::steady_clock::now();
}

CompletionResponse HttpBackend::complete(const CompletionRequest& request) {
    // Split the endpoint into origin + path for the HTTP client.
    const std::string& url = options_.url;
    const std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("backend URL missing scheme: " + url);
    const std::size_t path_start = url.find('/', scheme_end + 3);
    const std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    json body;
    body["model"] = request.model;
    body["prompt"] = request.prompt;
    body["temperature"] = request.temperature;
    body["top_p"] = request.top_p;
    body["max_tokens"] = request.max_tokens;
    if (!request.stop.empty()) body["stop"] = request.stop;
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!options_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + options_.api_key);
    }

    std::string last_error;
    for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
        if (attempt > 0) {
            const double seconds = options_.initial_backoff_seconds * std::pow(2.0, attempt - 1);
            std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
        }
        rate_limit();
        httplib::Client client(origin);
        client.set_read_timeout(120, 0);
        client.set_connection_timeout(15, 0);
        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error = "connection error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403) {
            throw BackendError("authentication failure (HTTP " + std::to_string(res->status) +
                               "); set " + std::string(kApiKeyEnvVar));
        }
        if (res->status == 408 || res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            const std::string detail = res->body.substr(0, 300);
            if (to_lower(detail).find("context") != std::string::npos &&
                to_lower(detail).find("length") != std::string::npos) {
                throw BackendError("context length exceeded: " + detail);
            }
            throw BackendError("HTTP " + std::to_string(res->status) + ": " + detail);
        }
        try {
            const json j = json::parse(res->body);
            CompletionResponse response;
            response.text = j.at("choices").at(0).at("text").get<std::string>();
            if (j.contains("usage")) {
                response.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
                response.usage.completion_tokens = j["usage"].value("completion_tokens", 0);
            }
            response.backend_id = id();
            return response;
        } catch (const json::exception& e) {
            throw BackendError(std::string("malformed completion response: ") + e.what());
        }
    }
    throw BackendError("transport failure after " + std::to_string(options_.max_attempts) +
                       " attempts; last error: " + last_error);
}

std::shared_ptr<Backend> make_backend(const std::string& descriptor, const std::string& cache_dir,
                                      double rate_limit_rps) {
    std::shared_ptr<Backend> backend;
    if (descriptor == "oracle") {
        backend = std::make_shared<OracleMockBackend>();
    } else if (descriptor == "offbyone" || descriptor == "off-by-one") {
        backend = std::make_shared<OffByOneSiblingBackend>();
    } else if (descriptor.rfind("fixed:", 0) == 0) {
        backend = std::make_shared<FixedAnswerBackend>(descriptor.substr(6));
    } else if (descriptor.rfind("scripted:", 0) == 0) {
        backend = std::make_shared<ScriptedBackend>(
            ScriptedBackend::from_transcript(descriptor.substr(9)));
    } else if (descriptor.rfind("live:", 0) == 0) {
        HttpBackendOptions options;
        options.url = descriptor.substr(5);
        if (const char* key = std::getenv(kApiKeyEnvVar)) options.api_key = key;
        if (rate_limit_rps > 0) options.min_request_interval_seconds = 1.0 / rate_limit_rps;
        backend = std::make_shared<HttpBackend>(std::move(options));
    } else {
        throw ConfigError("unknown backend descriptor: " + descriptor +
                          " (expected oracle | offbyone | fixed:<text> | scripted:<file> | live:<url>)");
    }
    if (!cache_dir.empty()) {
        backend = std::make_shared<CachingBackend>(backend,
                                                   std::make_shared<ResponseCache>(cache_dir));
    }
    return backend;
}

}  // namespace statbench
