#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "statbench/promptkit.hpp"

namespace statbench {

struct CompletionRequest {
    std::string model;
    std::string prompt;
    double temperature = 0.0;  // decoding defaults pinned for reproducibility
    double top_p = 1.0;
    int max_tokens = 256;
    std::vector<std::string> stop;
};

struct TokenUsage {
    int prompt_tokens = 0;
    int completion_tokens = 0;

    int total() const { return prompt_tokens + completion_tokens; }
};

struct CompletionResponse {
    std::string text;  // raw continuation, untrimmed
    TokenUsage usage;
    std::string backend_id;
    bool cached = false;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
    virtual std::string id() const = 0;
};

/// Always returns the same text.
class FixedAnswerBackend : public Backend {
public:
    explicit FixedAnswerBackend(std::string text) : text_(std::move(text)) {}
    CompletionResponse complete(const CompletionRequest& request) override;
    std::string id() const override { return "fixed:" + text_; }

private:
    std::string text_;
};

/// Replays a recorded transcript: each prompt maps to its recorded completion.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::map<std::string, std::string> by_prompt)
        : by_prompt_(std::move(by_prompt)) {}
    static ScriptedBackend from_transcript(const std::filesystem::path& jsonl);
    CompletionResponse complete(const CompletionRequest& request) override;
    std::string id() const override { return "scripted"; }

private:
    std::map<std::string, std::string> by_prompt_;
};

/// Returns scripted responses in order, regardless of the prompt. Handy for
/// multi-stage dialogues in tests.
class SequenceBackend : public Backend {
public:
    explicit SequenceBackend(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}
    CompletionResponse complete(const CompletionRequest& request) override;
    std::string id() const override { return "sequence"; }

private:
    std::mutex mutex_;
    std::vector<std::string> responses_;
    std::size_t next_ = 0;
};

// --- Synthetic-prompt parsing shared by the reasoning mocks -------------------

/// What a mock backend can recover from a prompt built by the prompt kit:
/// the rendered statute or sentences, the fact, and the questioned provision.
struct SyntheticPromptView {
    ParsedRendering rendering;
    std::string person_name;
    std::string fact_term;
    std::variant<Citation, int> target;  // citation or sentence index
    bool extraction_stage = false;       // prompt ends with the yes/no extraction suffix
};

SyntheticPromptView parse_synthetic_prompt(const std::string& prompt);

/// Perfect reasoner: re-derives the ground truth from the prompt text and
/// answers with a templated explanation ending in the correct verdict.
class OracleMockBackend : public Backend {
public:
    CompletionResponse complete(const CompletionRequest& request) override;
    std::string id() const override { return "oracle-mock"; }
};

/// Flawed reasoner: resolves the questioned provision to its next sibling
/// (wrapping) and answers truthfully about that provision instead, quoting the
/// asked-about citation. Models the wrong-provision failure mode.
class OffByOneSiblingBackend : public Backend {
public:
    CompletionResponse complete(const CompletionRequest& request) override;
    std::string id() const override { return "off-by-one-sibling"; }
};

/// The provision the off-by-one backend actually answers about, given the
/// definitions visible in the rendering.
Citation sibling_provision(const std::vector<ParsedDefinition>& defs, const Citation& target);
int sibling_sentence(int sentence_index, int sentence_count);

// --- Persistent cache ----------------------------------------------------------

/// Content-addressed response store keyed by a hash of every request field.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    static std::string key(const CompletionRequest& request);

    std::optional<CompletionResponse> load(const CompletionRequest& request) const;
    void store(const CompletionRequest& request, const CompletionResponse& response);

private:
    std::filesystem::path entry_path(const std::string& key) const;

    std::filesystem::path dir_;
    mutable std::mutex write_mutex_;
};

/// Cache-first wrapper: hits return the stored response with cached=true.
class CachingBackend : public Backend {
public:
    CachingBackend(std::shared_ptr<Backend> inner, std::shared_ptr<ResponseCache> cache)
        : inner_(std::move(inner)), cache_(std::move(cache)) {}
    CompletionResponse complete(const CompletionRequest& request) override;
    std::string id() const override { return inner_->id(); }

private:
    std::shared_ptr<Backend> inner_;
    std::shared_ptr<ResponseCache> cache_;
};

// --- Live HTTP backend -----------------------------------------------------------

struct HttpBackendOptions {
    std::string url;       // full completion endpoint, e.g. https://host/v1/completions
    std::string api_key;   // empty = anonymous
    int max_attempts = 5;
    double initial_backoff_seconds = 0.5;
    double min_request_interval_seconds = 0.0;  // simple per-backend rate limit
};

/// Text-completion client over HTTP with retry/backoff on transient failures.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendOptions options);
    CompletionResponse complete(const CompletionRequest& request) override;
    std::string id() const override { return "http:" + options_.url; }

private:
    void rate_limit();

    HttpBackendOptions options_;
    std::mutex rate_mutex_;
    std::chrono::steady_clock::time_point last_dispatch_{};
};

/// Name of the environment variable read for the live backend's API key.
inline constexpr const char* kApiKeyEnvVar = "STATBENCH_API_KEY";

/// Builds a backend from a CLI descriptor:
///   oracle | offbyone | fixed:<text> | scripted:<transcript.jsonl> | live:<url>
/// Wraps it in a persistent cache when cache_dir is non-empty. A positive
/// rate limit (requests per second) throttles live backends.
std::shared_ptr<Backend> make_backend(const std::string& descriptor,
                                      const std::string& cache_dir = "",
                                      double rate_limit_rps = 0.0);

}  // namespace statbench
