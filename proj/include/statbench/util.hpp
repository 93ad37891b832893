#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace statbench {

// Failure classes; the CLI maps each to a distinct exit code.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : DataError {
    using DataError::DataError;
};
struct BackendError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Deterministic splitmix64 generator. All sampling goes through this class
/// (never std::uniform_* distributions) so that identical seeds give
/// identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();

    /// Unbiased integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    /// Uniform double in [0, 1) with 53 bits of precision.
    double real01();

    bool coin() { return below(2) == 1; }

    /// Child generator derived from the current state and a stream id.
    /// Does not advance this generator.
    Rng split(std::uint64_t stream) const;

    std::uint64_t state() const { return state_; }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        if (v.empty()) throw std::logic_error("Rng::pick on empty vector");
        return v[below(v.size())];
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::uint64_t state_;
};

std::string sha256_hex(std::string_view data);

// String helpers.
std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split_lines(std::string_view text);
std::vector<std::string> split_ws(std::string_view text);
std::string replace_all(std::string s, std::string_view from, std::string_view to);
bool is_ascii_digits(std::string_view s);

/// Lowercased maximal alphabetic runs, e.g. "Yes, it is." -> {"yes","it","is"}.
std::vector<std::string> word_tokens(std::string_view text);

int whitespace_token_count(std::string_view text);

// Filesystem helpers (throw DataError on failure).
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);
/// Write via a temp file + rename so readers never observe partial content.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Resolution order: explicit override (set_data_dir) > STATBENCH_DATA_DIR
/// env var > compiled-in default > ./data.
std::filesystem::path data_dir();
void set_data_dir(const std::filesystem::path& dir);

/// Runs fn(i) for i in [0, n) on up to `parallelism` threads. Exceptions are
/// captured and the first one is rethrown after all workers join.
void parallel_for(std::size_t n, int parallelism, const std::function<void(std::size_t)>& fn);

}  // namespace statbench
