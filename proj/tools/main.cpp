#include <CLI11.hpp>

#include <iostream>

#include <nlohmann/json.hpp>

#include "statbench/eval.hpp"
#include "statbench/sara.hpp"
#include "statbench/usc_probe.hpp"

namespace sb = statbench;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitBackend = 4;

json manifest_json(const std::string& command, const std::vector<std::string>& argv,
                   std::uint64_t seed) {
    json m;
    m["tool"] = "statbench";
    m["version"] = kVersion;
    m["command"] = command;
    m["argv"] = argv;
    m["seed"] = seed;
    return m;
}

void write_manifest(const std::filesystem::path& path, const json& manifest) {
    sb::write_text_file_atomic(path, manifest.dump(2) + "\n");
}

int run(const std::vector<std::string>& args);

struct CommonBackendFlags {
    std::string backend = "oracle";
    std::string model = "mock";
    std::string cache_dir;
    int parallelism = 1;
    double rate_limit_rps = 0.0;
};

void add_backend_flags(CLI::App* cmd, CommonBackendFlags& flags) {
    cmd->add_option("--backend", flags.backend,
                    "oracle | offbyone | fixed:<text> | scripted:<file> | live:<url>");
    cmd->add_option("--model", flags.model, "model name sent with each request");
    cmd->add_option("--cache", flags.cache_dir, "directory for the persistent response cache");
    cmd->add_option("--parallelism", flags.parallelism, "max concurrent requests")
        ->check(CLI::Range(1, 256));
    cmd->add_option("--rate-limit", flags.rate_limit_rps,
                    "max requests per second for live backends (0 = unlimited)");
}

int cmd_gen(const std::vector<std::string>& argv, int width, int depth, const std::string& terms,
            int count, std::uint64_t seed, const std::string& out,
            const std::string& rendering) {
    sb::StatuteSpec spec;
    spec.width = width;
    spec.depth = depth;
    spec.term_mode = sb::term_mode_from_string(terms);
    spec.seed = seed;
    sb::Rng rng(seed);
    const auto items =
        sb::sample_batch(spec, count, rng, sb::rendering_from_string(rendering));
    sb::write_items_jsonl(out, items);
    write_manifest(out + ".manifest.json", manifest_json("gen", argv, seed));
    int positives = 0;
    for (const auto& item : items) positives += item.label.applicable ? 1 : 0;
    std::cout << "wrote " << items.size() << " items (" << positives << " positive) to " << out
              << "\n";
    return kExitOk;
}

int cmd_eval_synthetic(const std::vector<std::string>& argv, const std::string& items_path,
                       int shots, const std::string& rendering, const std::string& phrasing,
                       std::uint64_t seed, int max_tokens, const std::string& out_dir,
                       const CommonBackendFlags& flags) {
    const auto items = sb::read_items_jsonl(items_path);
    if (items.empty()) throw sb::DataError("no items in " + items_path);
    if (shots == 2) {
        if (items.front().tree.spec().term_mode != sb::TermMode::kNonce) {
            throw sb::ConfigError("two-shot evaluation requires nonce-term items");
        }
        if (!rendering.empty() && sb::rendering_from_string(rendering) != sb::RenderingKind::kStatute) {
            throw sb::ConfigError("two-shot evaluation requires the statute rendering");
        }
    }
    auto backend = sb::make_backend(flags.backend, flags.cache_dir, flags.rate_limit_rps);

    sb::SynthEvalOptions options;
    options.shots = shots;
    if (!rendering.empty()) options.rendering = sb::rendering_from_string(rendering);
    options.phrasing_id = phrasing;
    options.model = flags.model;
    options.max_tokens = max_tokens;
    options.seed = seed;
    options.parallelism = flags.parallelism;

    const auto records = sb::evaluate_synthetic(items, options, *backend);
    const std::filesystem::path out(out_dir);
    sb::write_records_jsonl(out / "records.jsonl", records);
    auto summary = sb::aggregate(records);
    summary.metadata = {{"items", items.size()},   {"shots", shots},
                        {"phrasing", phrasing},    {"backend", backend->id()},
                        {"model", flags.model},    {"seed", seed}};
    sb::write_text_file(out / "summary.txt", sb::render_table(summary));
    sb::write_text_file(out / "summary.csv", sb::render_csv(summary));
    sb::write_text_file(out / "summary.json", sb::summary_to_json(summary).dump(2) + "\n");
    write_manifest(out / "manifest.json", manifest_json("eval-synthetic", argv, seed));
    std::cout << sb::render_table(summary);
    return kExitOk;
}

int cmd_eval_sara(const std::vector<std::string>& argv, const std::string& data_dir,
                  const std::string& mode, const std::string& statute, bool step_by_step,
                  const std::string& cot_file, const std::string& out_dir,
                  const CommonBackendFlags& flags) {
    const auto data = sb::ingest_sara(data_dir);
    for (const auto& note : data.notes) std::cerr << "note: " << note << "\n";

    sb::SaraConfig config;
    config.mode = sb::sara_mode_from_string(mode);
    if (statute == "include") {
        config.include_statute = true;
    } else if (statute == "omit") {
        config.include_statute = false;
    } else {
        throw sb::ConfigError("--statute must be include or omit");
    }
    config.step_by_step = step_by_step;
    if (!cot_file.empty()) config.cot_asset = cot_file;

    auto backend = sb::make_backend(flags.backend, flags.cache_dir, flags.rate_limit_rps);
    auto result = sb::evaluate_sara(data, config, *backend, flags.model, flags.parallelism);

    const std::filesystem::path out(out_dir);
    sb::write_records_jsonl(out / "records.jsonl", result.records);
    sb::write_text_file(out / "summary.txt", sb::render_table(result.summary));
    sb::write_text_file(out / "summary.csv", sb::render_csv(result.summary));
    sb::write_text_file(out / "summary.json", sb::summary_to_json(result.summary).dump(2) + "\n");
    write_manifest(out / "manifest.json", manifest_json("eval-sara", argv, 0));
    std::cout << sb::render_table(result.summary);
    return kExitOk;
}

int cmd_probe_usc(const std::vector<std::string>& argv, const std::string& probe,
                  const std::string& corpus_path, int per_title, std::uint64_t seed, int min_words,
                  int max_words, int max_tokens, const std::string& out_dir,
                  const CommonBackendFlags& flags) {
    const auto corpus = sb::load_usc_corpus(corpus_path);
    sb::Rng rng(seed);
    std::vector<std::string> notes;
    const auto samples = sb::sample_sections(corpus, per_title, rng, min_words, max_words, &notes);
    for (const auto& note : notes) std::cerr << "note: " << note << "\n";

    auto backend = sb::make_backend(flags.backend, flags.cache_dir, flags.rate_limit_rps);
    const std::filesystem::path out(out_dir);
    std::vector<sb::EvalRecord> records(samples.size());

    if (probe == "identify") {
        sb::parallel_for(samples.size(), flags.parallelism, [&](std::size_t i) {
            const auto outcome = sb::identify_dialogue(samples[i], *backend, flags.model, max_tokens);
            records[i] = sb::identify_record(samples[i], outcome, static_cast<int>(i));
        });
        sb::write_records_jsonl(out / "records.jsonl", records);
        const auto table = sb::render_identify_table(sb::tally_outcomes(records));
        sb::write_text_file(out / "summary.txt", table);
        std::cout << table;
    } else if (probe == "recite") {
        std::map<int, std::vector<sb::UscSection>> by_title;
        for (const auto& section : corpus) by_title[section.title].push_back(section);
        sb::parallel_for(samples.size(), flags.parallelism, [&](std::size_t i) {
            const auto& section = samples[i];
            const std::string completion =
                sb::recite(section.title, section.section, *backend, flags.model, max_tokens);
            json record;
            record["kind"] = "usc_recite";
            record["index"] = static_cast<int>(i);
            record["title"] = section.title;
            record["section"] = section.section;
            record["stratum"] = "title " + std::to_string(section.title);
            record["completion"] = completion;
            record["unpenalized_bleu"] = sb::unpenalized_bleu(completion, section.body);
            const auto rank = sb::rank_metrics(completion, section.section, by_title.at(section.title));
            record["rank"] = rank.rank;
            record["normalized_rank"] = rank.normalized;
            record["section_count"] = rank.section_count;
            records[i] = std::move(record);
        });
        sb::write_records_jsonl(out / "records.jsonl", records);
        const auto table = sb::render_recitation_table(sb::recitation_stats(records));
        sb::write_text_file(out / "summary.txt", table);
        std::cout << table;
    } else {
        throw sb::ConfigError("probe must be identify or recite");
    }
    write_manifest(out / "manifest.json", manifest_json("probe", argv, seed));
    return kExitOk;
}

int cmd_report(const std::string& records_path, const std::string& format,
               const std::string& out_path) {
    const auto records = sb::read_records_jsonl(records_path);
    if (records.empty()) throw sb::DataError("no records in " + records_path);
    const std::string kind = records.front().value("kind", "synthetic");

    std::string rendered;
    if (kind == "usc_identify") {
        const auto tally = sb::tally_outcomes(records);
        if (format == "csv") {
            rendered = "class,count\nnot_usc," + std::to_string(tally.not_usc) + "\nwrong_title," +
                       std::to_string(tally.wrong_title) + "\nright_title_wrong_section," +
                       std::to_string(tally.right_title_wrong_section) + "\ncorrect," +
                       std::to_string(tally.correct) + "\n";
        } else if (format == "json") {
            rendered = json{{"not_usc", tally.not_usc},
                            {"wrong_title", tally.wrong_title},
                            {"right_title_wrong_section", tally.right_title_wrong_section},
                            {"correct", tally.correct},
                            {"numeric_predictions", tally.numeric_predictions},
                            {"off_by_one", tally.off_by_one},
                            {"off_by_nine_or_less", tally.off_by_nine_or_less}}
                           .dump(2) +
                       "\n";
        } else {
            rendered = sb::render_identify_table(tally);
        }
    } else if (kind == "usc_recite") {
        const auto stats = sb::recitation_stats(records);
        if (format == "json") {
            rendered = json{{"total", stats.total},
                            {"mean_bleu", stats.mean_bleu},
                            {"median_bleu", stats.median_bleu},
                            {"above_20", stats.above_20},
                            {"recall_at_1", stats.recall_at_1},
                            {"recall_at_5", stats.recall_at_5},
                            {"mean_normalized_rank", stats.mean_normalized_rank},
                            {"median_normalized_rank", stats.median_normalized_rank}}
                           .dump(2) +
                       "\n";
        } else {
            rendered = sb::render_recitation_table(stats);
        }
    } else {
        const auto summary = sb::aggregate(records);
        if (format == "csv") {
            rendered = sb::render_csv(summary);
        } else if (format == "json") {
            rendered = sb::summary_to_json(summary).dump(2) + "\n";
        } else {
            rendered = sb::render_table(summary);
        }
    }

    if (out_path.empty()) {
        std::cout << rendered;
    } else {
        sb::write_text_file(out_path, rendered);
    }
    return kExitOk;
}

int cmd_rerun(const std::string& manifest_path) {
    const json manifest = json::parse(sb::read_text_file(manifest_path));
    std::vector<std::string> argv;
    for (const auto& a : manifest.at("argv")) argv.push_back(a.get<std::string>());
    return run(argv);
}

int run(const std::vector<std::string>& args) {
    CLI::App app{"statbench: synthetic-statute benchmark generation and evaluation"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string data_dir_flag;
    app.add_option("--data-dir", data_dir_flag, "override the bundled data directory");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a balanced batch of test items");
    int width = 2, depth = 2, count = 10;
    std::uint64_t seed = 0;
    std::string terms = "nonce", gen_out = "items.jsonl", gen_rendering = "statute";
    gen->add_option("--width", width)->check(CLI::Range(2, 4));
    gen->add_option("--depth", depth)->check(CLI::Range(2, 5));
    gen->add_option("--terms", terms)->check(CLI::IsMember({"nonce", "ids"}));
    gen->add_option("--count", count, "batch size (must be even)");
    gen->add_option("--seed", seed);
    gen->add_option("--out", gen_out);
    gen->add_option("--rendering", gen_rendering)->check(CLI::IsMember({"statute", "sentence"}));

    // eval-synthetic
    auto* evs = app.add_subcommand("eval-synthetic", "run the prompting protocol over an items file");
    std::string items_path, evs_rendering, evs_phrasing = "P1", evs_out = "eval-out";
    int shots = 0, evs_max_tokens = 256;
    std::uint64_t evs_seed = 0;
    CommonBackendFlags evs_flags;
    evs->add_option("--items", items_path)->required();
    evs->add_option("--shots", shots)->check(CLI::IsMember({0, 2}));
    evs->add_option("--rendering", evs_rendering)->check(CLI::IsMember({"statute", "sentence"}));
    evs->add_option("--phrasing", evs_phrasing,
                    "question phrasing id P1..P7");
    evs->add_option("--seed", evs_seed, "seed for two-shot example sampling");
    evs->add_option("--max-tokens", evs_max_tokens);
    evs->add_option("--out", evs_out);
    add_backend_flags(evs, evs_flags);

    // eval-sara
    auto* sara = app.add_subcommand("eval-sara", "run a SARA prompting pipeline");
    std::string sara_data, sara_mode = "zero", sara_statute = "include", sara_cot, sara_out = "sara-out";
    bool step_by_step = false;
    CommonBackendFlags sara_flags;
    sara->add_option("--data", sara_data)->required();
    sara->add_option("--mode", sara_mode)->check(CLI::IsMember({"dynamic4", "zero", "cot10"}));
    sara->add_option("--statute", sara_statute)->check(CLI::IsMember({"include", "omit"}));
    sara->add_flag("--step-by-step", step_by_step, "append the step-by-step cue");
    sara->add_option("--cot-file", sara_cot, "override the bundled chain-of-thought examples");
    sara->add_option("--out", sara_out);
    add_backend_flags(sara, sara_flags);

    // probe usc identify|recite
    auto* probe = app.add_subcommand("probe", "probe a model's knowledge of a statutory corpus");
    auto* usc = probe->add_subcommand("usc", "U.S. Code probes");
    std::string probe_corpus, probe_out = "probe-out";
    int per_title = 10, min_words = 100, max_words = 1000, probe_max_tokens = 512;
    std::uint64_t probe_seed = 0;
    CommonBackendFlags probe_flags;
    std::string probe_kind;
    for (const char* kind : {"identify", "recite"}) {
        auto* sub = usc->add_subcommand(kind);
        sub->add_option("--corpus", probe_corpus)->required();
        sub->add_option("--per-title", per_title);
        sub->add_option("--seed", probe_seed);
        sub->add_option("--min-words", min_words);
        sub->add_option("--max-words", max_words);
        sub->add_option("--max-tokens", probe_max_tokens);
        sub->add_option("--out", probe_out);
        add_backend_flags(sub, probe_flags);
        sub->callback([&probe_kind, kind] { probe_kind = kind; });
    }
    usc->require_subcommand(1);
    probe->require_subcommand(1);

    // report
    auto* report = app.add_subcommand("report", "re-render summaries from a records file");
    std::string report_records, report_format = "table", report_out;
    report->add_option("--records", report_records)->required();
    report->add_option("--format", report_format)->check(CLI::IsMember({"table", "csv", "json"}));
    report->add_option("--out", report_out, "output file (default: stdout)");

    // rerun
    auto* rerun = app.add_subcommand("rerun", "re-execute a run from its manifest");
    std::string manifest_path;
    rerun->add_option("manifest", manifest_path)->required();

    std::vector<const char*> argv_c;
    argv_c.push_back("statbench");
    for (const auto& a : args) argv_c.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv_c.size()), argv_c.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (!data_dir_flag.empty()) sb::set_data_dir(data_dir_flag);

    if (gen->parsed()) {
        if (count <= 0 || count % 2 != 0) {
            throw sb::ConfigError("--count must be a positive even number (balanced batches)");
        }
        return cmd_gen(args, width, depth, terms, count, seed, gen_out, gen_rendering);
    }
    if (evs->parsed()) {
        return cmd_eval_synthetic(args, items_path, shots, evs_rendering, evs_phrasing, evs_seed,
                                  evs_max_tokens, evs_out, evs_flags);
    }
    if (sara->parsed()) {
        return cmd_eval_sara(args, sara_data, sara_mode, sara_statute, step_by_step, sara_cot,
                             sara_out, sara_flags);
    }
    if (probe->parsed()) {
        return cmd_probe_usc(args, probe_kind, probe_corpus, per_title, probe_seed, min_words,
                             max_words, probe_max_tokens, probe_out, probe_flags);
    }
    if (report->parsed()) {
        return cmd_report(report_records, report_format, report_out);
    }
    if (rerun->parsed()) {
        return cmd_rerun(manifest_path);
    }
    return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return run(args);
    } catch (const sb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const sb::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const sb::BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
