#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "t2s/analysis.hpp"
#include "t2s/llm.hpp"
#include "t2s/prompt.hpp"
#include "t2s/schema.hpp"
#include "t2s/selection.hpp"
#include "t2s/sqlexec.hpp"

namespace t2s::pipeline {

struct DatasetPaths {
    std::string examples_file;         // Spider-format training examples (the pool)
    std::string tests_file;            // instances to solve; may equal examples_file
    std::string tables_json;           // schema definitions
    std::string database_dir;          // <dir>/<db_id>/<db_id>.sqlite
};

struct TestInstance {
    std::string id;
    std::string db_id;
    std::string question;
    std::string gold_sql;  // empty when evaluating blind
};

struct IngestResult {
    std::vector<selection::Example> pool;
    std::vector<TestInstance> tests;
    std::map<std::string, schema::DatabaseSchema> schemas;  // by db_id
    size_t degraded_count = 0;
    std::vector<std::string> warnings;
};

/// Load examples + tests + schemas. Pool entries are vectorized and
/// categorized at load (degraded fallbacks flagged, never dropped). An
/// example referencing an unknown db_id raises SchemaError naming it.
/// tests_file may be empty (pool-only ingestion).
IngestResult ingest_dataset(const DatasetPaths& paths);

/// Produces the draft SQL used to categorize a test instance.
class DraftPredictor {
public:
    virtual ~DraftPredictor() = default;
    virtual std::string draft(const TestInstance& test, const prompt::SchemaContext& ctx) = 0;
    virtual std::string name() const = 0;
};

/// Uses the gold SQL as the draft (upper-bound preliminary model).
std::unique_ptr<DraftPredictor> make_gold_draft_predictor();

/// Drafts looked up from a JSON map {"<test id>": "<sql>", ...}.
std::unique_ptr<DraftPredictor> make_fixture_draft_predictor(const std::string& path);

/// Zero-shot code-seq prompt against the completion client.
std::unique_ptr<DraftPredictor> make_llm_draft_predictor(llm::CompletionClient& client,
                                                         std::string model_tag, int max_tokens,
                                                         std::vector<std::string> stop);

enum class Strategy { Random, Similarity, Diversity, SimilarityDiversity };

std::string to_string(Strategy s);
Strategy strategy_from_string(std::string_view s);

struct RunConfig {
    DatasetPaths paths;
    Strategy strategy = Strategy::SimilarityDiversity;
    prompt::Linearization linearization = prompt::Linearization::CodeSeq;
    prompt::Augmentation augmentation = prompt::Augmentation::None;
    int n_min = 4;
    int n_max = 10;  // a single-shot-count run sets n_min == n_max; 0 means zero-shot
    uint64_t seed = 0;
    std::string model_tag = "mock";
    int max_tokens = 256;
    std::vector<std::string> stop = {"\n\n/*", ";\n\n"};
    size_t context_limit = 4096;  // prompt + completion token budget
    int workers = 4;
    std::string descriptions_file;   // fixture column descriptions (semantic augmentation)
    std::string dump_prompts_dir;    // when set, every prompt is written here
    exec::ExecOptions exec_options;  // statement timeout
};

struct ShotRecord {
    int n = 0;
    std::vector<std::string> demo_ids;
    std::string prediction;
    bool exec_ok = false;
    std::string exec_error;
};

struct InstanceRecord {
    std::string id;
    std::string db_id;
    std::string question;
    std::string draft;
    std::string draft_category;
    bool draft_degraded = false;
    int shots_dropped = 0;
    std::vector<ShotRecord> shots;
    std::string winner;
    int winner_n = 0;
    std::string gold;
    std::string gold_category;
    std::optional<bool> match;
    std::string error;  // instance-level failure, run continues
};

struct RunReport {
    std::string strategy;
    std::string linearization;
    std::string augmentation;
    int n_min = 0;
    int n_max = 0;
    uint64_t seed = 0;
    std::string model_tag;
    std::string pool_hash;
    std::vector<InstanceRecord> instances;
    std::vector<std::string> warnings;  // ingest notices, augmentation downgrades
    double overall_accuracy = 0.0;
    std::map<std::string, exec::CategoryAccuracy> accuracy_by_category;
    size_t evaluated = 0;  // instances with gold available
    size_t failures = 0;   // instances with a recorded error

    std::string to_json() const;      // stable formatting, no wall-clock content
    std::string to_markdown() const;
};

/// Full integrated strategy: draft, categorize, build prompts for every shot
/// count in [n_min, n_max], complete, execute, filter errors, majority-vote.
/// Per-instance failures are recorded in the report and never abort the run.
/// Deterministic given (config, seed, cache contents).
RunReport run_integrated(const RunConfig& config, llm::CompletionClient& client,
                         DraftPredictor& draft_predictor);

/// One sampler at a fixed shot count (config.n_min), no voting. n_min == 0
/// gives the zero-shot baselines.
RunReport run_single_strategy(const RunConfig& config, llm::CompletionClient& client,
                              DraftPredictor& draft_predictor);

/// Strip a raw completion down to the predicted SQL string.
std::string clean_prediction(std::string_view completion);

// Artifact round-trips used by the CLI subcommands.
void save_pool(const std::string& path, const std::vector<selection::Example>& pool);
std::vector<selection::Example> load_pool(const std::string& path);

struct SelectionArtifact {
    std::string pool_hash;
    std::string vocab_version;
    uint64_t seed = 0;
    size_t k = 0;
    std::map<std::string, std::vector<std::string>> partition_representatives;  // by category
    std::vector<std::string> whole_pool_representatives;
};

SelectionArtifact build_selection_artifact(selection::DemoSelector& selector, size_t k,
                                           uint64_t seed);
void save_selection(const std::string& path, const SelectionArtifact& artifact);
SelectionArtifact load_selection(const std::string& path);

}  // namespace t2s::pipeline
