#include "t2s/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "t2s/rng.hpp"

namespace t2s::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::Random: return "random";
        case Strategy::Similarity: return "similarity";
        case Strategy::Diversity: return "diversity";
        case Strategy::SimilarityDiversity: return "similarity_diversity";
    }
    return "similarity_diversity";
}

Strategy strategy_from_string(std::string_view s) {
    if (s == "random" || s == "r") return Strategy::Random;
    if (s == "similarity" || s == "s") return Strategy::Similarity;
    if (s == "diversity" || s == "d") return Strategy::Diversity;
    if (s == "similarity_diversity" || s == "sd") return Strategy::SimilarityDiversity;
    throw ConfigError("unknown strategy: " + std::string(s));
}

namespace {

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
}

std::string padded_id(const std::string& prefix, size_t index) {
    std::ostringstream out;
    out << prefix << '_' << std::setw(4) << std::setfill('0') << index;
    return out.str();
}

}  // namespace

IngestResult ingest_dataset(const DatasetPaths& paths) {
    IngestResult result;

    for (auto& schema : schema::load_schemas_from_tables_json(paths.tables_json))
        result.schemas.emplace(schema.db_id, std::move(schema));

    const auto& vocab = syntax::SyntaxVocabulary::v1();
    json pool_json = read_json_file(paths.examples_file);
    if (!pool_json.is_array()) throw ConfigError("examples file must hold a JSON array");
    size_t index = 0;
    for (const auto& item : pool_json) {
        std::string id = item.value("id", padded_id("train", index));
        std::string db_id = item.value("db_id", "");
        std::string question = item.value("question", "");
        std::string gold = item.contains("query") ? item.value("query", "")
                                                  : item.value("sql", "");
        if (!result.schemas.count(db_id))
            throw SchemaError("example " + id + " references unknown db_id '" + db_id + "'");
        auto example = selection::make_example(std::move(id), std::move(question),
                                               std::move(gold), std::move(db_id), vocab);
        if (example.degraded) {
            result.degraded_count++;
            result.warnings.push_back("example " + example.id +
                                      " vectorized in degraded mode (unparseable gold SQL)");
        }
        result.pool.push_back(std::move(example));
        ++index;
    }

    if (!paths.tests_file.empty()) {
        json tests_json = read_json_file(paths.tests_file);
        if (!tests_json.is_array()) throw ConfigError("tests file must hold a JSON array");
        size_t test_index = 0;
        for (const auto& item : tests_json) {
            TestInstance test;
            test.id = item.value("id", padded_id("test", test_index));
            test.db_id = item.value("db_id", "");
            test.question = item.value("question", "");
            test.gold_sql = item.contains("query") ? item.value("query", "")
                                                   : item.value("sql", "");
            if (!result.schemas.count(test.db_id))
                throw SchemaError("test " + test.id + " references unknown db_id '" +
                                  test.db_id + "'");
            result.tests.push_back(std::move(test));
            ++test_index;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Draft predictors
// ---------------------------------------------------------------------------

namespace {

class GoldDraft final : public DraftPredictor {
public:
    std::string draft(const TestInstance& test, const prompt::SchemaContext&) override {
        return test.gold_sql;
    }
    std::string name() const override { return "gold"; }
};

class FixtureDraft final : public DraftPredictor {
public:
    explicit FixtureDraft(const std::string& path) {
        json j = read_json_file(path);
        for (auto& [id, sql] : j.items()) drafts_[id] = sql.get<std::string>();
    }
    std::string draft(const TestInstance& test, const prompt::SchemaContext&) override {
        auto it = drafts_.find(test.id);
        if (it == drafts_.end()) throw ConfigError("no fixture draft for test " + test.id);
        return it->second;
    }
    std::string name() const override { return "fixture"; }

private:
    std::map<std::string, std::string> drafts_;
};

class LlmDraft final : public DraftPredictor {
public:
    LlmDraft(llm::CompletionClient& client, std::string model_tag, int max_tokens,
             std::vector<std::string> stop)
        : client_(client),
          model_tag_(std::move(model_tag)),
          max_tokens_(max_tokens),
          stop_(std::move(stop)) {}

    std::string draft(const TestInstance& test, const prompt::SchemaContext& ctx) override {
        prompt::PromptConfig config;  // zero-shot, code-seq, no augmentation
        prompt::SchemaContext bare{ctx.db, nullptr, nullptr};
        llm::CompletionRequest request;
        request.model_tag = model_tag_;
        request.prompt = prompt::render_test_block(test.question, bare, config);
        request.max_tokens = max_tokens_;
        request.temperature = 0.0;
        request.stop = stop_;
        return clean_prediction(client_.complete(request).text);
    }
    std::string name() const override { return "zero-shot-llm"; }

private:
    llm::CompletionClient& client_;
    std::string model_tag_;
    int max_tokens_;
    std::vector<std::string> stop_;
};

}  // namespace

std::unique_ptr<DraftPredictor> make_gold_draft_predictor() {
    return std::make_unique<GoldDraft>();
}
std::unique_ptr<DraftPredictor> make_fixture_draft_predictor(const std::string& path) {
    return std::make_unique<FixtureDraft>(path);
}
std::unique_ptr<DraftPredictor> make_llm_draft_predictor(llm::CompletionClient& client,
                                                         std::string model_tag, int max_tokens,
                                                         std::vector<std::string> stop) {
    return std::make_unique<LlmDraft>(client, std::move(model_tag), max_tokens, std::move(stop));
}

std::string clean_prediction(std::string_view completion) {
    std::string s(completion);
    size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    s = s.substr(begin);
    if (size_t pos = s.find("\n\n/*"); pos != std::string::npos) s = s.substr(0, pos);
    if (size_t pos = s.find(";\n\n"); pos != std::string::npos) s = s.substr(0, pos + 1);
    size_t end = s.find_last_not_of(" \t\r\n");
    return s.substr(0, end + 1);
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

namespace {

struct RunContext {
    const RunConfig* config = nullptr;
    prompt::Augmentation augmentation = prompt::Augmentation::None;
    selection::DemoSelector* selector = nullptr;
    const std::map<std::string, schema::DatabaseSchema>* schemas = nullptr;
    std::map<std::string, schema::ColumnDescriptions> descriptions;
    std::map<std::string, schema::OntologySummary> ontologies;
    selection::HashedTfEncoder encoder;
    std::vector<const selection::Example*> shared_demos;  // random/diversity runs
};

prompt::SchemaContext make_context(const RunContext& ctx, const std::string& db_id) {
    auto it = ctx.schemas->find(db_id);
    if (it == ctx.schemas->end()) throw SchemaError("unknown db_id: " + db_id);
    prompt::SchemaContext out;
    out.db = &it->second;
    if (auto d = ctx.descriptions.find(db_id); d != ctx.descriptions.end())
        out.descriptions = &d->second;
    if (auto o = ctx.ontologies.find(db_id); o != ctx.ontologies.end())
        out.ontology = &o->second;
    return out;
}

// Build the prompt for one shot count, dropping the earliest demonstrations
// when the context budget overflows. Returns the dropped count.
int build_with_budget(const RunContext& ctx, std::vector<const selection::Example*> demos,
                      const TestInstance& test, prompt::PromptConfig pconfig,
                      prompt::Prompt& out) {
    const RunConfig& config = *ctx.config;
    size_t budget = config.context_limit > size_t(config.max_tokens)
                        ? config.context_limit - size_t(config.max_tokens)
                        : 1;
    auto provider = [&](const std::string& db_id) { return make_context(ctx, db_id); };
    int dropped = 0;
    while (true) {
        pconfig.n_shots = int(demos.size());
        try {
            out = prompt::build_prompt(demos, test.question, test.db_id, provider, pconfig,
                                       budget);
            return dropped;
        } catch (const ContextOverflowError&) {
            if (demos.empty()) throw;
            demos.erase(demos.begin());
            ++dropped;
        }
    }
}

void dump_prompt(const RunConfig& config, const TestInstance& test, int n,
                 const std::string& text) {
    if (config.dump_prompts_dir.empty()) return;
    fs::create_directories(config.dump_prompts_dir);
    std::string name = test.id + (n >= 0 ? "_n" + std::to_string(n) : "") + ".prompt.txt";
    write_text_file((fs::path(config.dump_prompts_dir) / name).string(), text);
}

InstanceRecord process_instance(const RunContext& ctx, const TestInstance& test,
                                llm::CompletionClient& client, DraftPredictor& draft_predictor,
                                bool integrated) {
    const RunConfig& config = *ctx.config;
    InstanceRecord record;
    record.id = test.id;
    record.db_id = test.db_id;
    record.question = test.question;
    record.gold = test.gold_sql;
    if (!test.gold_sql.empty())
        record.gold_category =
            syntax::to_string(syntax::get_category_or_extra(test.gold_sql));

    try {
        prompt::PromptConfig pconfig;
        pconfig.linearization = config.linearization;
        pconfig.augmentation = ctx.augmentation;

        const int n_lo = config.n_min;
        const int n_hi = integrated ? config.n_max : config.n_min;
        const bool needs_draft =
            integrated || config.strategy == Strategy::SimilarityDiversity;
        if (needs_draft && n_hi > 0) {
            record.draft = draft_predictor.draft(test, make_context(ctx, test.db_id));
            bool degraded = false;
            record.draft_category =
                syntax::to_string(syntax::get_category_or_extra(record.draft, &degraded));
            record.draft_degraded = degraded;
        }
        std::vector<exec::VoteEntry> bundle;
        for (int n = n_lo; n <= n_hi; ++n) {
            std::vector<const selection::Example*> demos;
            if (n > 0) {
                switch (config.strategy) {
                    case Strategy::Random:
                    case Strategy::Diversity:
                        demos = ctx.shared_demos;
                        demos.resize(std::min(demos.size(), size_t(n)));
                        break;
                    case Strategy::Similarity:
                        demos = ctx.selector->select_similar(test.question, size_t(n),
                                                             ctx.encoder);
                        break;
                    case Strategy::SimilarityDiversity:
                        demos = ctx.selector->select_similarity_diversity(
                            record.draft, size_t(config.n_max), config.seed);
                        demos.resize(std::min(demos.size(), size_t(n)));
                        break;
                }
            }
            prompt::Prompt built;
            record.shots_dropped += build_with_budget(ctx, demos, test, pconfig, built);
            dump_prompt(config, test, integrated || n_lo != n_hi ? n : -1, built.text);

            llm::CompletionRequest request;
            request.model_tag = config.model_tag;
            request.prompt = built.text;
            request.max_tokens = config.max_tokens;
            request.temperature = 0.0;
            request.stop = config.stop;
            std::string prediction = clean_prediction(client.complete(request).text);

            ShotRecord shot;
            shot.n = n;
            shot.demo_ids = built.demo_ids;
            shot.prediction = prediction;
            record.shots.push_back(std::move(shot));
            bundle.push_back({n, prediction});
        }

        const std::string db_path =
            exec::spider_db_path(config.paths.database_dir, test.db_id);
        exec::VoteTally tally = exec::majority_vote(bundle, db_path, config.exec_options);
        for (size_t i = 0; i < record.shots.size(); ++i) {
            record.shots[i].exec_ok = tally.outcomes[i].ok;
            record.shots[i].exec_error = tally.outcomes[i].error;
        }
        record.winner = bundle[tally.winner_index].prediction;
        record.winner_n = bundle[tally.winner_index].n;

        if (!test.gold_sql.empty()) {
            exec::ExecutionOutcome winner_outcome =
                exec::execute_sql(db_path, record.winner, config.exec_options);
            exec::ExecutionOutcome gold_outcome =
                exec::execute_sql(db_path, test.gold_sql, config.exec_options);
            record.match = exec::results_match(winner_outcome, gold_outcome);
        }
    } catch (const std::exception& e) {
        record.error = e.what();
    }
    return record;
}

RunReport run_common(const RunConfig& config, llm::CompletionClient& client,
                     DraftPredictor& draft_predictor, bool integrated) {
    if (config.n_min < 0 || config.n_min > config.n_max)
        throw ConfigError("invalid shot range");

    IngestResult data = ingest_dataset(config.paths);

    selection::DemoSelector selector(std::move(data.pool));
    RunContext ctx;
    ctx.config = &config;
    ctx.augmentation = config.augmentation;
    ctx.selector = &selector;
    ctx.schemas = &data.schemas;

    // one-time preparation so worker threads only read
    if (config.n_max > 0) {
        switch (config.strategy) {
            case Strategy::SimilarityDiversity:
                selector.prepare_partitions(size_t(config.n_max), config.seed);
                break;
            case Strategy::Diversity:
                ctx.shared_demos = selector.select_diverse(size_t(config.n_max), config.seed);
                break;
            case Strategy::Random:
                ctx.shared_demos = selector.select_random(size_t(config.n_max), config.seed);
                break;
            case Strategy::Similarity:
                if (!data.tests.empty())
                    selector.select_similar(data.tests.front().question, 1, ctx.encoder);
                break;
        }
    }
    if (config.augmentation == prompt::Augmentation::StructuralOntology) {
        for (const auto& [db_id, db] : data.schemas)
            ctx.ontologies.emplace(db_id, schema::build_ontology_summary(db));
    } else if (config.augmentation == prompt::Augmentation::SemanticInline ||
               config.augmentation == prompt::Augmentation::SemanticBlock) {
        try {
            for (const auto& [db_id, db] : data.schemas) {
                if (!config.descriptions_file.empty()) {
                    ctx.descriptions.emplace(
                        db_id,
                        schema::descriptions_from_json_file(config.descriptions_file, db_id));
                } else {
                    ctx.descriptions.emplace(
                        db_id,
                        schema::generate_column_descriptions(db, client, config.model_tag));
                }
            }
        } catch (const LlmUnavailable& e) {
            // run unaugmented rather than abort; the report says so
            ctx.augmentation = prompt::Augmentation::None;
            ctx.descriptions.clear();
            data.warnings.push_back(
                std::string("semantic augmentation disabled, descriptions unavailable: ") +
                e.what());
        }
    }

    RunReport report;
    report.strategy = to_string(config.strategy);
    report.linearization = prompt::to_string(config.linearization);
    report.augmentation = prompt::to_string(config.augmentation);
    report.n_min = config.n_min;
    report.n_max = integrated ? config.n_max : config.n_min;
    report.seed = config.seed;
    report.model_tag = config.model_tag;
    report.augmentation = prompt::to_string(ctx.augmentation);
    report.pool_hash = selector.pool_hash();
    report.warnings = data.warnings;
    report.instances.resize(data.tests.size());

    const size_t worker_count =
        std::max<size_t>(1, std::min<size_t>(size_t(std::max(1, config.workers)),
                                             data.tests.size() ? data.tests.size() : 1));
    std::atomic<size_t> next{0};
    auto work = [&] {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= data.tests.size()) break;
            report.instances[i] =
                process_instance(ctx, data.tests[i], client, draft_predictor, integrated);
        }
    };
    if (worker_count <= 1) {
        work();
    } else {
        std::vector<std::thread> workers;
        for (size_t w = 0; w < worker_count; ++w) workers.emplace_back(work);
        for (auto& t : workers) t.join();
    }

    size_t matched = 0;
    for (const auto& record : report.instances) {
        if (!record.error.empty()) report.failures++;
        if (record.match.has_value()) {
            report.evaluated++;
            auto& bucket = report.accuracy_by_category[record.gold_category];
            bucket.total++;
            if (*record.match) {
                bucket.matched++;
                ++matched;
            }
        }
    }
    report.overall_accuracy =
        report.evaluated == 0 ? 0.0 : double(matched) / double(report.evaluated);
    return report;
}

}  // namespace

RunReport run_integrated(const RunConfig& config, llm::CompletionClient& client,
                         DraftPredictor& draft_predictor) {
    return run_common(config, client, draft_predictor, true);
}

RunReport run_single_strategy(const RunConfig& config, llm::CompletionClient& client,
                              DraftPredictor& draft_predictor) {
    return run_common(config, client, draft_predictor, false);
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

std::string RunReport::to_json() const {
    json j;
    j["config"] = {{"strategy", strategy},    {"linearization", linearization},
                   {"augmentation", augmentation}, {"n_min", n_min},
                   {"n_max", n_max},          {"seed", seed},
                   {"model", model_tag}};
    j["pool_hash"] = pool_hash;
    json arr = json::array();
    for (const auto& record : instances) {
        json ji;
        ji["id"] = record.id;
        ji["db_id"] = record.db_id;
        ji["question"] = record.question;
        if (!record.draft.empty()) {
            ji["draft"] = record.draft;
            ji["draft_category"] = record.draft_category;
            if (record.draft_degraded) ji["draft_degraded"] = true;
        }
        if (record.shots_dropped > 0) ji["shots_dropped"] = record.shots_dropped;
        json shots = json::array();
        for (const auto& shot : record.shots) {
            json js = {{"n", shot.n},
                       {"demo_ids", shot.demo_ids},
                       {"prediction", shot.prediction},
                       {"exec_ok", shot.exec_ok}};
            if (!shot.exec_ok) js["exec_error"] = shot.exec_error;
            shots.push_back(std::move(js));
        }
        ji["shots"] = std::move(shots);
        ji["winner"] = record.winner;
        ji["winner_n"] = record.winner_n;
        if (!record.gold.empty()) {
            ji["gold"] = record.gold;
            ji["gold_category"] = record.gold_category;
        }
        if (record.match.has_value()) ji["match"] = *record.match;
        if (!record.error.empty()) ji["error"] = record.error;
        arr.push_back(std::move(ji));
    }
    j["instances"] = std::move(arr);
    if (!warnings.empty()) j["warnings"] = warnings;
    json by_cat = json::object();
    for (const auto& [category, bucket] : accuracy_by_category)
        by_cat[category] = {{"total", bucket.total},
                            {"matched", bucket.matched},
                            {"accuracy", bucket.accuracy()}};
    j["accuracy"] = {{"overall", overall_accuracy},
                     {"evaluated", evaluated},
                     {"by_category", std::move(by_cat)}};
    j["failures"] = failures;
    return j.dump(2) + "\n";
}

std::string RunReport::to_markdown() const {
    std::ostringstream out;
    out << "# Run report\n\n";
    out << "| setting | value |\n|---|---|\n";
    out << "| strategy | " << strategy << " |\n";
    out << "| linearization | " << linearization << " |\n";
    out << "| augmentation | " << augmentation << " |\n";
    out << "| shots | " << n_min << ".." << n_max << " |\n";
    out << "| seed | " << seed << " |\n";
    out << "| model | " << model_tag << " |\n";
    out << "| pool hash | " << pool_hash << " |\n";
    out << "\n## Execution accuracy\n\n";
    out.setf(std::ios::fixed);
    out.precision(4);
    out << "overall: " << overall_accuracy << " over " << evaluated << " instances\n\n";
    if (!accuracy_by_category.empty()) {
        out << "| difficulty | total | matched | accuracy |\n|---|---|---|---|\n";
        for (const auto& [category, bucket] : accuracy_by_category)
            out << "| " << category << " | " << bucket.total << " | " << bucket.matched
                << " | " << bucket.accuracy() << " |\n";
        out << "\n";
    }
    if (failures > 0) out << failures << " instance(s) recorded errors.\n";
    for (const auto& warning : warnings) out << "warning: " << warning << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

void save_pool(const std::string& path, const std::vector<selection::Example>& pool) {
    json j;
    j["vocab_version"] = syntax::SyntaxVocabulary::v1().version();
    json arr = json::array();
    for (const auto& example : pool) {
        arr.push_back({{"id", example.id},
                       {"db_id", example.db_id},
                       {"question", example.question},
                       {"query", example.gold_sql},
                       {"category", syntax::to_string(example.category)},
                       {"degraded", example.degraded},
                       {"vector", example.vector.values}});
    }
    j["examples"] = std::move(arr);
    write_text_file(path, j.dump(2) + "\n");
}

std::vector<selection::Example> load_pool(const std::string& path) {
    json j = read_json_file(path);
    const auto& vocab = syntax::SyntaxVocabulary::v1();
    std::vector<selection::Example> pool;
    for (const auto& item : j.at("examples")) {
        // derived fields are recomputed so they always agree with the SQL
        pool.push_back(selection::make_example(item.at("id"), item.at("question"),
                                               item.at("query"), item.at("db_id"), vocab));
    }
    return pool;
}

SelectionArtifact build_selection_artifact(selection::DemoSelector& selector, size_t k,
                                           uint64_t seed) {
    SelectionArtifact artifact;
    artifact.pool_hash = selector.pool_hash();
    artifact.vocab_version = syntax::SyntaxVocabulary::v1().version();
    artifact.seed = seed;
    artifact.k = k;
    for (const auto& partition : selector.prepare_partitions(k, seed)) {
        std::vector<std::string> ids;
        for (const auto* example : partition.representatives) ids.push_back(example->id);
        artifact.partition_representatives[syntax::to_string(partition.category)] =
            std::move(ids);
    }
    for (const auto* example : selector.prepare_whole_pool(k, seed).representatives)
        artifact.whole_pool_representatives.push_back(example->id);
    return artifact;
}

void save_selection(const std::string& path, const SelectionArtifact& artifact) {
    json j = {{"pool_hash", artifact.pool_hash},
              {"vocab_version", artifact.vocab_version},
              {"seed", artifact.seed},
              {"k", artifact.k},
              {"partitions", artifact.partition_representatives},
              {"whole_pool", artifact.whole_pool_representatives}};
    write_text_file(path, j.dump(2) + "\n");
}

SelectionArtifact load_selection(const std::string& path) {
    json j = read_json_file(path);
    SelectionArtifact artifact;
    artifact.pool_hash = j.at("pool_hash");
    artifact.vocab_version = j.at("vocab_version");
    artifact.seed = j.at("seed");
    artifact.k = j.at("k");
    for (auto& [category, ids] : j.at("partitions").items())
        artifact.partition_representatives[category] = ids.get<std::vector<std::string>>();
    artifact.whole_pool_representatives =
        j.at("whole_pool").get<std::vector<std::string>>();
    return artifact;
}

}  // namespace t2s::pipeline
