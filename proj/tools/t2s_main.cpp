// t2s: experiment runner for syntax-aware demonstration selection, schema
// augmentation, and execution-vote prediction on Text-to-SQL datasets.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "t2s/analysis.hpp"
#include "t2s/llm.hpp"
#include "t2s/pipeline.hpp"
#include "t2s/prompt.hpp"
#include "t2s/schema.hpp"
#include "t2s/selection.hpp"
#include "t2s/sqlexec.hpp"

using namespace t2s;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct ShotRange {
    int lo = 4;
    int hi = 10;
};

ShotRange parse_shots(const std::string& text) {
    ShotRange range;
    auto dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            range.lo = range.hi = std::stoi(text);
        } else {
            range.lo = std::stoi(text.substr(0, dots));
            range.hi = std::stoi(text.substr(dots + 2));
        }
    } catch (const std::exception&) {
        throw ConfigError("bad --shots value: " + text);
    }
    if (range.lo < 0 || range.lo > range.hi)
        throw ConfigError("bad --shots range: " + text);
    return range;
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    json j;
    in >> j;
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    if (auto parent = fs::path(path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

// Endpoint/mock/cache flags shared by predict and run.
struct ClientFlags {
    std::string model = "mock";
    std::string mock_fixtures;
    std::string cache_path;
    std::string endpoint;
    std::string endpoint_path = "/v1/completions";
    std::string api_key_env = "T2S_API_KEY";
    int max_tokens = 256;

    void attach(CLI::App* cmd) {
        cmd->add_option("--model", model, "model tag recorded in requests");
        cmd->add_option("--mock", mock_fixtures, "mock fixture JSON; offline client");
        cmd->add_option("--cache", cache_path, "response cache file (JSON lines)");
        cmd->add_option("--endpoint", endpoint, "completions endpoint base URL");
        cmd->add_option("--endpoint-path", endpoint_path, "completions endpoint path");
        cmd->add_option("--api-key-env", api_key_env, "env var holding the API key");
        cmd->add_option("--max-tokens", max_tokens, "completion token budget");
    }
};

struct ClientStack {
    std::unique_ptr<llm::CompletionClient> base;
    std::unique_ptr<llm::CachingCompletionClient> cached;
    llm::CompletionClient* active = nullptr;
};

ClientStack make_client(const ClientFlags& flags) {
    ClientStack stack;
    if (!flags.mock_fixtures.empty()) {
        auto mock = std::make_unique<llm::MockCompletionClient>();
        mock->load_fixture_file(flags.mock_fixtures);
        stack.base = std::move(mock);
    } else if (!flags.endpoint.empty()) {
        llm::HttpClientConfig config;
        config.base_url = flags.endpoint;
        config.path = flags.endpoint_path;
        config.api_key_env = flags.api_key_env;
        stack.base = std::make_unique<llm::HttpCompletionClient>(config);
    } else {
        throw ConfigError("either --mock FIXTURES or --endpoint URL is required");
    }
    stack.active = stack.base.get();
    if (!flags.cache_path.empty()) {
        stack.cached =
            std::make_unique<llm::CachingCompletionClient>(*stack.base, flags.cache_path);
        stack.active = stack.cached.get();
    }
    return stack;
}

std::vector<selection::Example> load_pool_file(const std::string& path) {
    // accepts both the pool artifact and raw Spider-format example arrays
    json j = read_json(path);
    if (j.is_object() && j.contains("examples")) return pipeline::load_pool(path);
    const auto& vocab = syntax::SyntaxVocabulary::v1();
    std::vector<selection::Example> pool;
    size_t i = 0;
    for (const auto& item : j) {
        char fallback[16];
        std::snprintf(fallback, sizeof fallback, "train_%04zu", i++);
        pool.push_back(selection::make_example(
            item.value("id", std::string(fallback)), item.value("question", ""),
            item.contains("query") ? item.value("query", "") : item.value("sql", ""),
            item.value("db_id", ""), vocab));
    }
    return pool;
}

std::vector<pipeline::TestInstance> load_tests_file(const std::string& path) {
    json j = read_json(path);
    std::vector<pipeline::TestInstance> tests;
    size_t i = 0;
    for (const auto& item : j) {
        pipeline::TestInstance test;
        char fallback[16];
        std::snprintf(fallback, sizeof fallback, "test_%04zu", i++);
        test.id = item.value("id", std::string(fallback));
        test.db_id = item.value("db_id", "");
        test.question = item.value("question", "");
        test.gold_sql = item.contains("query") ? item.value("query", "")
                                               : item.value("sql", "");
        tests.push_back(std::move(test));
    }
    return tests;
}

int cmd_ingest(const std::string& train, const std::string& tables, const std::string& tests,
               const std::string& out) {
    pipeline::DatasetPaths paths;
    paths.examples_file = train;
    paths.tables_json = tables;
    paths.tests_file = tests;
    auto data = pipeline::ingest_dataset(paths);
    pipeline::save_pool(out, data.pool);
    std::map<std::string, size_t> by_category;
    for (const auto& example : data.pool)
        by_category[syntax::to_string(example.category)]++;
    std::cout << "pool: " << data.pool.size() << " examples";
    for (const auto& [category, count] : by_category)
        std::cout << ", " << category << "=" << count;
    std::cout << "\ndegraded: " << data.degraded_count << "\n";
    if (!tests.empty()) std::cout << "tests: " << data.tests.size() << "\n";
    std::cout << "pool artifact written to " << out << "\n";
    return 0;
}

int cmd_select(const std::string& pool_path, size_t k, uint64_t seed,
               const std::string& out) {
    auto pool = load_pool_file(pool_path);
    selection::DemoSelector selector(std::move(pool));
    auto artifact = pipeline::build_selection_artifact(selector, k, seed);
    pipeline::save_selection(out, artifact);
    std::cout << "pool hash " << artifact.pool_hash << "\n";
    for (const auto& [category, ids] : artifact.partition_representatives)
        std::cout << category << ": " << ids.size() << " representatives\n";
    std::cout << "selection artifact written to " << out << "\n";
    return 0;
}

struct PromptFlags {
    std::string pool, tests, tables, selection, descriptions;
    std::string strategy = "sd";
    std::string linearize = "code";
    std::string augment = "none";
    std::string draft_mode = "gold";
    std::string draft_file;
    int shots = 4;
    uint64_t seed = 0;
    std::string dump_dir;
    std::string out = "prompts.json";
};

int cmd_build_prompts(const PromptFlags& flags) {
    auto pool = load_pool_file(flags.pool);
    auto tests = load_tests_file(flags.tests);
    std::map<std::string, schema::DatabaseSchema> schemas;
    for (auto& s : schema::load_schemas_from_tables_json(flags.tables))
        schemas.emplace(s.db_id, std::move(s));

    selection::DemoSelector selector(std::move(pool));
    if (!flags.selection.empty()) {
        auto artifact = pipeline::load_selection(flags.selection);
        if (artifact.pool_hash != selector.pool_hash())
            throw ConfigError("selection artifact pool hash does not match the pool file");
        auto rebuilt = pipeline::build_selection_artifact(selector, artifact.k, artifact.seed);
        if (rebuilt.partition_representatives != artifact.partition_representatives)
            throw ConfigError("selection artifact representatives are stale");
    }

    prompt::PromptConfig pconfig;
    pconfig.linearization = prompt::linearization_from_string(flags.linearize);
    pconfig.augmentation = prompt::augmentation_from_string(flags.augment);

    std::map<std::string, schema::ColumnDescriptions> descriptions;
    std::map<std::string, schema::OntologySummary> ontologies;
    if (pconfig.augmentation == prompt::Augmentation::StructuralOntology)
        for (const auto& [db_id, db] : schemas)
            ontologies.emplace(db_id, schema::build_ontology_summary(db));
    if (pconfig.augmentation == prompt::Augmentation::SemanticInline ||
        pconfig.augmentation == prompt::Augmentation::SemanticBlock) {
        if (flags.descriptions.empty())
            throw ConfigError("semantic augmentation needs --descriptions FILE");
        for (const auto& [db_id, db] : schemas)
            descriptions.emplace(
                db_id, schema::descriptions_from_json_file(flags.descriptions, db_id));
    }
    auto provider = [&](const std::string& db_id) {
        auto it = schemas.find(db_id);
        if (it == schemas.end()) throw SchemaError("unknown db_id: " + db_id);
        prompt::SchemaContext ctx;
        ctx.db = &it->second;
        if (auto d = descriptions.find(db_id); d != descriptions.end())
            ctx.descriptions = &d->second;
        if (auto o = ontologies.find(db_id); o != ontologies.end()) ctx.ontology = &o->second;
        return ctx;
    };

    std::unique_ptr<pipeline::DraftPredictor> draft;
    if (flags.draft_mode == "gold") draft = pipeline::make_gold_draft_predictor();
    else if (flags.draft_mode == "file")
        draft = pipeline::make_fixture_draft_predictor(flags.draft_file);
    else
        throw ConfigError("build-prompts supports --draft gold|file");

    auto strategy = pipeline::strategy_from_string(flags.strategy);
    selection::HashedTfEncoder encoder;
    std::vector<const selection::Example*> shared;
    if (flags.shots > 0 &&
        (strategy == pipeline::Strategy::Random || strategy == pipeline::Strategy::Diversity))
        shared = strategy == pipeline::Strategy::Random
                     ? selector.select_random(size_t(flags.shots), flags.seed)
                     : selector.select_diverse(size_t(flags.shots), flags.seed);

    json out_prompts = json::array();
    for (const auto& test : tests) {
        std::vector<const selection::Example*> demos;
        std::string draft_sql, category;
        if (flags.shots > 0) {
            switch (strategy) {
                case pipeline::Strategy::Random:
                case pipeline::Strategy::Diversity:
                    demos = shared;
                    break;
                case pipeline::Strategy::Similarity:
                    demos = selector.select_similar(test.question, size_t(flags.shots),
                                                    encoder);
                    break;
                case pipeline::Strategy::SimilarityDiversity:
                    draft_sql = draft->draft(test, provider(test.db_id));
                    category = syntax::to_string(syntax::get_category_or_extra(draft_sql));
                    demos = selector.select_similarity_diversity(
                        draft_sql, size_t(flags.shots), flags.seed);
                    break;
            }
            if (demos.size() > size_t(flags.shots)) demos.resize(size_t(flags.shots));
        }
        pconfig.n_shots = int(demos.size());
        auto built =
            prompt::build_prompt(demos, test.question, test.db_id, provider, pconfig);
        if (!flags.dump_dir.empty())
            write_text((fs::path(flags.dump_dir) / (test.id + ".prompt.txt")).string(),
                       built.text);
        json entry = {{"id", test.id},
                      {"db_id", test.db_id},
                      {"question", test.question},
                      {"n", pconfig.n_shots},
                      {"demo_ids", built.demo_ids},
                      {"token_estimate", built.token_estimate},
                      {"text", built.text}};
        if (!test.gold_sql.empty()) entry["gold"] = test.gold_sql;
        if (!draft_sql.empty()) {
            entry["draft"] = draft_sql;
            entry["category"] = category;
        }
        out_prompts.push_back(std::move(entry));
    }
    json out = {{"config",
                 {{"strategy", flags.strategy},
                  {"linearization", flags.linearize},
                  {"augmentation", flags.augment},
                  {"shots", flags.shots},
                  {"seed", flags.seed}}},
                {"prompts", std::move(out_prompts)}};
    write_text(flags.out, out.dump(2) + "\n");
    std::cout << "wrote " << tests.size() << " prompts to " << flags.out << "\n";
    return 0;
}

int cmd_predict(const std::string& prompts_path, const ClientFlags& client_flags,
                const std::string& out) {
    json prompts = read_json(prompts_path);
    auto stack = make_client(client_flags);
    json predictions = json::array();
    for (const auto& entry : prompts.at("prompts")) {
        llm::CompletionRequest request;
        request.model_tag = client_flags.model;
        request.prompt = entry.at("text").get<std::string>();
        request.max_tokens = client_flags.max_tokens;
        request.temperature = 0.0;
        request.stop = {"\n\n/*", ";\n\n"};
        std::string prediction = pipeline::clean_prediction(stack.active->complete(request).text);
        json row = {{"id", entry.at("id")},
                    {"db_id", entry.at("db_id")},
                    {"n", entry.value("n", 0)},
                    {"prediction", prediction}};
        if (entry.contains("gold")) row["gold"] = entry["gold"];
        predictions.push_back(std::move(row));
    }
    json out_json = {{"model", client_flags.model}, {"predictions", std::move(predictions)}};
    write_text(out, out_json.dump(2) + "\n");
    std::cout << "wrote predictions to " << out << "\n";
    return 0;
}

int cmd_vote(const std::vector<std::string>& prediction_files, const std::string& db_dir,
             const std::string& out) {
    struct Bundle {
        std::string db_id;
        std::string gold;
        std::vector<exec::VoteEntry> entries;
    };
    std::map<std::string, Bundle> bundles;
    std::vector<std::string> order;
    for (const auto& file : prediction_files) {
        json j = read_json(file);
        for (const auto& row : j.at("predictions")) {
            std::string id = row.at("id").get<std::string>();
            auto [it, inserted] = bundles.try_emplace(id);
            if (inserted) order.push_back(id);
            it->second.db_id = row.at("db_id").get<std::string>();
            if (row.contains("gold")) it->second.gold = row["gold"].get<std::string>();
            it->second.entries.push_back(
                {row.value("n", 0), row.at("prediction").get<std::string>()});
        }
    }
    json votes = json::array();
    for (const auto& id : order) {
        const Bundle& bundle = bundles.at(id);
        auto tally = exec::majority_vote(bundle.entries,
                                         exec::spider_db_path(db_dir, bundle.db_id));
        json row = {{"id", id},
                    {"db_id", bundle.db_id},
                    {"n", bundle.entries[tally.winner_index].n},
                    {"prediction", bundle.entries[tally.winner_index].prediction}};
        if (!bundle.gold.empty()) row["gold"] = bundle.gold;
        votes.push_back(std::move(row));
    }
    write_text(out, json{{"predictions", std::move(votes)}}.dump(2) + "\n");
    std::cout << "voted over " << prediction_files.size() << " prediction sets, wrote " << out
              << "\n";
    return 0;
}

int cmd_evaluate(const std::string& predictions_path, const std::string& db_dir,
                 const std::string& out, const std::string& md_out) {
    json j = read_json(predictions_path);
    std::vector<std::string> preds, golds, paths, cats, ids;
    for (const auto& row : j.at("predictions")) {
        if (!row.contains("gold")) continue;
        ids.push_back(row.at("id").get<std::string>());
        preds.push_back(row.at("prediction").get<std::string>());
        golds.push_back(row.at("gold").get<std::string>());
        paths.push_back(exec::spider_db_path(db_dir, row.at("db_id").get<std::string>()));
        cats.push_back(
            syntax::to_string(syntax::get_category_or_extra(golds.back())));
    }
    if (preds.empty()) throw ConfigError("no gold-labeled predictions to evaluate");
    auto report = exec::execution_accuracy(preds, golds, paths, cats);

    json items = json::array();
    for (size_t i = 0; i < ids.size(); ++i)
        items.push_back({{"id", ids[i]}, {"match", bool(report.matches[i])},
                         {"category", cats[i]}});
    json by_category = json::object();
    for (const auto& [category, bucket] : report.by_category)
        by_category[category] = {{"total", bucket.total},
                                 {"matched", bucket.matched},
                                 {"accuracy", bucket.accuracy()}};
    json out_json = {{"overall", report.overall},
                     {"evaluated", ids.size()},
                     {"by_category", std::move(by_category)},
                     {"items", std::move(items)}};
    write_text(out, out_json.dump(2) + "\n");
    if (!md_out.empty()) {
        std::ostringstream md;
        md << "# Execution accuracy\n\noverall: " << report.overall << " over " << ids.size()
           << " instances\n\n| difficulty | total | matched | accuracy |\n|---|---|---|---|\n";
        for (const auto& [category, bucket] : report.by_category)
            md << "| " << category << " | " << bucket.total << " | " << bucket.matched
               << " | " << bucket.accuracy() << " |\n";
        write_text(md_out, md.str());
    }
    std::cout << "execution accuracy " << report.overall << " over " << ids.size()
              << " instances\n";
    return 0;
}

int cmd_analyze(const std::string& pool_path, const std::string& drafts_path, size_t k,
                int seeds, const std::string& coverage_mode, const std::string& out) {
    if (coverage_mode != "vocabulary" && coverage_mode != "relative")
        throw ConfigError("--coverage must be vocabulary or relative");
    const bool relative_coverage = coverage_mode == "relative";
    auto pool = load_pool_file(pool_path);
    auto drafts = load_tests_file(drafts_path);
    if (drafts.empty()) throw ConfigError("no draft instances in " + drafts_path);
    const auto& vocab = syntax::SyntaxVocabulary::v1();
    selection::DemoSelector selector(std::move(pool));
    selection::HashedTfEncoder encoder;

    struct Sums {
        double coverage = 0, similarity = 0;
        size_t n = 0;
        void add(double c, double s) {
            coverage += c;
            similarity += s;
            ++n;
        }
    };
    std::map<std::string, Sums> sums;

    std::vector<syntax::SyntaxVector> draft_vectors;
    for (const auto& draft : drafts)
        draft_vectors.push_back(syntax::vectorize_lenient(draft.gold_sql, vocab).vector);

    for (int seed = 1; seed <= seeds; ++seed) {
        auto random_demos = selector.select_random(k, uint64_t(seed));
        auto diverse_demos = selector.select_diverse(k, uint64_t(seed));
        for (size_t d = 0; d < drafts.size(); ++d) {
            auto similar_demos = selector.select_similar(drafts[d].question, k, encoder);
            auto sd_demos =
                selector.select_similarity_diversity(drafts[d].gold_sql, k, uint64_t(seed));
            auto coverage = [&](const std::vector<const selection::Example*>& demos) {
                return relative_coverage
                           ? analysis::syntax_coverage_relative(demos, draft_vectors[d])
                           : analysis::syntax_coverage(demos, vocab);
            };
            sums["random"].add(coverage(random_demos),
                               analysis::syntax_similarity(draft_vectors[d], random_demos));
            sums["similarity"].add(
                coverage(similar_demos),
                analysis::syntax_similarity(draft_vectors[d], similar_demos));
            sums["diversity"].add(
                coverage(diverse_demos),
                analysis::syntax_similarity(draft_vectors[d], diverse_demos));
            sums["similarity_diversity"].add(
                coverage(sd_demos),
                analysis::syntax_similarity(draft_vectors[d], sd_demos));
        }
    }
    std::vector<analysis::StrategyRow> rows;
    for (const char* name : {"random", "similarity", "diversity", "similarity_diversity"}) {
        const Sums& s = sums[name];
        analysis::StrategyRow row;
        row.strategy = name;
        row.coverage = s.coverage / double(s.n);
        row.similarity = s.similarity / double(s.n);
        row.score = row.coverage + row.similarity;
        rows.push_back(std::move(row));
    }
    analysis::write_csv(out, rows);
    for (const auto& row : rows)
        std::cout << row.strategy << ": coverage=" << row.coverage
                  << " similarity=" << row.similarity << " score=" << row.score << "\n";
    std::cout << "wrote " << out << "\n";
    return 0;
}

struct RunFlags {
    pipeline::RunConfig config;
    ClientFlags client;
    std::string shots = "4..10";
    std::string strategy = "sd";
    std::string linearize = "code";
    std::string augment = "none";
    std::string draft_mode = "zero-shot";
    std::string draft_file;
    std::string out_dir = "results";
};

int cmd_run(RunFlags& flags) {
    ShotRange shots = parse_shots(flags.shots);
    flags.config.n_min = shots.lo;
    flags.config.n_max = shots.hi;
    flags.config.strategy = pipeline::strategy_from_string(flags.strategy);
    flags.config.linearization = prompt::linearization_from_string(flags.linearize);
    flags.config.augmentation = prompt::augmentation_from_string(flags.augment);
    flags.config.model_tag = flags.client.model;
    flags.config.max_tokens = flags.client.max_tokens;

    for (const std::string& path :
         {flags.config.paths.examples_file, flags.config.paths.tests_file,
          flags.config.paths.tables_json, flags.config.paths.database_dir})
        if (!fs::exists(path)) throw ConfigError("path does not exist: " + path);

    auto stack = make_client(flags.client);

    std::unique_ptr<pipeline::DraftPredictor> draft;
    if (flags.draft_mode == "zero-shot")
        draft = pipeline::make_llm_draft_predictor(*stack.active, flags.config.model_tag,
                                                   flags.config.max_tokens, flags.config.stop);
    else if (flags.draft_mode == "gold")
        draft = pipeline::make_gold_draft_predictor();
    else if (flags.draft_mode == "file")
        draft = pipeline::make_fixture_draft_predictor(flags.draft_file);
    else
        throw ConfigError("--draft must be zero-shot, gold, or file");

    pipeline::RunReport report =
        shots.lo == shots.hi
            ? pipeline::run_single_strategy(flags.config, *stack.active, *draft)
            : pipeline::run_integrated(flags.config, *stack.active, *draft);

    fs::create_directories(flags.out_dir);
    write_text((fs::path(flags.out_dir) / "report.json").string(), report.to_json());
    write_text((fs::path(flags.out_dir) / "report.md").string(), report.to_markdown());
    std::cout << "strategy " << report.strategy << ", shots " << report.n_min << ".."
              << report.n_max << "\n";
    std::cout << "execution accuracy " << report.overall_accuracy << " over "
              << report.evaluated << " instances";
    if (report.failures > 0) std::cout << " (" << report.failures << " failures)";
    std::cout << "\nreports written to " << flags.out_dir << "\n";
    return report.failures > 0 ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Text-to-SQL in-context-learning toolkit"};
    app.require_subcommand(1);

    // ingest
    std::string train, tables, tests_path, out_path;
    auto* ingest = app.add_subcommand("ingest", "vectorize and categorize a training pool");
    ingest->add_option("--train", train, "Spider-format examples JSON")->required();
    ingest->add_option("--tables", tables, "tables.json")->required();
    ingest->add_option("--tests", tests_path, "optional test instances JSON");
    ingest->add_option("--out", out_path, "pool artifact output")->required();

    // select
    std::string sel_pool, sel_out;
    size_t sel_k = 8;
    uint64_t sel_seed = 0;
    auto* select = app.add_subcommand("select", "prepare partition representatives");
    select->add_option("--pool", sel_pool, "pool artifact or Spider examples JSON")->required();
    select->add_option("--k", sel_k, "representatives per partition");
    select->add_option("--seed", sel_seed, "clustering seed");
    select->add_option("--out", sel_out, "selection artifact output")->required();

    // build-prompts
    PromptFlags prompt_flags;
    auto* build = app.add_subcommand("build-prompts", "render prompts for a test set");
    build->add_option("--pool", prompt_flags.pool)->required();
    build->add_option("--tests", prompt_flags.tests)->required();
    build->add_option("--tables", prompt_flags.tables)->required();
    build->add_option("--selection", prompt_flags.selection,
                      "verify against a selection artifact");
    build->add_option("--descriptions", prompt_flags.descriptions,
                      "column descriptions JSON for semantic augmentation");
    build->add_option("--strategy", prompt_flags.strategy);
    build->add_option("--linearize", prompt_flags.linearize, "text|code");
    build->add_option("--augment", prompt_flags.augment, "none|inline|block|ontology");
    build->add_option("--shots", prompt_flags.shots);
    build->add_option("--seed", prompt_flags.seed);
    build->add_option("--draft", prompt_flags.draft_mode, "gold|file");
    build->add_option("--draft-file", prompt_flags.draft_file);
    build->add_option("--dump-prompts", prompt_flags.dump_dir);
    build->add_option("--out", prompt_flags.out);

    // predict
    std::string predict_prompts, predict_out = "predictions.json";
    ClientFlags predict_client;
    auto* predict = app.add_subcommand("predict", "run completions for built prompts");
    predict->add_option("--prompts", predict_prompts)->required();
    predict->add_option("--out", predict_out);
    predict_client.attach(predict);

    // vote
    std::vector<std::string> vote_files;
    std::string vote_db_dir, vote_out = "votes.json";
    auto* vote = app.add_subcommand("vote", "majority-vote prediction bundles");
    vote->add_option("--predictions", vote_files, "prediction files, one per shot count")
        ->required()
        ->expected(-1);
    vote->add_option("--db-dir", vote_db_dir, "Spider database directory")->required();
    vote->add_option("--out", vote_out);

    // evaluate
    std::string eval_predictions, eval_db_dir, eval_out = "eval.json", eval_md;
    auto* evaluate = app.add_subcommand("evaluate", "execution accuracy against gold");
    evaluate->add_option("--predictions", eval_predictions)->required();
    evaluate->add_option("--db-dir", eval_db_dir)->required();
    evaluate->add_option("--out", eval_out);
    evaluate->add_option("--md", eval_md, "optional markdown summary");

    // analyze
    std::string an_pool, an_drafts, an_out = "diagnostics.csv";
    std::string an_coverage = "vocabulary";
    size_t an_k = 4;
    int an_seeds = 20;
    auto* analyze = app.add_subcommand("analyze", "syntax coverage/similarity per strategy");
    analyze->add_option("--pool", an_pool)->required();
    analyze->add_option("--drafts", an_drafts, "draft instances (question + SQL)")->required();
    analyze->add_option("--k", an_k);
    analyze->add_option("--seeds", an_seeds);
    analyze->add_option("--coverage", an_coverage,
                        "coverage denominator: vocabulary|relative");
    analyze->add_option("--out", an_out);

    // run
    RunFlags run_flags;
    auto* run = app.add_subcommand("run", "full pipeline: select, prompt, predict, vote");
    run->add_option("--train", run_flags.config.paths.examples_file)->required();
    run->add_option("--tests", run_flags.config.paths.tests_file)->required();
    run->add_option("--tables", run_flags.config.paths.tables_json)->required();
    run->add_option("--db-dir", run_flags.config.paths.database_dir)->required();
    run->add_option("--strategy", run_flags.strategy, "random|similarity|diversity|sd");
    run->add_option("--shots", run_flags.shots, "MIN..MAX or a single count");
    run->add_option("--linearize", run_flags.linearize, "text|code");
    run->add_option("--augment", run_flags.augment, "none|inline|block|ontology");
    run->add_option("--seed", run_flags.config.seed);
    run->add_option("--workers", run_flags.config.workers);
    run->add_option("--context-limit", run_flags.config.context_limit);
    run->add_option("--descriptions", run_flags.config.descriptions_file);
    run->add_option("--dump-prompts", run_flags.config.dump_prompts_dir);
    run->add_option("--draft", run_flags.draft_mode, "zero-shot|gold|file");
    run->add_option("--draft-file", run_flags.draft_file);
    run->add_option("--out-dir", run_flags.out_dir);
    run_flags.client.attach(run);

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return cmd_ingest(train, tables, tests_path, out_path);
        if (select->parsed()) return cmd_select(sel_pool, sel_k, sel_seed, sel_out);
        if (build->parsed()) return cmd_build_prompts(prompt_flags);
        if (predict->parsed()) return cmd_predict(predict_prompts, predict_client, predict_out);
        if (vote->parsed()) return cmd_vote(vote_files, vote_db_dir, vote_out);
        if (evaluate->parsed()) return cmd_evaluate(eval_predictions, eval_db_dir, eval_out,
                                                    eval_md);
        if (analyze->parsed())
            return cmd_analyze(an_pool, an_drafts, an_k, an_seeds, an_coverage, an_out);
        if (run->parsed()) return cmd_run(run_flags);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
