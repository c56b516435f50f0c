#include <benchmark/benchmark.h>

#include "t2s/hardness.hpp"
#include "t2s/prompt.hpp"
#include "t2s/rng.hpp"
#include "t2s/schema.hpp"
#include "t2s/selection.hpp"
#include "t2s/sqlsyntax.hpp"

using namespace t2s;

namespace {

const char* kJoinQuery =
    "select t1.total_points from gymnast as t1 join people as t2 on "
    "t1.gymnast_id = t2.people_id order by t2.age asc limit 1";

schema::DatabaseSchema chain_schema(int tables, int columns_per_table) {
    schema::DatabaseSchema db;
    db.db_id = "bench";
    for (int t = 0; t < tables; ++t) {
        schema::Table table;
        table.name = "t" + std::to_string(t);
        for (int c = 0; c < columns_per_table; ++c)
            table.columns.push_back({"c" + std::to_string(c), c == 0 ? "int" : "text"});
        table.primary_key = {"c0"};
        db.tables.push_back(std::move(table));
        if (t > 0)
            db.foreign_keys.push_back({"t" + std::to_string(t), "c1",
                                       "t" + std::to_string(t - 1), "c0"});
    }
    return db;
}

void BM_Tokenize(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(syntax::tokenize(kJoinQuery));
}
BENCHMARK(BM_Tokenize);

void BM_SyntaxVector(benchmark::State& state) {
    const auto& vocab = syntax::SyntaxVocabulary::v1();
    for (auto _ : state)
        benchmark::DoNotOptimize(syntax::get_syntax_vector(kJoinQuery, vocab));
}
BENCHMARK(BM_SyntaxVector);

void BM_GetCategory(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(syntax::get_category(kJoinQuery));
}
BENCHMARK(BM_GetCategory);

void BM_KMeans(benchmark::State& state) {
    const size_t n = size_t(state.range(0));
    const size_t dim = 43;
    SplitMix64 rng(11);
    std::vector<syntax::SyntaxVector> vectors;
    for (size_t i = 0; i < n; ++i) {
        std::vector<int> values(dim, 0);
        for (size_t d = 0; d < dim; ++d) values[d] = rng.next_index(4) == 0 ? 1 : 0;
        vectors.push_back({std::move(values), syntax::VectorMode::Binary});
    }
    for (auto _ : state) benchmark::DoNotOptimize(selection::kmeans(vectors, 8, 7));
}
BENCHMARK(BM_KMeans)->Arg(64)->Arg(256);

void BM_OntologyChain(benchmark::State& state) {
    auto db = chain_schema(int(state.range(0)), 4);
    for (auto _ : state) benchmark::DoNotOptimize(schema::build_ontology_summary(db));
}
BENCHMARK(BM_OntologyChain)->Arg(6)->Arg(10);

void BM_RenderCodeSeq(benchmark::State& state) {
    auto db = chain_schema(6, 8);
    selection::Example ex;
    ex.id = "b";
    ex.question = "How many rows are there?";
    ex.gold_sql = "select count(*) from t0";
    ex.db_id = "bench";
    prompt::SchemaContext ctx{&db, nullptr, nullptr};
    prompt::PromptConfig config{prompt::Linearization::CodeSeq, prompt::Augmentation::None, 0};
    for (auto _ : state)
        benchmark::DoNotOptimize(prompt::render_demonstration(ex, ctx, config));
}
BENCHMARK(BM_RenderCodeSeq);

}  // namespace

BENCHMARK_MAIN();
