#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "bruteforce_lloyd.hpp"
#include "fixtures.hpp"
#include "t2s/rng.hpp"
#include "t2s/selection.hpp"

using namespace t2s;
using namespace t2s::selection;
using nlohmann::json;


namespace {

syntax::SyntaxVector vec(std::vector<int> values) {
    return {std::move(values), syntax::VectorMode::Binary};
}

Example raw_example(std::string id, std::vector<int> values,
                    syntax::Difficulty cat = syntax::Difficulty::Easy) {
    Example ex;
    ex.id = std::move(id);
    ex.question = "q-" + ex.id;
    ex.gold_sql = "select 1 from t";
    ex.db_id = "db";
    ex.vector = vec(std::move(values));
    ex.category = cat;
    return ex;
}

struct Cluster30 {
    std::vector<Example> examples;
    std::vector<syntax::SyntaxVector> vectors;
    std::vector<std::vector<int>> points;
    std::vector<std::string> ids;
};

Cluster30 load_cluster30() {
    Cluster30 out;
    json j = json::parse(testsup::read_file(testsup::fixture_dir() + "/cluster30.json"));
    for (const auto& entry : j["vectors"]) {
        std::vector<int> values = entry["values"].get<std::vector<int>>();
        out.ids.push_back(entry["id"].get<std::string>());
        out.points.push_back(values);
        out.vectors.push_back(vec(values));
        out.examples.push_back(raw_example(entry["id"].get<std::string>(), values));
    }
    return out;
}

}  // namespace

TEST_CASE("kmeans degenerate identical inputs") {
    std::vector<syntax::SyntaxVector> vs = {vec({1, 0, 1}), vec({1, 0, 1}), vec({1, 0, 1})};
    auto result = kmeans(vs, 1, 42);
    CHECK(result.centroids.size() == 1);
    CHECK(result.centroids[0] == std::vector<double>{1, 0, 1});
    CHECK(result.assignment == std::vector<size_t>{0, 0, 0});
}

TEST_CASE("kmeans separates two well-separated clusters") {
    std::vector<syntax::SyntaxVector> vs;
    for (int i = 0; i < 5; ++i) vs.push_back(vec({1, 0, 0, 0, 0, 0}));
    for (int i = 0; i < 5; ++i) vs.push_back(vec({0, 1, 1, 0, 0, 0}));
    auto result = kmeans(vs, 2, 3);
    for (int i = 1; i < 5; ++i) CHECK(result.assignment[i] == result.assignment[0]);
    for (int i = 6; i < 10; ++i) CHECK(result.assignment[i] == result.assignment[5]);
    CHECK(result.assignment[0] != result.assignment[5]);
}

TEST_CASE("kmeans argument validation") {
    std::vector<syntax::SyntaxVector> vs = {vec({1, 0}), vec({0, 1})};
    CHECK_THROWS_AS(kmeans(vs, 0, 1), Error);
    CHECK_THROWS_AS(kmeans(vs, 3, 1), Error);
}

TEST_CASE("kmeans matches the brute-force oracle on the 30-vector fixture") {
    auto fixture = load_cluster30();
    REQUIRE(fixture.vectors.size() == 30);
    for (size_t k : {size_t(4), size_t(8)}) {
        auto mine = kmeans(fixture.vectors, k, 7);
        auto oracle = bruteforce::lloyd(fixture.points, k, 7);
        CHECK(mine.assignment == oracle.assign);
        REQUIRE(mine.centroids.size() == oracle.centers.size());
        for (size_t c = 0; c < k; ++c)
            for (size_t d = 0; d < mine.centroids[c].size(); ++d)
                CHECK(mine.centroids[c][d] == doctest::Approx(oracle.centers[c][d]));
    }
}

TEST_CASE("representatives match the brute-force oracle") {
    auto fixture = load_cluster30();
    std::vector<const Example*> members;
    for (const auto& ex : fixture.examples) members.push_back(&ex);

    auto clustering = kmeans(fixture.vectors, 8, 7);
    auto mine = pick_representatives(members, clustering);
    auto oracle_clustering = bruteforce::lloyd(fixture.points, 8, 7);
    auto oracle_ids =
        bruteforce::representatives(fixture.points, fixture.ids, oracle_clustering);
    REQUIRE(mine.size() == oracle_ids.size());
    for (size_t i = 0; i < mine.size(); ++i) CHECK(mine[i]->id == oracle_ids[i]);
}

TEST_CASE("representatives trivial cases") {
    std::vector<Example> pool = {raw_example("only", {1, 1, 0})};
    std::vector<const Example*> members = {&pool[0]};
    auto clustering = kmeans(std::vector<syntax::SyntaxVector>{pool[0].vector}, 1, 9);
    auto reps = pick_representatives(members, clustering);
    REQUIRE(reps.size() == 1);
    CHECK(reps[0]->id == "only");
}

TEST_CASE("select_diverse picks one per separated cluster") {
    std::vector<Example> pool;
    for (int i = 0; i < 5; ++i) pool.push_back(raw_example("a" + std::to_string(i), {1, 0, 0}));
    for (int i = 0; i < 5; ++i) pool.push_back(raw_example("b" + std::to_string(i), {0, 1, 1}));
    DemoSelector selector(pool);
    auto reps = selector.select_diverse(2, 11);
    REQUIRE(reps.size() == 2);
    bool one_each = (reps[0]->id[0] == 'a' && reps[1]->id[0] == 'b') ||
                    (reps[0]->id[0] == 'b' && reps[1]->id[0] == 'a');
    CHECK(one_each);
}

TEST_CASE("select_random is a seeded uniform sample") {
    std::vector<Example> pool;
    for (int i = 0; i < 10; ++i)
        pool.push_back(raw_example("e" + std::to_string(i), {i % 2, (i / 2) % 2, 1}));
    DemoSelector selector(pool);

    SUBCASE("k equal to pool size gives a permutation") {
        auto sample = selector.select_random(10, 5);
        std::set<std::string> ids;
        for (const auto* e : sample) ids.insert(e->id);
        CHECK(ids.size() == 10);
    }
    SUBCASE("fixed seed reproduces") {
        auto a = selector.select_random(4, 123);
        auto b = selector.select_random(4, 123);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) CHECK(a[i]->id == b[i]->id);
        auto c = selector.select_random(4, 124);
        bool same = true;
        for (size_t i = 0; i < a.size(); ++i) same = same && a[i]->id == c[i]->id;
        CHECK_FALSE(same);
    }
    SUBCASE("empirical frequency within three sigma of uniform") {
        std::map<std::string, int> hits;
        const int trials = 10000;
        for (int t = 0; t < trials; ++t) hits[selector.select_random(1, uint64_t(t))[0]->id]++;
        double sigma = std::sqrt(0.1 * 0.9 / trials);
        for (const auto& [id, count] : hits) {
            double freq = double(count) / trials;
            CHECK(std::fabs(freq - 0.1) <= 3 * sigma + 1e-9);
        }
    }
}

TEST_CASE("select_similar ranks by cosine of encoded questions") {
    std::vector<Example> pool;
    auto with_question = [](std::string id, std::string question) {
        Example ex;
        ex.id = std::move(id);
        ex.question = std::move(question);
        ex.gold_sql = "select 1 from t";
        ex.db_id = "db";
        ex.vector = {{1, 0}, syntax::VectorMode::Binary};
        return ex;
    };
    pool.push_back(with_question("e0", "how many heads exist"));
    pool.push_back(with_question("e1", "how many departments exist"));
    pool.push_back(with_question("e2", "list the names of heads"));
    pool.push_back(with_question("e3", "what is the average age"));
    pool.push_back(with_question("e4", "how many heads of departments exist"));

    HashedTfEncoder encoder;

    auto tokens = [](const std::string& text) {
        std::map<std::string, double> counts;
        std::string w;
        for (char c : text + " ") {
            if (std::isalnum(static_cast<unsigned char>(c))) {
                w += char(std::tolower(c));
            } else if (!w.empty()) {
                counts[w] += 1;
                w.clear();
            }
        }
        return counts;
    };
    // oracle validity: the fixture's words must not collide in the hash table
    {
        std::set<std::string> words;
        for (const auto& ex : pool)
            for (auto& [w, unused] : tokens(ex.question)) words.insert(w);
        std::set<uint64_t> buckets;
        for (const auto& w : words) buckets.insert(fnv1a64(w) % 1024);
        REQUIRE(buckets.size() == words.size());
    }
    auto hand_cosine = [&](const std::string& a, const std::string& b) {
        auto ca = tokens(a), cb = tokens(b);
        double dot = 0, na = 0, nb = 0;
        for (auto& [w, x] : ca) {
            na += x * x;
            auto it = cb.find(w);
            if (it != cb.end()) dot += x * it->second;
        }
        for (auto& [w, x] : cb) nb += x * x;
        return dot / (std::sqrt(na) * std::sqrt(nb));
    };

    DemoSelector selector(pool);
    const std::string query = "how many heads exist";

    SUBCASE("identical question ranks first") {
        auto top = selector.select_similar(query, 1, encoder);
        REQUIRE(top.size() == 1);
        CHECK(top[0]->id == "e0");
    }
    SUBCASE("full ranking matches the hand cosine oracle") {
        auto ranked = selector.select_similar(query, 5, encoder);
        std::vector<std::pair<double, std::string>> expected;
        for (const auto& ex : pool)
            expected.push_back({-hand_cosine(query, ex.question), ex.id});
        std::stable_sort(expected.begin(), expected.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        REQUIRE(ranked.size() == 5);
        for (size_t i = 0; i < 5; ++i) CHECK(ranked[i]->id == expected[i].second);
    }
}

TEST_CASE("similarity-diversity selection honors the draft category") {
    const auto& vocab = syntax::SyntaxVocabulary::v1();
    std::vector<Example> pool;
    int next_id = 0;
    auto add = [&](const std::string& sql) {
        pool.push_back(make_example("p" + std::to_string(next_id / 10) +
                                        std::to_string(next_id % 10),
                                    "q" + std::to_string(next_id), sql, "db", vocab));
        ++next_id;
    };
    // easy
    add("select name from people");
    add("select count(*) from people");
    add("select age from people where age > 20");
    add("select name from people order by age desc");
    // medium
    add("select name, age from people");
    add("select hometown, count(*) from people group by hometown");
    add("select name from people where age > 20 and height > 1");
    add("select name, height from people where age > 30");
    // hard
    add("select name from people where people_id in (select gymnast_id from gymnast)");
    add("select t1.name from people as t1 join gymnast as t2 on t1.people_id = "
        "t2.gymnast_id order by t2.total_points desc limit 1");
    add("select name from people intersect select name from people");

    DemoSelector selector(pool);

    SUBCASE("postcondition: every demo shares the draft category") {
        auto demos = selector.select_similarity_diversity("select count(*) from t", 3, 7);
        REQUIRE(demos.size() == 3);
        for (const auto* d : demos) CHECK(d->category == syntax::Difficulty::Easy);
    }
    SUBCASE("same category drafts give identical demonstrations") {
        auto a = selector.select_similarity_diversity("select count(*) from t", 3, 7);
        auto b = selector.select_similarity_diversity("select hometown from people", 3, 7);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) CHECK(a[i]->id == b[i]->id);
    }
    SUBCASE("no duplicates and seeded determinism") {
        auto a = selector.select_similarity_diversity("select name, age from people", 4, 9);
        std::set<std::string> ids;
        for (const auto* d : a) ids.insert(d->id);
        CHECK(ids.size() == a.size());
        auto b = selector.select_similarity_diversity("select name, age from people", 4, 9);
        for (size_t i = 0; i < a.size(); ++i) CHECK(a[i]->id == b[i]->id);
    }
    SUBCASE("empty partition falls back to whole-pool diversity") {
        // no extra-difficulty examples in this pool
        auto demos = selector.select_similarity_diversity(
            "select t1.name from people as t1 join gymnast as t2 on t1.people_id = "
            "t2.gymnast_id where t1.people_id in (select gymnast_id from gymnast)",
            3, 7);
        CHECK(demos.size() == 3);
        auto diverse = selector.select_diverse(3, 7);
        for (size_t i = 0; i < demos.size(); ++i) CHECK(demos[i]->id == diverse[i]->id);
    }
    SUBCASE("k larger than partition clamps with warning") {
        std::vector<std::string> warnings;
        DemoSelector warning_selector(pool,
                                      [&](const std::string& w) { warnings.push_back(w); });
        auto demos =
            warning_selector.select_similarity_diversity("select count(*) from t", 9, 7);
        CHECK(demos.size() == 4);  // the easy partition only holds four examples
        CHECK_FALSE(warnings.empty());
    }
}

TEST_CASE("partitions cover the pool disjointly") {
    const auto& vocab = syntax::SyntaxVocabulary::v1();
    std::vector<Example> pool;
    json pool_json = json::parse(testsup::read_file(testsup::fixture_dir() + "/pool200.json"));
    for (const auto& item : pool_json)
        pool.push_back(
            make_example(item["id"], item["question"], item["query"], item["db_id"], vocab));
    DemoSelector selector(pool);
    const auto& partitions = selector.prepare_partitions(4, 1);
    size_t total = 0;
    std::set<std::string> seen;
    for (const auto& partition : partitions) {
        total += partition.members.size();
        for (const auto* member : partition.members) {
            CHECK(member->category == partition.category);
            CHECK(seen.insert(member->id).second);
        }
        for (const auto* rep : partition.representatives) {
            bool found = std::find(partition.members.begin(), partition.members.end(), rep) !=
                         partition.members.end();
            CHECK(found);
        }
    }
    CHECK(total == pool.size());
}

TEST_CASE("pool hash is order and content sensitive") {
    std::vector<Example> pool = {raw_example("a", {1, 0}), raw_example("b", {0, 1})};
    DemoSelector s1(pool);
    std::swap(pool[0], pool[1]);
    DemoSelector s2(pool);
    CHECK(s1.pool_hash() != s2.pool_hash());
    CHECK_FALSE(s1.pool_hash().empty());
}
