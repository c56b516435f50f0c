#include "t2s/selection.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

#include "t2s/rng.hpp"

namespace t2s::selection {

Example make_example(std::string id, std::string question, std::string gold_sql,
                     std::string db_id, const syntax::SyntaxVocabulary& vocab) {
    Example ex;
    ex.id = std::move(id);
    ex.question = std::move(question);
    ex.gold_sql = std::move(gold_sql);
    ex.db_id = std::move(db_id);
    auto vec = syntax::vectorize_lenient(ex.gold_sql, vocab, syntax::VectorMode::Binary);
    ex.vector = std::move(vec.vector);
    bool category_degraded = false;
    ex.category = syntax::get_category_or_extra(ex.gold_sql, &category_degraded);
    ex.degraded = vec.degraded || category_degraded;
    return ex;
}

namespace {

double sq_distance(const std::vector<int>& point, const std::vector<double>& center) {
    double acc = 0.0;
    for (size_t i = 0; i < point.size(); ++i) {
        double d = double(point[i]) - center[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace

ClusteringResult kmeans(std::span<const syntax::SyntaxVector> vectors, size_t k, uint64_t seed) {
    const size_t n = vectors.size();
    if (k == 0) throw Error("kmeans: k must be at least 1");
    if (k > n) throw Error("kmeans: k exceeds the number of points");
    const size_t dim = vectors[0].values.size();
    for (const auto& v : vectors)
        if (v.values.size() != dim) throw Error("kmeans: inconsistent vector length");

    SplitMix64 rng(seed);
    ClusteringResult result;
    result.seed = seed;

    // k-means++ seeding
    std::vector<std::vector<double>> centers;
    centers.reserve(k);
    {
        size_t first = rng.next_index(n);
        centers.emplace_back(vectors[first].values.begin(), vectors[first].values.end());
    }
    std::vector<double> d2(n, 0.0);
    while (centers.size() < k) {
        double total = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            for (const auto& c : centers) best = std::min(best, sq_distance(vectors[i].values, c));
            d2[i] = best;
            total += best;
        }
        size_t pick;
        if (total == 0.0) {
            pick = rng.next_index(n);
        } else {
            double r = rng.next_double() * total;
            double cum = 0.0;
            pick = n - 1;
            for (size_t i = 0; i < n; ++i) {
                cum += d2[i];
                if (cum > r) {
                    pick = i;
                    break;
                }
            }
        }
        centers.emplace_back(vectors[pick].values.begin(), vectors[pick].values.end());
    }

    // Lloyd iterations
    std::vector<size_t> assignment(n, 0);
    const int max_iterations = 100;
    int iter = 0;
    for (; iter < max_iterations; ++iter) {
        std::vector<size_t> next(n, 0);
        for (size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            size_t best_c = 0;
            for (size_t c = 0; c < centers.size(); ++c) {
                double d = sq_distance(vectors[i].values, centers[c]);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            next[i] = best_c;
        }

        // an emptied cluster steals the farthest member of the largest cluster
        std::vector<size_t> sizes(k, 0);
        for (size_t c : next) sizes[c]++;
        for (size_t empty = 0; empty < k; ++empty) {
            if (sizes[empty] > 0) continue;
            size_t largest = 0;
            for (size_t c = 1; c < k; ++c)
                if (sizes[c] > sizes[largest]) largest = c;
            if (sizes[largest] <= 1) continue;
            double far_d = -1.0;
            size_t far_i = 0;
            for (size_t i = 0; i < n; ++i) {
                if (next[i] != largest) continue;
                double d = sq_distance(vectors[i].values, centers[largest]);
                if (d > far_d) {
                    far_d = d;
                    far_i = i;
                }
            }
            next[far_i] = empty;
            sizes[empty] = 1;
            sizes[largest]--;
            centers[empty].assign(vectors[far_i].values.begin(), vectors[far_i].values.end());
        }

        // recompute centroids
        std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
        std::vector<size_t> counts(k, 0);
        for (size_t i = 0; i < n; ++i) {
            counts[next[i]]++;
            for (size_t d = 0; d < dim; ++d) sums[next[i]][d] += double(vectors[i].values[d]);
        }
        for (size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (size_t d = 0; d < dim; ++d) centers[c][d] = sums[c][d] / double(counts[c]);
        }

        if (iter > 0 && next == assignment) {
            assignment = std::move(next);
            break;
        }
        assignment = std::move(next);
    }

    result.centroids = std::move(centers);
    result.assignment = std::move(assignment);
    result.iterations = iter;
    return result;
}

std::vector<const Example*> pick_representatives(std::span<const Example* const> members,
                                                 const ClusteringResult& clustering) {
    std::vector<const Example*> reps;
    std::vector<bool> taken(members.size(), false);
    for (const auto& centroid : clustering.centroids) {
        double best = std::numeric_limits<double>::max();
        long best_i = -1;
        for (size_t i = 0; i < members.size(); ++i) {
            if (taken[i]) continue;
            double d = std::sqrt(sq_distance(members[i]->vector.values, centroid));
            if (d < best || (d == best && best_i >= 0 && members[i]->id < members[best_i]->id)) {
                best = d;
                best_i = long(i);
            }
        }
        if (best_i < 0) break;
        taken[best_i] = true;
        reps.push_back(members[best_i]);
    }
    return reps;
}

// ---------------------------------------------------------------------------
// Encoders
// ---------------------------------------------------------------------------

std::vector<double> HashedTfEncoder::encode(const std::string& question) const {
    std::vector<double> v(kDim, 0.0);
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        v[fnv1a64(token) % kDim] += 1.0;
        token.clear();
    };
    for (char c : question) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            token += char(std::tolower(static_cast<unsigned char>(c)));
        } else {
            flush();
        }
    }
    flush();
    return v;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error("cosine_similarity: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// ---------------------------------------------------------------------------
// DemoSelector
// ---------------------------------------------------------------------------

DemoSelector::DemoSelector(std::vector<Example> pool, WarningSink warn)
    : pool_(std::move(pool)), warn_(std::move(warn)) {}

void DemoSelector::warn(const std::string& msg) const {
    if (warn_) warn_(msg);
    else std::cerr << "[selection] " << msg << '\n';
}

std::string DemoSelector::pool_hash() const {
    uint64_t h = kFnvOffsetBasis;
    for (const auto& ex : pool_) {
        h = fnv1a64(ex.id, h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(ex.question, h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(ex.gold_sql, h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(ex.db_id, h);
        h = fnv1a64("\x1e", h);
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

DemoSelector::Prepared& DemoSelector::prepared_for(size_t k, uint64_t seed) {
    auto key = std::make_pair(k, seed);
    auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;
    auto prepared = std::make_unique<Prepared>();
    cache_[key] = std::move(prepared);
    return *cache_[key];
}

const std::vector<Partition>& DemoSelector::prepare_partitions(size_t k, uint64_t seed) {
    Prepared& prepared = prepared_for(k, seed);
    if (!prepared.partitions.empty()) return prepared.partitions;

    using syntax::Difficulty;
    for (Difficulty cat : {Difficulty::Easy, Difficulty::Medium, Difficulty::Hard,
                           Difficulty::Extra}) {
        Partition partition;
        partition.category = cat;
        for (const auto& ex : pool_)
            if (ex.category == cat) partition.members.push_back(&ex);
        if (!partition.members.empty()) {
            size_t effective_k = k;
            if (effective_k > partition.members.size()) {
                effective_k = partition.members.size();
                warn("partition " + syntax::to_string(cat) + " has only " +
                     std::to_string(effective_k) + " members, reducing k");
            }
            std::vector<syntax::SyntaxVector> vectors;
            vectors.reserve(partition.members.size());
            for (const Example* ex : partition.members) vectors.push_back(ex->vector);
            partition.clustering = kmeans(vectors, effective_k, seed);
            partition.representatives =
                pick_representatives(partition.members, partition.clustering);
        }
        prepared.partitions.push_back(std::move(partition));
    }
    return prepared.partitions;
}

const Partition& DemoSelector::prepare_whole_pool(size_t k, uint64_t seed) {
    Prepared& prepared = prepared_for(k, seed);
    if (prepared.whole_pool_ready) return prepared.whole_pool;

    Partition& partition = prepared.whole_pool;
    partition.category = syntax::Difficulty::Easy;  // unused for whole-pool selection
    for (const auto& ex : pool_) partition.members.push_back(&ex);
    if (partition.members.empty()) throw Error("selection: empty pool");
    size_t effective_k = std::min(k, partition.members.size());
    if (effective_k < k)
        warn("pool has only " + std::to_string(effective_k) + " members, reducing k");
    std::vector<syntax::SyntaxVector> vectors;
    vectors.reserve(partition.members.size());
    for (const Example* ex : partition.members) vectors.push_back(ex->vector);
    partition.clustering = kmeans(vectors, effective_k, seed);
    partition.representatives = pick_representatives(partition.members, partition.clustering);
    prepared.whole_pool_ready = true;
    return partition;
}

std::vector<const Example*> DemoSelector::select_similarity_diversity(
    const std::string& draft_sql, size_t k, uint64_t seed) {
    syntax::Difficulty category = syntax::get_category_or_extra(draft_sql);
    const auto& partitions = prepare_partitions(k, seed);
    for (const auto& partition : partitions) {
        if (partition.category != category) continue;
        if (partition.members.empty()) break;
        auto reps = partition.representatives;
        if (reps.size() > k) reps.resize(k);
        return reps;
    }
    warn("empty partition for category " + syntax::to_string(category) +
         ", falling back to whole-pool diversity selection");
    return select_diverse(k, seed);
}

std::vector<const Example*> DemoSelector::select_random(size_t k, uint64_t seed) const {
    if (k > pool_.size()) {
        warn("random selection k exceeds pool size, clamping");
        k = pool_.size();
    }
    std::vector<size_t> indices(pool_.size());
    std::iota(indices.begin(), indices.end(), 0);
    SplitMix64 rng(seed);
    for (size_t i = 0; i < k; ++i) {
        size_t j = i + rng.next_index(indices.size() - i);
        std::swap(indices[i], indices[j]);
    }
    std::vector<const Example*> out;
    out.reserve(k);
    for (size_t i = 0; i < k; ++i) out.push_back(&pool_[indices[i]]);
    return out;
}

std::vector<const Example*> DemoSelector::select_similar(const std::string& question, size_t k,
                                                         const QuestionEncoder& encoder) const {
    if (encoded_with_ != encoder.name() || encoded_questions_.size() != pool_.size()) {
        encoded_questions_.clear();
        encoded_questions_.reserve(pool_.size());
        for (const auto& ex : pool_) encoded_questions_.push_back(encoder.encode(ex.question));
        encoded_with_ = encoder.name();
    }
    std::vector<double> q = encoder.encode(question);
    std::vector<std::pair<double, size_t>> scored;
    scored.reserve(pool_.size());
    for (size_t i = 0; i < pool_.size(); ++i)
        scored.emplace_back(cosine_similarity(q, encoded_questions_[i]), i);
    std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return pool_[a.second].id < pool_[b.second].id;
    });
    if (k > scored.size()) k = scored.size();
    std::vector<const Example*> out;
    out.reserve(k);
    for (size_t i = 0; i < k; ++i) out.push_back(&pool_[scored[i].second]);
    return out;
}

std::vector<const Example*> DemoSelector::select_diverse(size_t k, uint64_t seed) {
    auto reps = prepare_whole_pool(k, seed).representatives;
    if (reps.size() > k) reps.resize(k);
    return reps;
}

}  // namespace t2s::selection
