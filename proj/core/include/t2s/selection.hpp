#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "t2s/hardness.hpp"
#include "t2s/sqlsyntax.hpp"

namespace t2s::selection {

/// One annotated pool item. vector and category are derived from gold_sql at
/// construction time and kept consistent with it.
struct Example {
    std::string id;
    std::string question;
    std::string gold_sql;
    std::string db_id;
    syntax::SyntaxVector vector;
    syntax::Difficulty category = syntax::Difficulty::Easy;
    bool degraded = false;  // syntax extraction fell back to the keyword scan
};

/// Derive vector (binary) and category from gold_sql. Unparseable SQL is kept
/// with a degraded vector and the Extra fallback category rather than dropped.
Example make_example(std::string id, std::string question, std::string gold_sql,
                     std::string db_id, const syntax::SyntaxVocabulary& vocab);

struct ClusteringResult {
    std::vector<std::vector<double>> centroids;  // k rows
    std::vector<size_t> assignment;              // point index -> cluster id
    uint64_t seed = 0;
    int iterations = 0;
};

/// Lloyd's k-means over discrete syntax vectors with k-means++ seeding.
///
/// Fully deterministic given the seed. The exact procedure (an independent
/// reimplementation must follow it to agree bit-for-bit):
///   rng = SplitMix64(seed)
///   first center = vectors[rng.next_index(n)]
///   each next center: squared distance d2[j] to nearest chosen center;
///     total = sum(d2); if total == 0 pick rng.next_index(n), else
///     r = rng.next_double() * total and pick the smallest j whose cumulative
///     d2 exceeds r (last index as fallback)
///   iterate: assign to nearest centroid (ties to the lowest centroid index),
///     recompute centroids as member means; an emptied cluster steals the
///     farthest member of the largest cluster (largest size, ties to lowest
///     cluster id; farthest by distance to that cluster's centroid, ties to
///     lowest point index); stop when the assignment is unchanged or after
///     100 iterations.
///
/// Requires 1 <= k <= |vectors| and uniform vector length.
ClusteringResult kmeans(std::span<const syntax::SyntaxVector> vectors, size_t k, uint64_t seed);

struct Partition {
    syntax::Difficulty category;
    std::vector<const Example*> members;
    std::vector<const Example*> representatives;  // filled by preparation
    ClusteringResult clustering;                  // over members
};

/// Encodes a natural-language question as a fixed-length real vector.
class QuestionEncoder {
public:
    virtual ~QuestionEncoder() = default;
    virtual std::vector<double> encode(const std::string& question) const = 0;
    virtual std::string name() const = 0;
};

/// Deterministic baseline encoder: term frequencies of lowercased
/// alphanumeric tokens, additively hashed (FNV-1a) into 1024 buckets.
class HashedTfEncoder final : public QuestionEncoder {
public:
    static constexpr size_t kDim = 1024;
    std::vector<double> encode(const std::string& question) const override;
    std::string name() const override { return "hashed-tf-1024"; }
};

double cosine_similarity(std::span<const double> a, std::span<const double> b);

using WarningSink = std::function<void(const std::string&)>;

/// Demonstration samplers over a fixed pool. Partition preparation happens
/// once per (k, seed) and is cached; all selection calls afterwards are
/// read-only and safe to run concurrently.
class DemoSelector {
public:
    /// The pool is copied; examples must already carry vectors + categories.
    DemoSelector(std::vector<Example> pool, WarningSink warn = {});

    const std::vector<Example>& pool() const { return pool_; }

    /// FNV-1a over ids, questions, gold SQL and db ids; identifies the pool in
    /// serialized selection artifacts.
    std::string pool_hash() const;

    /// Cluster each category partition and pick, per centroid in index order,
    /// the unselected member nearest to it (distance ties break on the lowest
    /// example id). k is clamped to the partition size with a warning.
    const std::vector<Partition>& prepare_partitions(size_t k, uint64_t seed);

    /// Same preparation over the whole pool, ignoring categories.
    const Partition& prepare_whole_pool(size_t k, uint64_t seed);

    /// Algorithm: categorize the draft, return that category's prepared
    /// representatives. Falls back to whole-pool diversity selection when the
    /// partition is empty.
    std::vector<const Example*> select_similarity_diversity(const std::string& draft_sql,
                                                            size_t k, uint64_t seed);

    /// Uniform sample without replacement, deterministic given seed.
    std::vector<const Example*> select_random(size_t k, uint64_t seed) const;

    /// Top-k by cosine similarity of encoded questions, descending;
    /// similarity ties break on the lowest example id.
    std::vector<const Example*> select_similar(const std::string& question, size_t k,
                                               const QuestionEncoder& encoder) const;

    /// Whole-pool cluster representatives.
    std::vector<const Example*> select_diverse(size_t k, uint64_t seed);

private:
    struct Prepared {
        std::vector<Partition> partitions;
        Partition whole_pool;
        bool whole_pool_ready = false;
    };

    Prepared& prepared_for(size_t k, uint64_t seed);
    void warn(const std::string& msg) const;

    std::vector<Example> pool_;
    WarningSink warn_;
    std::map<std::pair<size_t, uint64_t>, std::unique_ptr<Prepared>> cache_;
    mutable std::vector<std::vector<double>> encoded_questions_;  // lazy, per encoder
    mutable std::string encoded_with_;
};

/// Pick representatives for an already clustered member list; exposed for
/// tests and artifact verification.
std::vector<const Example*> pick_representatives(std::span<const Example* const> members,
                                                 const ClusteringResult& clustering);

}  // namespace t2s::selection
