#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "t2s/errors.hpp"

namespace t2s::exec {

/// A normalized result cell. Numbers compare within 1e-6 relative tolerance
/// (integers and reals interchangeably); text is case-preserved; NULL is a
/// value distinct from every non-NULL.
struct Value {
    enum class Kind { Null, Int, Real, Text, Blob };
    Kind kind = Kind::Null;
    int64_t i = 0;
    double r = 0.0;
    std::string s;

    static Value null();
    static Value integer(int64_t v);
    static Value real(double v);
    static Value text(std::string v);
    static Value blob(std::string hex);
};

bool values_match(const Value& a, const Value& b);

struct ExecutionOutcome {
    bool ok = false;
    std::string error;  // set when !ok; error outcomes carry no rows
    std::vector<std::vector<Value>> rows;
    bool ordered = false;  // query had a top-level ORDER BY
};

struct ExecOptions {
    int timeout_ms = 30000;  // statement budget; hitting it is an execution error
};

/// Spider database layout: <dir>/<db_id>/<db_id>.sqlite
std::string spider_db_path(const std::string& database_dir, const std::string& db_id);

/// Run one statement read-only and capture the normalized result. Statement
/// errors (bad SQL, write attempts, timeouts) land in the outcome as
/// status=error; only a missing database file throws (DbMissing).
ExecutionOutcome execute_sql(const std::string& db_path, const std::string& sql,
                             const ExecOptions& options = {});

/// Result equivalence: sequence equality when either side is ordered,
/// multiset equality otherwise, cells compared with values_match. Outcomes
/// with errors never match anything.
bool results_match(const ExecutionOutcome& a, const ExecutionOutcome& b);

struct CategoryAccuracy {
    size_t total = 0;
    size_t matched = 0;
    double accuracy() const { return total == 0 ? 0.0 : double(matched) / double(total); }
};

struct AccuracyReport {
    double overall = 0.0;
    std::vector<bool> matches;  // aligned with inputs
    std::map<std::string, CategoryAccuracy> by_category;
};

/// Fraction of predictions whose execution result matches the gold query's,
/// with an optional per-category breakdown (categories aligned with inputs;
/// pass empty to skip). Execution errors count as non-matches.
AccuracyReport execution_accuracy(std::span<const std::string> predictions,
                                  std::span<const std::string> golds,
                                  std::span<const std::string> db_paths,
                                  std::span<const std::string> categories = {},
                                  const ExecOptions& options = {});

struct VoteEntry {
    int n = 0;  // shot count that produced the prediction
    std::string prediction;
};

struct VoteGroup {
    std::vector<size_t> members;  // indices into the bundle
};

struct VoteTally {
    std::vector<ExecutionOutcome> outcomes;  // aligned with the bundle
    std::vector<VoteGroup> groups;           // error-free outcomes grouped by result
    std::optional<size_t> winner_group;      // empty when every entry errored
    size_t winner_index = 0;                 // bundle index of the winning prediction
};

/// Execute every prediction, drop execution errors, group the survivors by
/// normalized result and pick the largest group (ties: the group holding the
/// largest n). The winner inside a group is its largest-n member. When all
/// entries error, the largest-n prediction wins by default.
VoteTally majority_vote(std::span<const VoteEntry> bundle, const std::string& db_path,
                        const ExecOptions& options = {});

}  // namespace t2s::exec
