#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "t2s/selection.hpp"

namespace t2s::analysis {

/// Fraction of the vocabulary present in at least one demonstration's gold
/// SQL (union semantics, so duplicates add nothing).
double syntax_coverage(std::span<const selection::Example* const> demos,
                       const syntax::SyntaxVocabulary& vocab);

/// Alternative denominator: of the elements present in `relative_to` (the
/// test query's vector), the fraction covered by the demonstrations. Returns
/// 1.0 for an empty reference vector.
double syntax_coverage_relative(std::span<const selection::Example* const> demos,
                                const syntax::SyntaxVector& relative_to);

/// 1 / (1 + mean Euclidean distance) between the draft vector and the
/// demonstration vectors. In (0, 1]; exactly 1 iff every demo vector equals
/// the draft vector.
double syntax_similarity(const syntax::SyntaxVector& draft_vector,
                         std::span<const selection::Example* const> demos);

struct InstanceDiagnostics {
    std::string id;
    double coverage = 0.0;
    double similarity = 0.0;
    double score = 0.0;  // coverage + similarity
};

struct PromptDiagnostics {
    double coverage = 0.0;    // mean over instances
    double similarity = 0.0;  // mean over instances
    double score = 0.0;       // coverage + similarity
    std::vector<InstanceDiagnostics> per_instance;
};

/// Coverage/similarity per prompt plus means. demo_lists[i] are the
/// demonstrations chosen for draft_vectors[i].
PromptDiagnostics diagnose(std::span<const std::vector<const selection::Example*>> demo_lists,
                           std::span<const syntax::SyntaxVector> draft_vectors,
                           std::span<const std::string> instance_ids,
                           const syntax::SyntaxVocabulary& vocab);

struct StrategyRow {
    std::string strategy;
    double coverage = 0.0;
    double similarity = 0.0;
    double score = 0.0;
    std::optional<double> exec_accuracy;
};

/// CSV with columns strategy,coverage,similarity,score,exec_accuracy.
std::string to_csv(std::span<const StrategyRow> rows);
void write_csv(const std::string& path, std::span<const StrategyRow> rows);

}  // namespace t2s::analysis
