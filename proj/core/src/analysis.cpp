#include "t2s/analysis.hpp"

#include <fstream>
#include <sstream>

namespace t2s::analysis {

double syntax_coverage(std::span<const selection::Example* const> demos,
                       const syntax::SyntaxVocabulary& vocab) {
    if (demos.empty()) throw Error("syntax_coverage: no demonstrations");
    std::vector<bool> present(vocab.size(), false);
    for (const auto* demo : demos) {
        const auto& values = demo->vector.values;
        for (size_t i = 0; i < values.size() && i < present.size(); ++i)
            if (values[i] > 0) present[i] = true;
    }
    size_t covered = 0;
    for (bool p : present)
        if (p) ++covered;
    return double(covered) / double(vocab.size());
}

double syntax_coverage_relative(std::span<const selection::Example* const> demos,
                                const syntax::SyntaxVector& relative_to) {
    if (demos.empty()) throw Error("syntax_coverage_relative: no demonstrations");
    size_t wanted = 0, covered = 0;
    for (size_t i = 0; i < relative_to.values.size(); ++i) {
        if (relative_to.values[i] <= 0) continue;
        ++wanted;
        for (const auto* demo : demos) {
            if (i < demo->vector.values.size() && demo->vector.values[i] > 0) {
                ++covered;
                break;
            }
        }
    }
    return wanted == 0 ? 1.0 : double(covered) / double(wanted);
}

double syntax_similarity(const syntax::SyntaxVector& draft_vector,
                         std::span<const selection::Example* const> demos) {
    if (demos.empty()) throw Error("syntax_similarity: no demonstrations");
    double total = 0.0;
    for (const auto* demo : demos)
        total += syntax::euclidean_distance(draft_vector, demo->vector);
    double mean = total / double(demos.size());
    return 1.0 / (1.0 + mean);
}

PromptDiagnostics diagnose(std::span<const std::vector<const selection::Example*>> demo_lists,
                           std::span<const syntax::SyntaxVector> draft_vectors,
                           std::span<const std::string> instance_ids,
                           const syntax::SyntaxVocabulary& vocab) {
    if (demo_lists.size() != draft_vectors.size())
        throw Error("diagnose: demo lists and draft vectors must align");
    PromptDiagnostics out;
    for (size_t i = 0; i < demo_lists.size(); ++i) {
        InstanceDiagnostics inst;
        inst.id = i < instance_ids.size() ? instance_ids[i] : std::to_string(i);
        inst.coverage = syntax_coverage(demo_lists[i], vocab);
        inst.similarity = syntax_similarity(draft_vectors[i], demo_lists[i]);
        inst.score = inst.coverage + inst.similarity;
        out.coverage += inst.coverage;
        out.similarity += inst.similarity;
        out.per_instance.push_back(std::move(inst));
    }
    if (!out.per_instance.empty()) {
        out.coverage /= double(out.per_instance.size());
        out.similarity /= double(out.per_instance.size());
    }
    out.score = out.coverage + out.similarity;
    return out;
}

std::string to_csv(std::span<const StrategyRow> rows) {
    std::ostringstream out;
    out << "strategy,coverage,similarity,score,exec_accuracy\n";
    out.setf(std::ios::fixed);
    out.precision(6);
    for (const auto& row : rows) {
        out << row.strategy << ',' << row.coverage << ',' << row.similarity << ','
            << row.score << ',';
        if (row.exec_accuracy) out << *row.exec_accuracy;
        out << '\n';
    }
    return out.str();
}

void write_csv(const std::string& path, std::span<const StrategyRow> rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << to_csv(rows);
}

}  // namespace t2s::analysis
