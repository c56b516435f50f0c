#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "t2s/schema.hpp"
#include "t2s/selection.hpp"

namespace t2s::prompt {

enum class Linearization { TextSeq, CodeSeq };
enum class Augmentation { None, SemanticInline, SemanticBlock, StructuralOntology };

std::string to_string(Linearization lin);
std::string to_string(Augmentation aug);
Linearization linearization_from_string(std::string_view s);
Augmentation augmentation_from_string(std::string_view s);

struct PromptConfig {
    Linearization linearization = Linearization::CodeSeq;
    Augmentation augmentation = Augmentation::None;
    int n_shots = 0;
};

/// Everything rendering needs to know about one database. Augmentation
/// pointers may be null when the config does not use them.
struct SchemaContext {
    const schema::DatabaseSchema* db = nullptr;
    const schema::ColumnDescriptions* descriptions = nullptr;
    const schema::OntologySummary* ontology = nullptr;
};

/// Resolves a db_id to its schema and augmentation data.
using SchemaProvider = std::function<SchemaContext(const std::string& db_id)>;

/// One fully worked example: schema block, question, gold SQL.
/// Augmentations only combine with the code-seq linearization; text-seq with
/// any augmentation raises ConfigError. Missing descriptions or ontology for
/// a requested augmentation raise MissingAugmentationData.
std::string render_demonstration(const selection::Example& example, const SchemaContext& ctx,
                                 const PromptConfig& config);

/// The trailing block for the instance under test: same layout, ends right
/// after the question line (two newlines after it), never contains gold SQL.
std::string render_test_block(const std::string& question, const SchemaContext& ctx,
                              const PromptConfig& config);

struct Prompt {
    std::string text;
    std::vector<std::string> demo_ids;
    PromptConfig config;
    size_t token_estimate = 0;  // ceil(chars / 4)
};

/// Join |demos| rendered demonstrations (one blank line between blocks) and
/// the test block. Requires demos.size() == config.n_shots. When token_limit
/// is nonzero and the estimate exceeds it, throws ContextOverflowError; the
/// caller decides which shots to drop.
Prompt build_prompt(std::span<const selection::Example* const> demos,
                    const std::string& test_question, const std::string& test_db_id,
                    const SchemaProvider& schemas, const PromptConfig& config,
                    size_t token_limit = 0);

}  // namespace t2s::prompt
