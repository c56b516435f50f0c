#include "t2s/prompt.hpp"

#include <sstream>

namespace t2s::prompt {

std::string to_string(Linearization lin) {
    return lin == Linearization::TextSeq ? "text" : "code";
}

std::string to_string(Augmentation aug) {
    switch (aug) {
        case Augmentation::None: return "none";
        case Augmentation::SemanticInline: return "inline";
        case Augmentation::SemanticBlock: return "block";
        case Augmentation::StructuralOntology: return "ontology";
    }
    return "none";
}

Linearization linearization_from_string(std::string_view s) {
    if (s == "text" || s == "text_seq") return Linearization::TextSeq;
    if (s == "code" || s == "code_seq") return Linearization::CodeSeq;
    throw ConfigError("unknown linearization: " + std::string(s));
}

Augmentation augmentation_from_string(std::string_view s) {
    if (s == "none") return Augmentation::None;
    if (s == "inline" || s == "semantic_inline") return Augmentation::SemanticInline;
    if (s == "block" || s == "semantic_block") return Augmentation::SemanticBlock;
    if (s == "ontology" || s == "structural_ontology") return Augmentation::StructuralOntology;
    throw ConfigError("unknown augmentation: " + std::string(s));
}

namespace {

// Python repr of a string: single quotes unless the text contains one.
std::string py_repr(const std::string& s) {
    bool has_single = s.find('\'') != std::string::npos;
    bool has_double = s.find('"') != std::string::npos;
    char quote = (has_single && !has_double) ? '"' : '\'';
    std::string out(1, quote);
    for (char c : s) {
        if (c == quote || c == '\\') out += '\\';
        out += c;
    }
    out += quote;
    return out;
}

// Nested {table: {column: description}} dict in block-comment form.
std::string descriptions_dict(const schema::DatabaseSchema& db,
                              const schema::ColumnDescriptions& descriptions) {
    std::string out = "{";
    for (size_t t = 0; t < db.tables.size(); ++t) {
        const auto& table = db.tables[t];
        if (t) out += ", ";
        out += py_repr(table.name) + ": {";
        for (size_t c = 0; c < table.columns.size(); ++c) {
            if (c) out += ", ";
            const std::string* desc = descriptions.find(table.name, table.columns[c].name);
            if (!desc)
                throw MissingAugmentationData("no description for " + table.name + "." +
                                              table.columns[c].name);
            out += py_repr(table.columns[c].name) + ": " + py_repr(*desc);
        }
        out += "}";
    }
    out += "}";
    return out;
}

void validate(const SchemaContext& ctx, const PromptConfig& config) {
    if (!ctx.db) throw MissingAugmentationData("schema context has no database");
    if (config.linearization == Linearization::TextSeq &&
        config.augmentation != Augmentation::None)
        throw ConfigError("schema augmentation requires the code-seq linearization");
    if (config.augmentation == Augmentation::SemanticInline ||
        config.augmentation == Augmentation::SemanticBlock) {
        if (!ctx.descriptions)
            throw MissingAugmentationData("column descriptions not loaded for " + ctx.db->db_id);
    }
    if (config.augmentation == Augmentation::StructuralOntology && !ctx.ontology)
        throw MissingAugmentationData("ontology summary not built for " + ctx.db->db_id);
}

// Shared layout: schema block, optional augmentation blocks, question line.
std::string render_header(const std::string& question, const SchemaContext& ctx,
                          const PromptConfig& config) {
    validate(ctx, config);
    std::string out;
    if (config.linearization == Linearization::TextSeq) {
        out += "Given the following database schema: \n";
        out += schema::to_text_sequence(*ctx.db);
        out += "\n\nAnswer the following: " + question + "\n\n";
        return out;
    }
    out += "/* Given the following database schema: */\n";
    const schema::ColumnDescriptions* inline_comments =
        config.augmentation == Augmentation::SemanticInline ? ctx.descriptions : nullptr;
    out += schema::to_create_sequence(*ctx.db, inline_comments);
    out += "\n\n";
    if (config.augmentation == Augmentation::SemanticBlock) {
        out += "/* Table column descriptions:\n";
        out += descriptions_dict(*ctx.db, *ctx.descriptions);
        out += " */\n";
    } else if (config.augmentation == Augmentation::StructuralOntology &&
               !ctx.ontology->rendered.empty()) {
        out += ctx.ontology->rendered;
        out += "\n";
    }
    out += "/* Answer the following: " + question + " */\n\n";
    return out;
}

}  // namespace

std::string render_demonstration(const selection::Example& example, const SchemaContext& ctx,
                                 const PromptConfig& config) {
    return render_header(example.question, ctx, config) + example.gold_sql;
}

std::string render_test_block(const std::string& question, const SchemaContext& ctx,
                              const PromptConfig& config) {
    return render_header(question, ctx, config);
}

Prompt build_prompt(std::span<const selection::Example* const> demos,
                    const std::string& test_question, const std::string& test_db_id,
                    const SchemaProvider& schemas, const PromptConfig& config,
                    size_t token_limit) {
    if (int(demos.size()) != config.n_shots)
        throw ConfigError("build_prompt: demo count does not match n_shots");
    Prompt prompt;
    prompt.config = config;
    std::string text;
    for (const auto* demo : demos) {
        text += render_demonstration(*demo, schemas(demo->db_id), config);
        text += "\n\n";
        prompt.demo_ids.push_back(demo->id);
    }
    text += render_test_block(test_question, schemas(test_db_id), config);
    prompt.text = std::move(text);
    prompt.token_estimate = (prompt.text.size() + 3) / 4;
    if (token_limit > 0 && prompt.token_estimate > token_limit)
        throw ContextOverflowError("prompt estimate " + std::to_string(prompt.token_estimate) +
                                   " tokens exceeds limit " + std::to_string(token_limit));
    return prompt;
}

}  // namespace t2s::prompt
