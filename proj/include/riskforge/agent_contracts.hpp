#pragma once

#include "riskforge/common.hpp"
#include "riskforge/context_store.hpp"
#include "riskforge/grounding.hpp"
#include "riskforge/llm_gateway.hpp"
#include "riskforge/schema.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace riskforge {

struct AgentContract {
    AgentRole role = AgentRole::RiskIntake;
    std::string title;
    std::vector<std::string> reads;
    std::string writes;
    std::string prompt_template;
    json output_schema;
    std::optional<std::string> grounding_query;
};

// The six entry-kinds written by the contracts, in pipeline order.
const std::vector<std::string>& registered_entry_kinds();
std::string_view writes_key(AgentRole role) noexcept;
const std::vector<std::string>& reads_of(AgentRole role);

class MissingContextKeyError : public Error {
public:
    MissingContextKeyError(std::string key, std::string role)
        : Error(ErrorCode::MissingContextKey,
                "role " + role + " needs context entry '" + key + "' which has not been written"),
          key_(std::move(key)),
          role_(std::move(role)) {}

    const std::string& key() const noexcept { return key_; }
    const std::string& role() const noexcept { return role_; }

private:
    std::string key_;
    std::string role_;
};

class SchemaViolationError : public Error {
public:
    SchemaViolationError(std::string role, std::vector<Violation> violations);
    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

class AgentFailedError : public Error {
public:
    AgentFailedError(std::string role, int attempts, std::vector<Violation> last_violations);
    int attempts() const noexcept { return attempts_; }
    const std::vector<Violation>& last_violations() const noexcept { return violations_; }

private:
    int attempts_;
    std::vector<Violation> violations_;
};

/// Contracts for all six roles plus the shared prompt frame and the
/// questionnaire schema. Loaded once, immutable afterwards.
///
/// Templates directory: `frame.txt` and `<role>.txt` per role. Schemas
/// directory: `<role>.schema.json` per role and `questionnaire.schema.json`.
class ContractSet {
public:
    static ContractSet load(const std::filesystem::path& templates_dir,
                            const std::filesystem::path& schemas_dir);

    const AgentContract& at(AgentRole role) const;
    const std::string& frame() const noexcept { return frame_; }
    const json& questionnaire_schema() const noexcept { return questionnaire_schema_; }

    // Object with one property per entry-kind, each holding that role's schema.
    json combined_schema() const;

private:
    std::map<AgentRole, AgentContract> contracts_;
    std::string frame_;
    json questionnaire_schema_;
};

// Replaces every `{{name}}`; throws InvalidArgument on an unknown or
// unterminated placeholder.
std::string substitute(std::string_view text, const std::map<std::string, std::string>& values);

struct PromptOptions {
    SchemaMode mode = SchemaMode::CaseStudy;
    // Intake reads the questionnaire directly rather than the store.
    const json* questionnaire = nullptr;
};

/// Builds the full prompt for a role. Identifiers in the serialized context
/// that are not among the supplied excerpts are replaced with a marker, so
/// every framework identifier in the prompt comes from the excerpt block.
std::string assemble_prompt(const ContractSet& contracts, AgentRole role, const ContextSnapshot& snapshot,
                            const std::vector<FrameworkExcerpt>& grounding, const PromptOptions& options = {});

// One combined prompt carrying all six role instructions.
std::string assemble_single_prompt(const ContractSet& contracts, const json& questionnaire,
                                   const std::vector<FrameworkExcerpt>& grounding, SchemaMode mode);

inline constexpr std::string_view kScrubbedCitation = "[unverified citation removed]";
inline constexpr std::string_view kRetryMarker = "=== PREVIOUS ATTEMPT REJECTED ===";

// Byte range of the first balanced `{...}` that parses as a JSON object.
std::optional<std::pair<std::size_t, std::size_t>> extract_balanced_object(std::string_view raw);

struct ValidationOutcome {
    bool valid = false;
    std::vector<Violation> violations;
    int attempt = 1;
};

struct ValidatedOutput {
    ValidationOutcome outcome;
    json document;
};

/// Extracts and schema-checks an agent's raw output. Throws Unparseable when
/// no JSON object can be found and SchemaViolationError when it fails its
/// schema.
ValidatedOutput validate_output(const ContractSet& contracts, AgentRole role, std::string_view raw,
                                SchemaMode mode = SchemaMode::CaseStudy, int attempt = 1);

// Same, against an explicit schema (used for the combined single-agent output).
ValidatedOutput validate_against(const json& schema, std::string_view label, std::string_view raw,
                                 SchemaMode mode, int attempt = 1);

std::string format_violations(const std::vector<Violation>& violations);

struct AgentRunOptions {
    ModelConfig config;
    SchemaMode mode = SchemaMode::CaseStudy;
    int retry_limit = 2;
    std::size_t grounding_k = 4;
    const json* questionnaire = nullptr;
    // Called with the final prompt of the first attempt, before any model call.
    std::function<void(AgentRole, const std::string&)> on_prompt;
};

struct AgentRunResult {
    ContextEntry entry;
    int attempts = 0;
    double model_seconds = 0.0;
    std::vector<ValidationOutcome> outcomes;
};

struct ValidatedCompletion {
    json document;
    int attempts = 0;
    double model_seconds = 0.0;
    std::vector<ValidationOutcome> outcomes;
};

/// Calls the model and validates against `schema`, re-prompting with the
/// violation list after each failure. Throws AgentFailedError once
/// retry_limit re-prompts are used up.
ValidatedCompletion complete_with_retries(Gateway& gateway, const std::string& role_name,
                                          const std::string& base_prompt, const ModelConfig& config,
                                          const json& schema, SchemaMode mode, int retry_limit);

// Excerpts handed to a role: keyword retrieval for its grounding query plus
// the corpus entries for identifiers already cited in the entries it reads.
std::vector<FrameworkExcerpt> grounding_for(const ContractSet& contracts, AgentRole role,
                                            const ContextSnapshot& snapshot, const json* questionnaire,
                                            const Corpus& corpus, std::size_t k);

/// assemble_prompt -> complete -> validate_output, re-prompting with the
/// violation list up to retry_limit times. On success appends the document
/// under the contract's writes key and nothing else.
AgentRunResult run_agent(const ContractSet& contracts, AgentRole role, ContextStore& store, Gateway& gateway,
                         const Corpus& corpus, const AgentRunOptions& options);

}  // namespace riskforge
