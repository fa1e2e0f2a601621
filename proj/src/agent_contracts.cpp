#include "riskforge/agent_contracts.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace riskforge {

namespace fs = std::filesystem;

namespace {

struct RoleSpec {
    AgentRole role;
    const char* title;
    std::vector<std::string> reads;
    const char* writes;
    const char* grounding_query;  // nullptr: no retrieval
};

const std::vector<RoleSpec>& role_specs() {
    static const std::vector<RoleSpec> specs = {
        {AgentRole::RiskIntake, "Risk Intake", {}, "org_profile", nullptr},
        {AgentRole::ThreatModeling, "Threat Modeling", {"org_profile"}, "threat_model",
         "threat actors attack vectors phishing malware ransomware unauthorized access unpatched "
         "vulnerabilities data exposure {{profile}}"},
        {AgentRole::ControlAssessment, "Control Assessment", {"org_profile"}, "control_assessment",
         "asset inventory risk assessment access control multi-factor authentication logging monitoring "
         "incident response recovery backups {{profile}}"},
        {AgentRole::RiskScoring, "Risk Scoring", {"threat_model", "control_assessment"}, "risk_register",
         "risk assessment vulnerabilities threats likelihood impact {{profile}}"},
        {AgentRole::Mitigation, "Mitigation Recommendation", {"risk_register", "org_profile"}, "recommendations",
         "security policy multi-factor authentication incident response plan endpoint detection backups "
         "third-party supplier {{profile}}"},
        {AgentRole::ReportSynthesis, "Report Synthesis",
         {"org_profile", "threat_model", "control_assessment", "risk_register", "recommendations"}, "report",
         "governance risk management strategy roles responsibilities {{profile}}"},
    };
    return specs;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_schema(const fs::path& path) {
    json doc = json::parse(read_text(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw Error(ErrorCode::ConfigError, path.string() + ": schema is not a JSON object");
    }
    return doc;
}

std::string count_rule(SchemaMode mode) {
    return mode == SchemaMode::CrossSector ? "exactly 3" : "between 3 and 10";
}

std::string joined(const json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (!value.is_array()) return {};
    std::string out;
    for (const auto& item : value) {
        if (!item.is_string()) continue;
        if (!out.empty()) out += ' ';
        out += item.get<std::string>();
    }
    return out;
}

// Industry, systems, data locations and regulatory scope from whichever
// profile document is available.
std::string profile_digest(const ContextSnapshot& snapshot, const json* questionnaire) {
    const json* source = questionnaire;
    if (const auto* entry = snapshot.find("org_profile")) source = &entry->payload;
    if (!source || !source->is_object()) return {};
    std::string out;
    for (const char* field : {"industry", "systems", "data_locations", "regulatory_scope"}) {
        if (!source->contains(field)) continue;
        if (!out.empty()) out += ' ';
        out += joined((*source)[field]);
    }
    return out;
}

std::string scrub_unlisted(std::string text, const std::set<std::pair<Framework, std::string>>& allowed) {
    auto matches = parse_identifier(text);
    for (auto it = matches.rbegin(); it != matches.rend(); ++it) {
        if (allowed.count({it->framework, it->identifier})) continue;
        text.replace(it->begin, it->end - it->begin, kScrubbedCitation);
    }
    return text;
}

std::string render_excerpts(const std::vector<FrameworkExcerpt>& grounding) {
    std::ostringstream out;
    out << "=== FRAMEWORK EXCERPTS ===\n";
    if (grounding.empty()) out << "(none supplied)\n";
    for (const auto& e : grounding) {
        out << "[" << e.citation_label() << "] " << e.title << "\n" << e.body << "\n";
    }
    out << "=== END FRAMEWORK EXCERPTS ===\n";
    if (grounding.empty()) {
        out << "No framework excerpts were supplied for this task. Do not cite any framework control "
               "identifier; describe controls in plain words instead.";
    } else {
        out << "Cite framework controls solely by the identifiers shown in the excerpts above. Never cite an "
               "identifier that is not listed there; if no excerpt fits a point, say so in plain words.";
    }
    return out.str();
}

std::string render_entry(std::string_view label, const json& payload,
                         const std::set<std::pair<Framework, std::string>>& allowed) {
    std::string out = "[" + std::string(label) + "]\n";
    out += scrub_unlisted(canonical(payload), allowed);
    return out;
}

std::string role_instructions(const AgentContract& contract, SchemaMode mode) {
    return substitute(contract.prompt_template, {{"count_rule", count_rule(mode)}});
}

}  // namespace

const std::vector<std::string>& registered_entry_kinds() {
    static const std::vector<std::string> kinds = [] {
        std::vector<std::string> out;
        for (const auto& spec : role_specs()) out.emplace_back(spec.writes);
        return out;
    }();
    return kinds;
}

std::string_view writes_key(AgentRole role) noexcept {
    for (const auto& spec : role_specs()) {
        if (spec.role == role) return spec.writes;
    }
    return {};
}

const std::vector<std::string>& reads_of(AgentRole role) {
    for (const auto& spec : role_specs()) {
        if (spec.role == role) return spec.reads;
    }
    throw Error(ErrorCode::Internal, "unknown role");
}

SchemaViolationError::SchemaViolationError(std::string role, std::vector<Violation> violations)
    : Error(ErrorCode::SchemaViolation, "output of " + role + " violates its schema:\n" + format_violations(violations)),
      violations_(std::move(violations)) {}

AgentFailedError::AgentFailedError(std::string role, int attempts, std::vector<Violation> last_violations)
    : Error(ErrorCode::AgentFailed, role + " failed validation after " + std::to_string(attempts) +
                                        " attempts:\n" + format_violations(last_violations)),
      attempts_(attempts),
      violations_(std::move(last_violations)) {}

ContractSet ContractSet::load(const fs::path& templates_dir, const fs::path& schemas_dir) {
    ContractSet set;
    set.frame_ = read_text(templates_dir / "frame.txt");
    for (const char* required : {"{{role_title}}", "{{context}}", "{{excerpts}}", "{{instructions}}"}) {
        if (set.frame_.find(required) == std::string::npos) {
            throw Error(ErrorCode::ConfigError, "frame.txt lacks placeholder " + std::string(required));
        }
    }
    set.questionnaire_schema_ = read_schema(schemas_dir / "questionnaire.schema.json");

    for (const auto& spec : role_specs()) {
        AgentContract c;
        c.role = spec.role;
        c.title = spec.title;
        c.reads = spec.reads;
        c.writes = spec.writes;
        const std::string name(to_string(spec.role));
        c.prompt_template = read_text(templates_dir / (name + ".txt"));
        c.output_schema = read_schema(schemas_dir / (name + ".schema.json"));
        if (spec.grounding_query) c.grounding_query = spec.grounding_query;
        set.contracts_.emplace(spec.role, std::move(c));
    }
    return set;
}

const AgentContract& ContractSet::at(AgentRole role) const {
    return contracts_.at(role);
}

json ContractSet::combined_schema() const {
    json schema = {{"type", "object"}, {"required", json::array()}, {"properties", json::object()}};
    for (const auto& [role, contract] : contracts_) {
        schema["required"].push_back(contract.writes);
        schema["properties"][contract.writes] = contract.output_schema;
    }
    return schema;
}

std::string substitute(std::string_view text, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t open = text.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(text.substr(pos));
            break;
        }
        out.append(text.substr(pos, open - pos));
        const std::size_t close = text.find("}}", open + 2);
        if (close == std::string_view::npos) {
            throw Error(ErrorCode::InvalidArgument, "unterminated placeholder in template");
        }
        const std::string name(text.substr(open + 2, close - open - 2));
        auto it = values.find(name);
        if (it == values.end()) throw Error(ErrorCode::InvalidArgument, "unknown template placeholder {{" + name + "}}");
        out += it->second;
        pos = close + 2;
    }
    return out;
}

std::string assemble_prompt(const ContractSet& contracts, AgentRole role, const ContextSnapshot& snapshot,
                            const std::vector<FrameworkExcerpt>& grounding, const PromptOptions& options) {
    const auto& contract = contracts.at(role);
    const std::string role_name(to_string(role));

    std::set<std::pair<Framework, std::string>> allowed;
    for (const auto& e : grounding) allowed.emplace(e.framework, e.identifier);

    std::string context;
    if (role == AgentRole::RiskIntake) {
        if (!options.questionnaire) throw MissingContextKeyError("questionnaire", role_name);
        context = render_entry("questionnaire | supplied by the organization", *options.questionnaire, allowed);
    }
    for (const auto& key : contract.reads) {
        const auto* entry = snapshot.find(key);
        if (!entry) throw MissingContextKeyError(key, role_name);
        if (!context.empty()) context += "\n\n";
        context += render_entry(key + " | revision " + std::to_string(entry->revision) + " | written by " +
                                    entry->agent_id,
                                entry->payload, allowed);
    }

    return substitute(contracts.frame(), {
                                             {"role_title", contract.title},
                                             {"context", context},
                                             {"excerpts", render_excerpts(grounding)},
                                             {"instructions", role_instructions(contract, options.mode)},
                                         });
}

std::string assemble_single_prompt(const ContractSet& contracts, const json& questionnaire,
                                   const std::vector<FrameworkExcerpt>& grounding, SchemaMode mode) {
    std::set<std::pair<Framework, std::string>> allowed;
    for (const auto& e : grounding) allowed.emplace(e.framework, e.identifier);

    std::string instructions =
        "Perform all six stages of the assessment yourself in one pass. Return ONE JSON object whose keys are "
        "org_profile, threat_model, control_assessment, risk_register, recommendations and report; the value "
        "under each key is the object that stage's instructions ask for.";
    for (AgentRole role : kAllRoles) {
        const auto& contract = contracts.at(role);
        instructions += "\n\n--- " + contract.title + " (key: " + contract.writes + ") ---\n";
        instructions += role_instructions(contract, mode);
    }

    return substitute(contracts.frame(),
                      {
                          {"role_title", "Single-Agent Assessor"},
                          {"context", render_entry("questionnaire | supplied by the organization", questionnaire, allowed)},
                          {"excerpts", render_excerpts(grounding)},
                          {"instructions", instructions},
                      });
}

std::optional<std::pair<std::size_t, std::size_t>> extract_balanced_object(std::string_view raw) {
    std::size_t start = raw.find('{');
    while (start != std::string_view::npos) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        std::size_t end = std::string_view::npos;
        for (std::size_t i = start; i < raw.size(); ++i) {
            const char c = raw[i];
            if (in_string) {
                if (escaped) escaped = false;
                else if (c == '\\') escaped = true;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '{') ++depth;
            else if (c == '}' && --depth == 0) {
                end = i + 1;
                break;
            }
        }
        if (end == std::string_view::npos) return std::nullopt;
        json probe = json::parse(raw.substr(start, end - start), nullptr, false);
        if (!probe.is_discarded() && probe.is_object()) return std::make_pair(start, end);
        start = raw.find('{', start + 1);
    }
    return std::nullopt;
}

std::string format_violations(const std::vector<Violation>& violations) {
    std::string out;
    for (const auto& v : violations) {
        out += "- " + (v.path.empty() ? std::string("/") : v.path) + ": " + v.message + "\n";
    }
    return out;
}

ValidatedOutput validate_against(const json& schema, std::string_view label, std::string_view raw,
                                 SchemaMode mode, int attempt) {
    auto span = extract_balanced_object(raw);
    if (!span) {
        throw Error(ErrorCode::Unparseable, "output of " + std::string(label) + " contains no JSON object");
    }
    ValidatedOutput out;
    out.document = json::parse(raw.substr(span->first, span->second - span->first));
    out.outcome.attempt = attempt;
    out.outcome.violations = validate_schema(schema, out.document, mode);
    out.outcome.valid = out.outcome.violations.empty();
    if (!out.outcome.valid) throw SchemaViolationError(std::string(label), out.outcome.violations);
    return out;
}

ValidatedOutput validate_output(const ContractSet& contracts, AgentRole role, std::string_view raw,
                                SchemaMode mode, int attempt) {
    return validate_against(contracts.at(role).output_schema, to_string(role), raw, mode, attempt);
}

std::vector<FrameworkExcerpt> grounding_for(const ContractSet& contracts, AgentRole role,
                                            const ContextSnapshot& snapshot, const json* questionnaire,
                                            const Corpus& corpus, std::size_t k) {
    const auto& contract = contracts.at(role);
    std::vector<FrameworkExcerpt> out;
    std::set<std::pair<Framework, std::string>> seen;
    if (contract.grounding_query) {
        const std::string query =
            substitute(*contract.grounding_query, {{"profile", profile_digest(snapshot, questionnaire)}});
        for (auto& e : corpus.retrieve(query, k)) {
            seen.emplace(e.framework, e.identifier);
            out.push_back(std::move(e));
        }
    }
    for (const auto& key : contract.reads) {
        const auto* entry = snapshot.find(key);
        if (!entry) continue;
        for (const auto& m : parse_identifier(canonical(entry->payload))) {
            const auto* excerpt = corpus.find(m.framework, m.identifier);
            if (excerpt && seen.emplace(m.framework, m.identifier).second) out.push_back(*excerpt);
        }
    }
    return out;
}

ValidatedCompletion complete_with_retries(Gateway& gateway, const std::string& role_name,
                                          const std::string& base_prompt, const ModelConfig& config,
                                          const json& schema, SchemaMode mode, int retry_limit) {
    ValidatedCompletion result;
    std::string prompt = base_prompt;
    std::vector<Violation> last;
    const int max_attempts = std::max(0, retry_limit) + 1;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        result.attempts = attempt;
        const auto completion = gateway.complete(CompletionRequest::make(role_name, prompt, config));
        result.model_seconds += completion.latency_seconds;

        try {
            auto validated = validate_against(schema, role_name, completion.text, mode, attempt);
            result.outcomes.push_back(validated.outcome);
            result.document = std::move(validated.document);
            return result;
        } catch (const SchemaViolationError& e) {
            last = e.violations();
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Unparseable) throw;
            last = {{"", "no JSON object found in output"}};
        }
        result.outcomes.push_back({false, last, attempt});
        prompt = base_prompt + "\n\n" + std::string(kRetryMarker) +
                 "\nYour previous output failed validation:\n" + format_violations(last) +
                 "Return a corrected JSON object that fixes every listed problem.";
    }
    throw AgentFailedError(role_name, max_attempts, last);
}

AgentRunResult run_agent(const ContractSet& contracts, AgentRole role, ContextStore& store, Gateway& gateway,
                         const Corpus& corpus, const AgentRunOptions& options) {
    const auto& contract = contracts.at(role);
    const std::string role_name(to_string(role));

    const ContextSnapshot snapshot = store.snapshot(contract.reads);
    const auto grounding = grounding_for(contracts, role, snapshot, options.questionnaire, corpus, options.grounding_k);
    const std::string prompt =
        assemble_prompt(contracts, role, snapshot, grounding, {options.mode, options.questionnaire});
    if (options.on_prompt) options.on_prompt(role, prompt);

    auto completion = complete_with_retries(gateway, role_name, prompt, options.config, contract.output_schema,
                                            options.mode, options.retry_limit);
    AgentRunResult result;
    result.attempts = completion.attempts;
    result.model_seconds = completion.model_seconds;
    result.outcomes = std::move(completion.outcomes);
    result.entry = store.append_entry(contract.writes, role_name, std::move(completion.document));
    return result;
}

}  // namespace riskforge
