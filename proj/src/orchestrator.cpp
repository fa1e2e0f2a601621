#include "riskforge/orchestrator.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <thread>

namespace riskforge {

namespace fs = std::filesystem;

std::string_view to_string(RunMode mode) noexcept {
    return mode == RunMode::SingleAgent ? "single_agent" : "multi_agent";
}

std::optional<RunMode> parse_run_mode(std::string_view text) noexcept {
    if (text == "multi_agent" || text == "multi") return RunMode::MultiAgent;
    if (text == "single_agent" || text == "single") return RunMode::SingleAgent;
    return std::nullopt;
}

std::string_view to_string(FailureKind kind) noexcept {
    switch (kind) {
        case FailureKind::ContextOverflow: return "context_overflow";
        case FailureKind::AgentFailed: return "agent_failed";
        case FailureKind::ProviderError: return "provider_error";
    }
    return "agent_failed";
}

std::optional<FailureKind> parse_failure_kind(std::string_view text) noexcept {
    if (text == "context_overflow") return FailureKind::ContextOverflow;
    if (text == "agent_failed") return FailureKind::AgentFailed;
    if (text == "provider_error") return FailureKind::ProviderError;
    return std::nullopt;
}

SchemaMode default_schema_mode(RunMode mode) noexcept {
    return mode == RunMode::SingleAgent ? SchemaMode::CrossSector : SchemaMode::CaseStudy;
}

PipelinePlan PipelinePlan::standard() {
    return PipelinePlan{{
        {AgentRole::RiskIntake},
        {AgentRole::ThreatModeling, AgentRole::ControlAssessment},
        {AgentRole::RiskScoring},
        {AgentRole::Mitigation},
        {AgentRole::ReportSynthesis},
    }};
}

void PipelinePlan::validate() const {
    std::set<AgentRole> seen;
    std::set<std::string> written;
    for (const auto& stage : stages) {
        for (AgentRole role : stage) {
            if (!seen.insert(role).second) {
                throw Error(ErrorCode::InvalidArgument, "role " + std::string(to_string(role)) + " planned twice");
            }
            for (const auto& key : reads_of(role)) {
                if (!written.count(key)) {
                    throw Error(ErrorCode::InvalidArgument, "role " + std::string(to_string(role)) + " reads '" + key +
                                                                "' before any earlier stage writes it");
                }
            }
        }
        for (AgentRole role : stage) written.insert(std::string(writes_key(role)));
    }
    if (seen.size() != kAllRoles.size()) throw Error(ErrorCode::InvalidArgument, "plan does not cover all six roles");
}

json to_json(const RunRecord& r) {
    return json{
        {"run_id", r.run_id},
        {"profile_id", r.profile_id},
        {"model_id", r.model_id},
        {"mode", to_string(r.mode)},
        {"seed", r.seed},
        {"window", r.window},
        {"completed", r.completed},
        {"failed_stage", r.failed_stage ? json(*r.failed_stage) : json(nullptr)},
        {"failure_kind", r.failure_kind ? json(to_string(*r.failure_kind)) : json(nullptr)},
        {"failure_detail", r.failure_detail},
        {"wall_seconds", r.wall_seconds},
        {"structural_ok", r.structural_ok},
        {"unique_threat_titles", r.unique_threat_titles},
    };
}

RunRecord run_record_from_json(const json& doc) {
    RunRecord r;
    try {
        r.run_id = doc.at("run_id").get<std::string>();
        r.profile_id = doc.at("profile_id").get<std::string>();
        r.model_id = doc.at("model_id").get<std::string>();
        auto mode = parse_run_mode(doc.at("mode").get<std::string>());
        if (!mode) throw Error(ErrorCode::InvalidArgument, "unknown mode in run record");
        r.mode = *mode;
        r.seed = doc.value("seed", std::int64_t{0});
        r.window = doc.value("window", std::size_t{0});
        r.completed = doc.at("completed").get<bool>();
        if (doc.contains("failed_stage") && doc["failed_stage"].is_string()) {
            r.failed_stage = doc["failed_stage"].get<std::string>();
        }
        if (doc.contains("failure_kind") && doc["failure_kind"].is_string()) {
            r.failure_kind = parse_failure_kind(doc["failure_kind"].get<std::string>());
        }
        r.failure_detail = doc.value("failure_detail", std::string{});
        r.wall_seconds = doc.at("wall_seconds").get<double>();
        r.structural_ok = doc.value("structural_ok", false);
        r.unique_threat_titles = doc.value("unique_threat_titles", std::vector<std::string>{});
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("bad run record: ") + e.what());
    }
    if (r.completed == r.failed_stage.has_value()) {
        throw Error(ErrorCode::InvalidArgument, "run record " + r.run_id + ": completed must be true iff no failed_stage");
    }
    return r;
}

void record_run(const RunRecord& record, const fs::path& path) {
    static std::mutex ledger_mutex;
    const std::string line = canonical(to_json(record)) + "\n";

    std::lock_guard lock(ledger_mutex);
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) {
        throw Error(ErrorCode::StorageFailure, "cannot open ledger " + path.string() + ": " + std::strerror(errno));
    }
    const ssize_t written = ::write(fd, line.data(), line.size());
    const int saved = errno;
    ::close(fd);
    if (written != static_cast<ssize_t>(line.size())) {
        throw Error(ErrorCode::StorageFailure, "short write to ledger " + path.string() + ": " + std::strerror(saved));
    }
}

std::vector<RunRecord> read_ledger(const fs::path& path) {
    std::vector<RunRecord> out;
    std::ifstream in(path, std::ios::binary);
    if (!in) return out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded()) {
            throw Error(ErrorCode::InvalidArgument, path.string() + ":" + std::to_string(line_no) + ": invalid JSON");
        }
        out.push_back(run_record_from_json(doc));
    }
    return out;
}

std::string BudgetDecision::diagnostic() const {
    std::string out = role + ": prospective prompt " + std::to_string(prospective_tokens) + " tokens (context " +
                      std::to_string(reads_tokens) + " + template/grounding " + std::to_string(overhead_tokens) +
                      ") + reserved output " + std::to_string(reserved_tokens) + " vs window " +
                      std::to_string(window);
    out += pass ? ": fits" : ": over by " + std::to_string(deficit);
    if (!largest_entry.empty()) {
        out += "; largest context entry '" + largest_entry + "' (" + std::to_string(largest_entry_tokens) + " tokens)";
    }
    return out;
}

namespace {

BudgetDecision decide(std::string role, std::size_t reads_tokens, std::size_t overhead, const ModelConfig& config) {
    BudgetDecision d;
    d.role = std::move(role);
    d.reads_tokens = reads_tokens;
    d.overhead_tokens = overhead;
    d.prospective_tokens = reads_tokens + overhead;
    d.reserved_tokens = config.reserved_output_tokens;
    d.window = config.context_window_tokens;
    const std::size_t need = d.prospective_tokens + d.reserved_tokens;
    d.pass = need <= d.window;
    d.deficit = d.pass ? 0 : need - d.window;
    return d;
}

}  // namespace

BudgetDecision enforce_budget(const ContextSnapshot& snapshot, AgentRole role, const ModelConfig& config,
                              std::size_t overhead_tokens) {
    std::size_t footprint = 0;
    std::string largest;
    std::size_t largest_tokens = 0;
    for (const auto& key : reads_of(role)) {
        const auto* entry = snapshot.find(key);
        if (!entry) continue;
        footprint += entry->token_estimate;
        if (entry->token_estimate > largest_tokens) {
            largest_tokens = entry->token_estimate;
            largest = key;
        }
    }
    BudgetDecision d = decide(std::string(to_string(role)), footprint, overhead_tokens, config);
    d.largest_entry = largest;
    d.largest_entry_tokens = largest_tokens;
    return d;
}

std::string make_run_id() {
    using namespace std::chrono;
    const auto now = system_clock::now();
    const std::time_t secs = system_clock::to_time_t(now);
    std::tm utc{};
    gmtime_r(&secs, &utc);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &utc);
    static thread_local std::mt19937 rng{std::random_device{}()};
    char suffix[8];
    std::snprintf(suffix, sizeof suffix, "%04x", static_cast<unsigned>(rng() & 0xFFFF));
    return std::string(stamp) + "-" + suffix;
}

namespace {

struct StageFailure {
    std::string role;
    FailureKind kind;
    std::string detail;
};

StageFailure classify(const std::string& role, const Error& e) {
    switch (e.code()) {
        case ErrorCode::ContextOverflow: return {role, FailureKind::ContextOverflow, e.what()};
        case ErrorCode::ProviderUnreachable:
        case ErrorCode::ProviderError:
        case ErrorCode::NoScriptForRole: return {role, FailureKind::ProviderError, e.what()};
        default: return {role, FailureKind::AgentFailed, e.what()};
    }
}

class Notifier {
public:
    explicit Notifier(const PipelineObserver* observer) : observer_(observer) {}
    void start(std::string_view role) const {
        if (observer_ && observer_->on_agent_start) observer_->on_agent_start(role);
    }
    void finish(std::string_view role, bool ok) const {
        if (observer_ && observer_->on_agent_finish) observer_->on_agent_finish(role, ok);
    }

private:
    const PipelineObserver* observer_;
};

std::vector<std::string> threat_titles(const ContextStore& store) {
    std::vector<std::string> out;
    const auto snap = store.snapshot(std::vector<std::string>{"threat_model"});
    const auto* entry = snap.find("threat_model");
    if (!entry || !entry->payload.contains("threats")) return out;
    for (const auto& t : entry->payload["threats"]) {
        const std::string title = t.value("title", std::string{});
        if (!title.empty() && std::find(out.begin(), out.end(), title) == out.end()) out.push_back(title);
    }
    return out;
}

bool structurally_valid(const ContextStore& store, const ContractSet& contracts, SchemaMode mode) {
    const auto snap = store.snapshot();
    for (AgentRole role : kAllRoles) {
        const auto* entry = snap.find(writes_key(role));
        if (!entry) return false;
        if (!validate_schema(contracts.at(role).output_schema, entry->payload, mode).empty()) return false;
    }
    return true;
}

std::optional<StageFailure> run_stage_role(AgentRole role, const PipelineEnv& env, ContextStore& store,
                                           const AgentRunOptions& agent_options, const Notifier& notify) {
    const std::string name(to_string(role));
    notify.start(name);
    try {
        run_agent(env.contracts, role, store, env.gateway, env.corpus, agent_options);
        notify.finish(name, true);
        return std::nullopt;
    } catch (const Error& e) {
        notify.finish(name, false);
        return classify(name, e);
    } catch (const std::exception& e) {
        notify.finish(name, false);
        return StageFailure{name, FailureKind::AgentFailed, e.what()};
    }
}

std::optional<StageFailure> run_multi(const json& profile, const PipelineEnv& env, const PipelineOptions& options,
                                      SchemaMode mode, ContextStore& store, PipelineResult& result) {
    const Notifier notify(options.observer);
    AgentRunOptions agent_options;
    agent_options.config = options.config;
    agent_options.mode = mode;
    agent_options.retry_limit = options.retry_limit;
    agent_options.grounding_k = options.grounding_k;
    agent_options.questionnaire = &profile;

    for (const auto& stage : PipelinePlan::standard().stages) {
        // Budget check for every role before any of the stage starts.
        for (AgentRole role : stage) {
            const auto snapshot = store.snapshot(reads_of(role));
            const auto grounding = grounding_for(env.contracts, role, snapshot, &profile, env.corpus, options.grounding_k);
            std::string prompt;
            try {
                prompt = assemble_prompt(env.contracts, role, snapshot, grounding, {mode, &profile});
            } catch (const Error& e) {
                return classify(std::string(to_string(role)), e);
            }
            const auto footprint = enforce_budget(snapshot, role, options.config, 0).reads_tokens;
            const std::size_t total = estimate_tokens(prompt);
            const std::size_t overhead = total > footprint ? total - footprint : 0;
            auto checked = enforce_budget(snapshot, role, options.config, overhead);
            if (!checked.pass) {
                result.budget_failure = checked;
                return StageFailure{checked.role, FailureKind::ContextOverflow, checked.diagnostic()};
            }
        }

        StageTiming timing;
        for (AgentRole role : stage) timing.roles.emplace_back(to_string(role));
        const auto start = std::chrono::steady_clock::now();

        std::vector<std::optional<StageFailure>> failures(stage.size());
        if (stage.size() == 1) {
            failures[0] = run_stage_role(stage[0], env, store, agent_options, notify);
        } else {
            std::vector<std::thread> workers;
            for (std::size_t i = 0; i < stage.size(); ++i) {
                workers.emplace_back([&, i] { failures[i] = run_stage_role(stage[i], env, store, agent_options, notify); });
            }
            for (auto& w : workers) w.join();
        }
        timing.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.stages.push_back(std::move(timing));

        for (auto& f : failures) {
            if (f) return f;
        }
    }
    return std::nullopt;
}

std::optional<StageFailure> run_single(const json& profile, const PipelineEnv& env, const PipelineOptions& options,
                                       SchemaMode mode, ContextStore& store, PipelineResult& result) {
    const Notifier notify(options.observer);
    const std::string name(kSingleAgentRole);

    // Each role's most relevant excerpt, deduplicated.
    std::vector<FrameworkExcerpt> grounding;
    std::set<std::pair<Framework, std::string>> seen;
    const ContextSnapshot empty;
    for (AgentRole role : kAllRoles) {
        for (auto& e : grounding_for(env.contracts, role, empty, &profile, env.corpus, 1)) {
            if (seen.emplace(e.framework, e.identifier).second) grounding.push_back(std::move(e));
        }
    }

    const std::string prompt = assemble_single_prompt(env.contracts, profile, grounding, mode);
    auto decision = decide(name, 0, estimate_tokens(prompt), options.config);
    if (!decision.pass) {
        result.budget_failure = decision;
        return StageFailure{name, FailureKind::ContextOverflow, decision.diagnostic()};
    }

    StageTiming timing{{name}, 0.0};
    const auto start = std::chrono::steady_clock::now();
    notify.start(name);
    std::optional<StageFailure> failure;
    try {
        auto completion = complete_with_retries(env.gateway, name, prompt, options.config,
                                                env.contracts.combined_schema(), mode, options.retry_limit);
        for (AgentRole role : kAllRoles) {
            const std::string key(writes_key(role));
            store.append_entry(key, name, completion.document.at(key));
        }
    } catch (const Error& e) {
        failure = classify(name, e);
    }
    notify.finish(name, !failure);
    timing.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.stages.push_back(std::move(timing));
    return failure;
}

}  // namespace

PipelineResult execute_pipeline(const json& profile, const PipelineEnv& env, const PipelineOptions& options) {
    const auto profile_violations = validate_schema(env.contracts.questionnaire_schema(), profile);
    if (!profile_violations.empty()) {
        throw Error(ErrorCode::ProfileInvalid, "questionnaire is invalid:\n" + format_violations(profile_violations));
    }
    options.config.validate();

    const SchemaMode mode = options.schema_mode.value_or(default_schema_mode(options.mode));

    PipelineResult result;
    RunRecord& record = result.record;
    record.run_id = options.run_id.empty() ? make_run_id() : options.run_id;
    record.profile_id = profile.at("profile_id").get<std::string>();
    record.model_id = options.config.model_id;
    record.mode = options.mode;
    record.seed = options.config.seed.value_or(0);
    record.window = options.config.context_window_tokens;

    if (options.session_log && options.session_log->has_parent_path()) {
        fs::create_directories(options.session_log->parent_path());
    }
    result.store = std::make_unique<ContextStore>(registered_entry_kinds(), options.session_log);
    ContextStore& store = *result.store;

    const auto start = std::chrono::steady_clock::now();
    auto failure = options.mode == RunMode::MultiAgent ? run_multi(profile, env, options, mode, store, result)
                                                       : run_single(profile, env, options, mode, store, result);

    if (!failure) {
        try {
            const auto snapshot = store.snapshot();
            auto citations = collect_citations(snapshot, env.corpus);
            const auto risks = risks_from_register(snapshot.find("risk_register")->payload);
            auto flags = check_contradictions(risks, snapshot.find("recommendations")->payload);
            RunMetadata meta{record.run_id, record.model_id, std::string(to_string(record.mode)), record.seed,
                             record.window, 0.0};
            result.report = build_report(snapshot, std::move(citations), std::move(flags), std::move(meta));
            result.report_entry = store.read_latest("report");
        } catch (const Error& e) {
            failure = StageFailure{"report", FailureKind::AgentFailed, e.what()};
        }
    }

    record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (result.report) result.report->run_metadata.wall_seconds = record.wall_seconds;
    record.unique_threat_titles = threat_titles(store);
    if (failure) {
        record.completed = false;
        record.failed_stage = failure->role;
        record.failure_kind = failure->kind;
        record.failure_detail = failure->detail;
        record.structural_ok = false;
        result.report.reset();
        result.report_entry.reset();
    } else {
        record.completed = true;
        record.structural_ok = structurally_valid(store, env.contracts, mode);
    }
    return result;
}

}  // namespace riskforge
