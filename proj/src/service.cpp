#include "riskforge/service.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#ifndef RISKFORGE_DEFAULT_DATA_DIR
#define RISKFORGE_DEFAULT_DATA_DIR "data"
#endif

namespace riskforge {

namespace fs = std::filesystem;

namespace {

std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(content.data(), static_cast<std::streamsize>(content.size()))) {
        throw Error(ErrorCode::StorageFailure, "cannot write " + path.string());
    }
}

}  // namespace

json load_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::InvalidArgument, path.string() + ": invalid JSON");
    return doc;
}

fs::path resolve_data_dir(const std::optional<fs::path>& explicit_dir) {
    if (explicit_dir) return *explicit_dir;
    if (auto v = env("RISKFORGE_DATA")) return *v;
    return RISKFORGE_DEFAULT_DATA_DIR;
}

Workspace Workspace::load(const std::optional<fs::path>& data_dir, const std::optional<fs::path>& corpus_path) {
    const fs::path dir = resolve_data_dir(data_dir);
    if (!fs::is_directory(dir)) throw Error(ErrorCode::ConfigError, "data directory not found: " + dir.string());
    fs::path corpus = dir / "corpus" / "csf_mini.jsonl";
    if (corpus_path) corpus = *corpus_path;
    else if (auto v = env("RISKFORGE_CORPUS")) corpus = *v;
    return Workspace{dir, ContractSet::load(dir / "templates", dir / "schemas"), Corpus::ingest(corpus)};
}

std::unique_ptr<Gateway> make_gateway(const ModelSpec& spec, const fs::path& data_dir) {
    if (spec.provider == "stub") {
        const fs::path dir = spec.stub_dir.value_or(data_dir / "stub" / spec.label);
        if (!fs::is_directory(dir)) {
            throw Error(ErrorCode::ConfigError, "no stub scripts for model '" + spec.label + "' at " + dir.string());
        }
        StubOptions opts;
        if (spec.stub_sleep_seconds) opts.sleep_seconds = *spec.stub_sleep_seconds;
        return std::make_unique<StubGateway>(dir, opts);
    }
    if (spec.provider == "http") {
        auto url = spec.base_url ? spec.base_url : env("RISKFORGE_MODEL_URL");
        if (!url) throw Error(ErrorCode::ConfigError, "http provider needs a base URL (RISKFORGE_MODEL_URL)");
        return std::make_unique<HttpGateway>(*url);
    }
    throw Error(ErrorCode::ConfigError, "unknown provider '" + spec.provider + "'");
}

namespace {

ModelConfig config_for(const ModelSpec& spec, Gateway& gateway, std::int64_t seed) {
    ModelConfig cfg;
    cfg.model_id = spec.label;
    cfg.reserved_output_tokens = spec.reserved_output_tokens;
    cfg.temperature = spec.temperature;
    cfg.seed = seed;
    cfg.context_window_tokens = spec.window.value_or(cfg.context_window_tokens);
    if (!spec.window && gateway.kind() == ProviderKind::Http) cfg.context_window_tokens = gateway.probe_window(cfg);
    return cfg;
}

struct RunInputs {
    const Workspace& ws;
    Gateway& gateway;
    const ModelSpec& spec;
    RunMode mode;
    std::int64_t seed;
    std::optional<SchemaMode> schema_mode;
};

PipelineResult run_one(const json& profile, const RunInputs& in, const std::string& run_id,
                       const std::optional<fs::path>& session_log) {
    PipelineOptions opts;
    opts.mode = in.mode;
    opts.config = config_for(in.spec, in.gateway, in.seed);
    opts.schema_mode = in.schema_mode;
    opts.run_id = run_id;
    opts.session_log = session_log;
    return execute_pipeline(profile, PipelineEnv{in.ws.contracts, in.ws.corpus, in.gateway}, opts);
}

}  // namespace

AssessOutcome assess(const AssessRequest& request) {
    const Workspace ws = Workspace::load(request.data_dir, request.corpus);
    auto gateway = make_gateway(request.model, ws.data_dir);
    // A bare name refers to a bundled profile.
    fs::path profile_path = request.profile;
    if (!fs::exists(profile_path) && !profile_path.has_parent_path() && !profile_path.has_extension()) {
        profile_path = ws.data_dir / "profiles" / (request.profile.string() + ".json");
    }
    const json profile = load_json_file(profile_path);

    const std::string run_id = make_run_id();
    const fs::path run_dir = request.out_dir / run_id;
    fs::create_directories(run_dir);

    auto result = run_one(profile, {ws, *gateway, request.model, request.mode, request.seed, request.schema_mode},
                          run_id, run_dir / "context.jsonl");

    if (result.report) {
        write_file(run_dir / "report.md", render_markdown(*result.report));
        write_file(run_dir / "report.json", to_json(*result.report).dump(2) + "\n");
    }
    write_file(run_dir / "record.json", to_json(result.record).dump(2) + "\n");
    record_run(result.record, request.out_dir / "runs.jsonl");

    return AssessOutcome{std::move(result.record), run_dir, std::move(result.budget_failure),
                         std::move(result.stages)};
}

std::vector<ModelSpec> load_model_specs(const fs::path& config) {
    const json doc = load_json_file(config);
    if (!doc.contains("models") || !doc["models"].is_array() || doc["models"].empty()) {
        throw Error(ErrorCode::ConfigError, config.string() + ": expected a non-empty \"models\" list");
    }
    std::vector<ModelSpec> out;
    try {
        for (const auto& m : doc["models"]) {
            ModelSpec s;
            s.label = m.at("label").get<std::string>();
            s.provider = m.value("provider", std::string("stub"));
            if (m.contains("stub_dir")) {
                fs::path p = m["stub_dir"].get<std::string>();
                s.stub_dir = p.is_absolute() ? p : config.parent_path() / p;
            }
            if (m.contains("base_url")) s.base_url = m["base_url"].get<std::string>();
            if (m.contains("window")) s.window = m["window"].get<std::size_t>();
            s.reserved_output_tokens = m.value("reserved_output_tokens", s.reserved_output_tokens);
            s.temperature = m.value("temperature", s.temperature);
            if (m.contains("stub_sleep_seconds")) s.stub_sleep_seconds = m["stub_sleep_seconds"].get<double>();
            out.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, config.string() + ": " + e.what());
    }
    return out;
}

AblationSummary run_ablation(const AblationRequest& request) {
    if (request.runs < 1) throw Error(ErrorCode::InvalidArgument, "runs per cell must be at least 1");
    const Workspace ws = Workspace::load(request.data_dir, request.corpus);
    auto specs = load_model_specs(request.models_config);
    if (request.window) {
        for (auto& s : specs) s.window = *request.window;
    }

    std::vector<fs::path> profile_paths;
    for (const auto& e : fs::directory_iterator(request.profiles_dir)) {
        if (e.is_regular_file() && e.path().extension() == ".json") profile_paths.push_back(e.path());
    }
    std::sort(profile_paths.begin(), profile_paths.end());
    if (profile_paths.empty()) {
        throw Error(ErrorCode::ConfigError, "no profiles in " + request.profiles_dir.string());
    }
    std::vector<json> profiles;
    for (const auto& p : profile_paths) profiles.push_back(load_json_file(p));

    std::vector<std::unique_ptr<Gateway>> gateways;
    for (const auto& s : specs) gateways.push_back(make_gateway(s, ws.data_dir));

    using Key = std::tuple<std::string, std::string, std::int64_t, RunMode>;
    std::set<Key> done;
    for (const auto& r : read_ledger(request.ledger)) done.emplace(r.profile_id, r.model_id, r.seed, r.mode);

    struct Cell {
        std::size_t profile;
        std::size_t model;
        std::int64_t seed;
    };
    AblationSummary summary;
    std::vector<Cell> cells;
    for (std::size_t m = 0; m < specs.size(); ++m) {
        for (std::size_t p = 0; p < profiles.size(); ++p) {
            const std::string id = profiles[p].value("profile_id", std::string{});
            for (std::int64_t seed = 1; seed <= request.runs; ++seed) {
                if (done.count({id, specs[m].label, seed, request.mode})) {
                    ++summary.skipped;
                    continue;
                }
                cells.push_back({p, m, seed});
            }
        }
    }
    summary.scheduled = cells.size();

    std::atomic<std::size_t> next{0};
    std::mutex summary_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            const Cell& c = cells[i];
            try {
                auto result = run_one(profiles[c.profile],
                                      {ws, *gateways[c.model], specs[c.model], request.mode, c.seed, std::nullopt},
                                      make_run_id(), std::nullopt);
                record_run(result.record, request.ledger);
                std::lock_guard lock(summary_mutex);
                ++(result.record.completed ? summary.completed : summary.failed);
            } catch (...) {
                std::lock_guard lock(summary_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    const int jobs = std::max(1, request.jobs);
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return summary;
}

}  // namespace riskforge
