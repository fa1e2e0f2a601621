#include "riskforge/riskforge.h"

#include "riskforge/evalkit.hpp"
#include "riskforge/service.hpp"

#include <cstdlib>
#include <cstring>

using namespace riskforge;
namespace fs = std::filesystem;

struct rf_corpus {
    Corpus corpus;
};

struct rf_store {
    explicit rf_store(std::optional<fs::path> log) : store(registered_entry_kinds(), std::move(log)) {}
    ContextStore store;
};

namespace {

thread_local std::string last_error;

rf_status fail(rf_status status, std::string message) {
    last_error = std::move(message);
    return status;
}

char* dup(const std::string& text) {
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (out) std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

// Runs `body`, translating exceptions into statuses.
template <typename Fn>
rf_status guarded(char** out, Fn&& body) {
    if (out) *out = nullptr;
    try {
        last_error.clear();
        return body();
    } catch (const Error& e) {
        return fail(static_cast<rf_status>(e.code()), e.what());
    } catch (const json::exception& e) {
        return fail(RF_INVALID_ARGUMENT, std::string("bad JSON: ") + e.what());
    } catch (const fs::filesystem_error& e) {
        return fail(RF_STORAGE_FAILURE, e.what());
    } catch (const std::exception& e) {
        return fail(RF_INTERNAL, e.what());
    } catch (...) {
        return fail(RF_INTERNAL, "unknown exception");
    }
}

json parse_request(const char* text) {
    if (!text) throw Error(ErrorCode::InvalidArgument, "request is NULL");
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorCode::InvalidArgument, "request must be a JSON object");
    return doc;
}

std::optional<fs::path> opt_path(const json& req, const char* key) {
    if (!req.contains(key) || req[key].is_null()) return std::nullopt;
    return fs::path(req[key].get<std::string>());
}

RunMode mode_of(const json& req, RunMode fallback) {
    if (!req.contains("mode")) return fallback;
    auto mode = parse_run_mode(req["mode"].get<std::string>());
    if (!mode) throw Error(ErrorCode::InvalidArgument, "mode must be multi or single");
    return *mode;
}

json budget_json(const BudgetDecision& d) {
    return json{{"role", d.role},
                {"reads_tokens", d.reads_tokens},
                {"overhead_tokens", d.overhead_tokens},
                {"prospective_tokens", d.prospective_tokens},
                {"reserved_tokens", d.reserved_tokens},
                {"window", d.window},
                {"deficit", d.deficit},
                {"largest_entry", d.largest_entry},
                {"largest_entry_tokens", d.largest_entry_tokens},
                {"diagnostic", d.diagnostic()}};
}

void require(const void* p, const char* what) {
    if (!p) throw Error(ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

}  // namespace

extern "C" {

const char* rf_version(void) { return "0.3.0"; }

const char* rf_status_name(rf_status status) {
    switch (status) {
        case RF_OK: return "OK";
        case RF_RUN_FAILED: return "RunFailed";
        default: return error_code_name(static_cast<ErrorCode>(status));
    }
}

const char* rf_last_error(void) { return last_error.c_str(); }

void rf_free(char* text) { std::free(text); }

rf_status rf_corpus_open(const char* path, rf_corpus** out) {
    if (out) *out = nullptr;
    return guarded(nullptr, [&] {
        require(path, "path");
        require(out, "out");
        *out = new rf_corpus{Corpus::ingest(path)};
        return RF_OK;
    });
}

void rf_corpus_close(rf_corpus* corpus) { delete corpus; }

rf_status rf_corpus_stats(const rf_corpus* corpus, char** out_json) {
    return guarded(out_json, [&] {
        require(corpus, "corpus");
        require(out_json, "out_json");
        const auto counts = corpus->corpus.counts();
        json doc{{"total", corpus->corpus.size()}};
        for (Framework f : {Framework::NistCsf, Framework::Cis}) {
            auto it = counts.find(f);
            doc[std::string(to_string(f))] = it == counts.end() ? 0 : it->second;
        }
        *out_json = dup(doc.dump());
        return RF_OK;
    });
}

rf_status rf_corpus_retrieve(const rf_corpus* corpus, const char* query, size_t k, char** out_json) {
    return guarded(out_json, [&] {
        require(corpus, "corpus");
        require(query, "query");
        require(out_json, "out_json");
        json arr = json::array();
        for (const auto& e : corpus->corpus.retrieve(query, k)) arr.push_back(to_json(e));
        *out_json = dup(arr.dump());
        return RF_OK;
    });
}

rf_status rf_corpus_verify(const rf_corpus* corpus, const char* text, char** out_json) {
    return guarded(out_json, [&] {
        require(corpus, "corpus");
        require(text, "text");
        require(out_json, "out_json");
        json arr = json::array();
        for (const auto& c : corpus->corpus.verify_citations(text)) arr.push_back(to_json(c));
        *out_json = dup(arr.dump());
        return RF_OK;
    });
}

rf_status rf_store_open(const char* log_path, rf_store** out) {
    if (out) *out = nullptr;
    return guarded(nullptr, [&] {
        require(out, "out");
        std::optional<fs::path> log;
        if (log_path) log = fs::path(log_path);
        *out = new rf_store(log);
        return RF_OK;
    });
}

void rf_store_close(rf_store* store) { delete store; }

rf_status rf_store_append(rf_store* store, const char* key, const char* agent_id, const char* payload_json,
                          char** out_entry_json) {
    return guarded(out_entry_json, [&] {
        require(store, "store");
        require(key, "key");
        require(agent_id, "agent_id");
        require(payload_json, "payload_json");
        json payload = json::parse(payload_json, nullptr, false);
        if (payload.is_discarded()) throw Error(ErrorCode::InvalidArgument, "payload is not valid JSON");
        auto entry = store->store.append_entry(key, agent_id, std::move(payload));
        if (out_entry_json) *out_entry_json = dup(to_json(entry).dump());
        return RF_OK;
    });
}

rf_status rf_store_read_latest(const rf_store* store, const char* key, char** out_entry_json) {
    return guarded(out_entry_json, [&] {
        require(store, "store");
        require(key, "key");
        require(out_entry_json, "out_entry_json");
        *out_entry_json = dup(to_json(store->store.read_latest(key)).dump());
        return RF_OK;
    });
}

rf_status rf_store_read_history(const rf_store* store, const char* key, char** out_json) {
    return guarded(out_json, [&] {
        require(store, "store");
        require(key, "key");
        require(out_json, "out_json");
        json arr = json::array();
        for (const auto& e : store->store.read_history(key)) arr.push_back(to_json(e));
        *out_json = dup(arr.dump());
        return RF_OK;
    });
}

rf_status rf_store_snapshot(const rf_store* store, char** out_json) {
    return guarded(out_json, [&] {
        require(store, "store");
        require(out_json, "out_json");
        const auto snap = store->store.snapshot();
        json entries = json::array();
        for (const auto& e : snap.entries) entries.push_back(to_json(e));
        *out_json = dup(json{{"entries", std::move(entries)}, {"total_tokens", snap.total_tokens}}.dump());
        return RF_OK;
    });
}

rf_status rf_assess(const char* request_json, char** out_json) {
    return guarded(out_json, [&] {
        require(out_json, "out_json");
        const json req = parse_request(request_json);
        AssessRequest r;
        r.profile = req.at("profile").get<std::string>();
        r.mode = mode_of(req, RunMode::MultiAgent);
        r.model.label = req.value("model", std::string("specific"));
        r.model.provider = req.value("provider", std::string("stub"));
        r.model.stub_dir = opt_path(req, "stub_dir");
        if (req.contains("base_url")) r.model.base_url = req["base_url"].get<std::string>();
        if (req.contains("window")) r.model.window = req["window"].get<std::size_t>();
        r.model.reserved_output_tokens = req.value("reserved_output_tokens", r.model.reserved_output_tokens);
        if (req.contains("stub_sleep_seconds")) r.model.stub_sleep_seconds = req["stub_sleep_seconds"].get<double>();
        r.seed = req.value("seed", std::int64_t{1});
        if (req.contains("schema_mode")) {
            const auto text = req["schema_mode"].get<std::string>();
            if (text == "case_study") r.schema_mode = SchemaMode::CaseStudy;
            else if (text == "cross_sector") r.schema_mode = SchemaMode::CrossSector;
            else throw Error(ErrorCode::InvalidArgument, "schema_mode must be case_study or cross_sector");
        }
        r.data_dir = opt_path(req, "data_dir");
        r.corpus = opt_path(req, "corpus");
        r.out_dir = opt_path(req, "out").value_or("runs");

        const auto outcome = assess(r);
        json stages = json::array();
        for (const auto& s : outcome.stages) stages.push_back({{"roles", s.roles}, {"seconds", s.seconds}});
        json doc{{"record", to_json(outcome.record)},
                 {"run_dir", outcome.run_dir.string()},
                 {"budget", outcome.budget_failure ? budget_json(*outcome.budget_failure) : json(nullptr)},
                 {"stages", std::move(stages)}};
        *out_json = dup(doc.dump());
        if (!outcome.record.completed) {
            last_error = outcome.record.failure_detail;
            return RF_RUN_FAILED;
        }
        return RF_OK;
    });
}

rf_status rf_ablate(const char* request_json, char** out_json) {
    return guarded(out_json, [&] {
        require(out_json, "out_json");
        const json req = parse_request(request_json);
        AblationRequest r;
        r.profiles_dir = req.at("profiles").get<std::string>();
        r.models_config = req.at("models").get<std::string>();
        r.ledger = req.at("ledger").get<std::string>();
        r.runs = req.value("runs", 3);
        r.mode = mode_of(req, RunMode::SingleAgent);
        r.jobs = req.value("jobs", 1);
        if (req.contains("window")) r.window = req["window"].get<std::size_t>();
        r.data_dir = opt_path(req, "data_dir");
        r.corpus = opt_path(req, "corpus");
        const auto s = run_ablation(r);
        *out_json = dup(json{{"scheduled", s.scheduled},
                             {"skipped", s.skipped},
                             {"completed", s.completed},
                             {"failed", s.failed}}
                            .dump());
        return RF_OK;
    });
}

rf_status rf_eval(const char* request_json, char** out_json) {
    return guarded(out_json, [&] {
        require(out_json, "out_json");
        const json req = parse_request(request_json);
        EvalInputs in;
        in.ledger = opt_path(req, "ledger");
        in.annotations = opt_path(req, "annotations");
        in.aliases = opt_path(req, "aliases");
        in.system_register = opt_path(req, "system");
        if (req.contains("select")) in.selector = RunSelector::parse(req["select"].get<std::string>());
        if (!in.ledger && !in.annotations) {
            throw Error(ErrorCode::InvalidArgument, "eval needs a ledger, annotations, or both");
        }
        const auto report = evaluate(in);
        *out_json = dup(json{{"metrics", report.to_json()}, {"table", report.to_table()}}.dump());
        return RF_OK;
    });
}

}  // extern "C"
