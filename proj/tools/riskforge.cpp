#include "riskforge/riskforge.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

using json = nlohmann::json;

namespace {

struct Result {
    rf_status status;
    json body;
};

Result call(rf_status (*fn)(const char*, char**), const json& request) {
    char* out = nullptr;
    const rf_status status = fn(request.dump().c_str(), &out);
    Result r{status, json()};
    if (out) {
        r.body = json::parse(out);
        rf_free(out);
    }
    return r;
}

int report_error(rf_status status) {
    std::fprintf(stderr, "error (%s): %s\n", rf_status_name(status), rf_last_error());
    return 1;
}

template <typename T>
void put(json& req, const char* key, const std::optional<T>& value) {
    if (value) req[key] = *value;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cybersecurity risk assessment pipeline"};
    app.set_version_flag("--version", std::string(rf_version()));
    app.require_subcommand(1);

    // assess
    auto* assess = app.add_subcommand("assess", "Run one assessment for an organization profile");
    std::string profile, mode = "multi", model = "specific", provider = "stub", out = "runs";
    std::optional<std::size_t> window, reserved;
    std::optional<long long> seed;
    std::optional<std::string> corpus, data_dir, stub_dir, schema_mode, base_url;
    bool assess_json = false;
    assess->add_option("--profile", profile, "Profile JSON file or bundled profile name")->required();
    assess->add_option("--mode", mode, "multi or single")->check(CLI::IsMember({"multi", "single"}));
    assess->add_option("--model", model, "Model label (stub script set or served model name)");
    assess->add_option("--provider", provider, "stub or http")->check(CLI::IsMember({"stub", "http"}));
    assess->add_option("--window", window, "Context window in tokens");
    assess->add_option("--reserved", reserved, "Tokens reserved for output");
    assess->add_option("--seed", seed, "Sampling seed");
    assess->add_option("--corpus", corpus, "Framework corpus (JSON Lines)");
    assess->add_option("--data-dir", data_dir, "Templates, schemas, corpus and stub scripts");
    assess->add_option("--stub-dir", stub_dir, "Stub script directory");
    assess->add_option("--schema-mode", schema_mode, "case_study or cross_sector")
        ->check(CLI::IsMember({"case_study", "cross_sector"}));
    assess->add_option("--base-url", base_url, "Model server URL for the http provider");
    assess->add_option("--out", out, "Output directory");
    assess->add_flag("--json", assess_json, "Print the result as JSON");

    // eval
    auto* eval = app.add_subcommand("eval", "Compute evaluation metrics");
    std::optional<std::string> ledger, annotations, aliases, system, select, json_out;
    eval->add_option("--ledger", ledger, "Run ledger (JSON Lines)");
    eval->add_option("--annotations", annotations, "Practitioner annotations (JSON Lines)");
    eval->add_option("--aliases", aliases, "Title alias pairs (JSON)");
    eval->add_option("--system", system, "System risk register or report.json");
    eval->add_option("--select", select, "model=...,mode=...,profile=...");
    eval->add_option("--json-out", json_out, "Also write the metrics JSON here");

    // ablate
    auto* ablate = app.add_subcommand("ablate", "Run the profiles x models x seeds ablation");
    std::string profiles_dir, models_config, ablate_mode = "single", ablate_out;
    int runs = 3, jobs = 1;
    std::optional<std::size_t> ablate_window;
    std::optional<std::string> ablate_data_dir, ablate_corpus;
    ablate->add_option("--profiles", profiles_dir, "Directory of profile JSON files")->required();
    ablate->add_option("--models", models_config, "Models config JSON")->required();
    ablate->add_option("--runs", runs, "Runs (seeds) per profile and model")->check(CLI::PositiveNumber);
    ablate->add_option("--mode", ablate_mode, "multi or single")->check(CLI::IsMember({"multi", "single"}));
    ablate->add_option("--out", ablate_out, "Ledger file to append to")->required();
    ablate->add_option("--jobs", jobs, "Concurrent pipelines")->check(CLI::PositiveNumber);
    ablate->add_option("--window", ablate_window, "Override every model's context window");
    ablate->add_option("--data-dir", ablate_data_dir, "Data directory");
    ablate->add_option("--corpus", ablate_corpus, "Framework corpus");

    // index-corpus
    auto* index = app.add_subcommand("index-corpus", "Validate a corpus file and print its statistics");
    std::string corpus_file;
    index->add_option("file", corpus_file, "Corpus JSON Lines file")->required();

    CLI11_PARSE(app, argc, argv);

    if (*assess) {
        json req{{"profile", profile}, {"mode", mode}, {"model", model}, {"provider", provider}, {"out", out}};
        put(req, "window", window);
        put(req, "reserved_output_tokens", reserved);
        put(req, "seed", seed);
        put(req, "corpus", corpus);
        put(req, "data_dir", data_dir);
        put(req, "stub_dir", stub_dir);
        put(req, "schema_mode", schema_mode);
        put(req, "base_url", base_url);
        const auto r = call(rf_assess, req);
        if (r.status != RF_OK && r.status != RF_RUN_FAILED) return report_error(r.status);
        if (assess_json) {
            std::cout << r.body.dump(2) << "\n";
        } else {
            const json& rec = r.body["record"];
            if (rec["completed"].get<bool>()) {
                std::printf("completed %s in %.3f s\n", rec["run_id"].get<std::string>().c_str(),
                            rec["wall_seconds"].get<double>());
                std::printf("report: %s/report.md\n", r.body["run_dir"].get<std::string>().c_str());
            } else {
                std::printf("failed at %s (%s): %s\n", rec["failed_stage"].get<std::string>().c_str(),
                            rec["failure_kind"].get<std::string>().c_str(),
                            rec["failure_detail"].get<std::string>().c_str());
            }
        }
        return r.status == RF_OK ? 0 : 2;
    }

    if (*eval) {
        json req = json::object();
        put(req, "ledger", ledger);
        put(req, "annotations", annotations);
        put(req, "aliases", aliases);
        put(req, "system", system);
        put(req, "select", select);
        const auto r = call(rf_eval, req);
        if (r.status != RF_OK) return report_error(r.status);
        std::cout << r.body["table"].get<std::string>() << "\n" << r.body["metrics"].dump(2) << "\n";
        if (json_out) {
            FILE* f = std::fopen(json_out->c_str(), "w");
            if (!f) {
                std::fprintf(stderr, "cannot write %s\n", json_out->c_str());
                return 1;
            }
            const std::string text = r.body["metrics"].dump(2) + "\n";
            std::fwrite(text.data(), 1, text.size(), f);
            std::fclose(f);
        }
        return 0;
    }

    if (*ablate) {
        json req{{"profiles", profiles_dir}, {"models", models_config}, {"runs", runs},
                 {"mode", ablate_mode},      {"ledger", ablate_out},     {"jobs", jobs}};
        put(req, "window", ablate_window);
        put(req, "data_dir", ablate_data_dir);
        put(req, "corpus", ablate_corpus);
        const auto r = call(rf_ablate, req);
        if (r.status != RF_OK) return report_error(r.status);
        std::printf("scheduled %zu, skipped %zu, completed %zu, failed %zu\n", r.body["scheduled"].get<std::size_t>(),
                    r.body["skipped"].get<std::size_t>(), r.body["completed"].get<std::size_t>(),
                    r.body["failed"].get<std::size_t>());
        return 0;
    }

    if (*index) {
        rf_corpus* c = nullptr;
        if (rf_status s = rf_corpus_open(corpus_file.c_str(), &c); s != RF_OK) return report_error(s);
        char* stats = nullptr;
        const rf_status s = rf_corpus_stats(c, &stats);
        rf_corpus_close(c);
        if (s != RF_OK) return report_error(s);
        std::printf("%s\n", stats);
        rf_free(stats);
        return 0;
    }
    return 0;
}
