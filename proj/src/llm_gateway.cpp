#include "riskforge/llm_gateway.hpp"

#include "riskforge/context_store.hpp"

#include <httplib.h>

#include <cctype>
#include <fstream>
#include <regex>
#include <thread>

namespace riskforge {

namespace fs = std::filesystem;

void ModelConfig::validate() const {
    if (context_window_tokens == 0) {
        throw Error(ErrorCode::InvalidArgument, "context window must be positive");
    }
    if (reserved_output_tokens == 0 || reserved_output_tokens >= context_window_tokens) {
        throw Error(ErrorCode::InvalidArgument,
                    "reserved output tokens (" + std::to_string(reserved_output_tokens) +
                        ") must be positive and below the context window (" +
                        std::to_string(context_window_tokens) + ")");
    }
    if (!(temperature >= 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be >= 0");
}

std::string_view to_string(ProviderKind kind) noexcept {
    return kind == ProviderKind::Http ? "http" : "stub";
}

CompletionRequest CompletionRequest::make(std::string role, std::string prompt, ModelConfig config) {
    CompletionRequest request;
    request.prompt_tokens = estimate_tokens(prompt);
    request.role = std::move(role);
    request.prompt = std::move(prompt);
    request.config = std::move(config);
    return request;
}

ContextOverflowError::ContextOverflowError(std::string role, std::size_t prompt_tokens,
                                           std::size_t reserved, std::size_t window)
    : Error(ErrorCode::ContextOverflow,
            "context overflow in " + role + ": prompt " + std::to_string(prompt_tokens) +
                " + reserved " + std::to_string(reserved) + " > window " + std::to_string(window)),
      role_(std::move(role)),
      prompt_tokens_(prompt_tokens),
      reserved_(reserved),
      window_(window) {}

CompletionResult Gateway::complete(const CompletionRequest& request) {
    const auto& cfg = request.config;
    if (request.prompt_tokens + cfg.reserved_output_tokens > cfg.context_window_tokens) {
        throw ContextOverflowError(request.role, request.prompt_tokens, cfg.reserved_output_tokens,
                                   cfg.context_window_tokens);
    }

    const auto start = std::chrono::steady_clock::now();
    RawCompletion raw = invoke(request);
    const auto stop = std::chrono::steady_clock::now();

    CompletionResult result;
    result.text = std::move(raw.text);
    result.truncated = raw.truncated;
    result.provider = kind();
    result.latency_seconds = std::chrono::duration<double>(stop - start).count();
    return result;
}

std::string canonical_prompt(std::string_view prompt) {
    std::string out;
    out.reserve(prompt.size());
    bool pending_space = false;
    for (char c : prompt) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

// ---------------------------------------------------------------------------
// Stub

namespace {

json read_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::ConfigError, path.string() + ": invalid JSON");
    return doc;
}

std::string response_text(const json& response) {
    return response.is_string() ? response.get<std::string>() : response.dump(2);
}

}  // namespace

StubGateway::StubGateway(const fs::path& scripts_dir, StubOptions options)
    : options_(std::move(options)) {
    std::error_code ec;
    if (!fs::is_directory(scripts_dir, ec)) {
        throw Error(ErrorCode::ConfigError, "stub script directory not found: " + scripts_dir.string());
    }
    for (const auto& item : fs::directory_iterator(scripts_dir)) {
        if (!item.is_regular_file() || item.path().extension() != ".json") continue;
        const std::string stem = item.path().stem().string();
        json doc = read_json_file(item.path());

        if (stem == "stub") {
            if (options_.sleep_seconds == 0.0) options_.sleep_seconds = doc.value("sleep_seconds", 0.0);
            if (options_.role_sleep_seconds.empty() && doc.contains("role_sleep_seconds")) {
                for (auto& [role, secs] : doc["role_sleep_seconds"].items()) {
                    options_.role_sleep_seconds[role] = secs.get<double>();
                }
            }
            continue;
        }

        std::vector<Variant> variants;
        if (doc.is_array()) {
            Variant v;
            for (const auto& r : doc) v.responses.push_back(response_text(r));
            variants.push_back(std::move(v));
        } else if (doc.is_object() && doc.contains("variants") && doc["variants"].is_array()) {
            for (const auto& jv : doc["variants"]) {
                Variant v;
                if (jv.contains("match")) v.match = jv["match"].get<std::string>();
                for (const auto& r : jv.at("responses")) v.responses.push_back(response_text(r));
                variants.push_back(std::move(v));
            }
        } else {
            throw Error(ErrorCode::ConfigError, item.path().string() + ": expected a list or {\"variants\": [...]}");
        }
        for (const auto& v : variants) {
            if (v.responses.empty()) {
                throw Error(ErrorCode::ConfigError, item.path().string() + ": variant with no responses");
            }
        }
        scripts_.emplace(stem, std::move(variants));
    }
}

std::string StubGateway::stub_complete(std::string_view role, std::string_view prompt,
                                       std::uint64_t seed) const {
    auto it = scripts_.find(role);
    if (it == scripts_.end()) {
        throw Error(ErrorCode::NoScriptForRole, "no stub script for role '" + std::string(role) + "'");
    }
    for (const auto& variant : it->second) {
        if (variant.match && prompt.find(*variant.match) == std::string_view::npos) continue;
        const std::uint64_t n = variant.responses.size();
        const std::uint64_t hash = fnv1a64(canonical_prompt(prompt));
        const std::size_t index = static_cast<std::size_t>((hash % n + seed % n) % n);
        return variant.responses[index];
    }
    throw Error(ErrorCode::NoScriptForRole,
                "no stub variant for role '" + std::string(role) + "' matches the prompt");
}

Gateway::RawCompletion StubGateway::invoke(const CompletionRequest& request) {
    double sleep = options_.sleep_seconds;
    if (auto it = options_.role_sleep_seconds.find(request.role); it != options_.role_sleep_seconds.end()) {
        sleep = it->second;
    }
    const auto seed = static_cast<std::uint64_t>(request.config.seed.value_or(0));
    RawCompletion raw{stub_complete(request.role, request.prompt, seed), false};
    if (sleep > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(sleep));
    return raw;
}

// ---------------------------------------------------------------------------
// HTTP

HttpGateway::HttpGateway(std::string base_url, HttpOptions options)
    : base_url_(std::move(base_url)), options_(options) {
    static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(base_url_, m, kUrl)) {
        throw Error(ErrorCode::ConfigError, "model URL must look like http://host:port, got '" + base_url_ + "'");
    }
    scheme_host_port_ = m[1].str();
    path_prefix_ = m[2].matched ? m[2].str() : "";
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

json HttpGateway::generate_body(const CompletionRequest& request) {
    json options = {
        {"num_ctx", request.config.context_window_tokens},
        {"temperature", request.config.temperature},
    };
    if (request.config.seed) options["seed"] = *request.config.seed;
    return json{
        {"model", request.config.model_id},
        {"prompt", request.prompt},
        {"options", std::move(options)},
        {"stream", false},
    };
}

json HttpGateway::post_json(const std::string& path, const json& body) {
    const std::string payload = body.dump();
    std::string last_error;
    for (int attempt = 0; attempt <= options_.retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(options_.backoff);

        httplib::Client client(scheme_host_port_);
        client.set_connection_timeout(options_.connect_timeout);
        client.set_read_timeout(options_.read_timeout);
        auto res = client.Post(path_prefix_ + path, payload, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            throw Error(ErrorCode::ProviderError,
                        "model server returned HTTP " + std::to_string(res->status) + ": " + res->body);
        }
        json doc = json::parse(res->body, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) {
            throw Error(ErrorCode::ProviderError, "model server returned non-JSON body: " + res->body);
        }
        return doc;
    }
    throw Error(ErrorCode::ProviderUnreachable,
                "model server " + base_url_ + " unreachable after " + std::to_string(options_.retries + 1) +
                    " attempts: " + last_error);
}

Gateway::RawCompletion HttpGateway::invoke(const CompletionRequest& request) {
    json doc = post_json("/api/generate", generate_body(request));
    if (!doc.contains("response") || !doc["response"].is_string()) {
        throw Error(ErrorCode::ProviderError, "model server response lacks 'response': " + doc.dump());
    }
    RawCompletion raw;
    raw.text = doc["response"].get<std::string>();
    raw.truncated = doc.value("done_reason", std::string{}) == "length";
    return raw;
}

std::size_t HttpGateway::probe_window(const ModelConfig& config) {
    json doc = post_json("/api/show", json{{"model", config.model_id}});

    // Runtime setting first, then the model's trained context length.
    if (doc.contains("parameters") && doc["parameters"].is_string()) {
        static const std::regex kNumCtx(R"((^|\n)\s*num_ctx\s+(\d+))");
        std::smatch m;
        const std::string params = doc["parameters"].get<std::string>();
        if (std::regex_search(params, m, kNumCtx)) return std::stoull(m[2].str());
    }
    if (doc.contains("model_info") && doc["model_info"].is_object()) {
        for (auto& [key, value] : doc["model_info"].items()) {
            const std::string suffix = "context_length";
            if (key.size() >= suffix.size() && key.compare(key.size() - suffix.size(), suffix.size(), suffix) == 0 &&
                value.is_number_unsigned()) {
                return value.get<std::size_t>();
            }
        }
    }
    return config.context_window_tokens;
}

}  // namespace riskforge
