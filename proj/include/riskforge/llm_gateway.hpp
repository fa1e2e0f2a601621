#pragma once

#include "riskforge/common.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace riskforge {

struct ModelConfig {
    std::string model_id = "stub";
    std::size_t context_window_tokens = 131072;
    std::size_t reserved_output_tokens = 1024;
    double temperature = 0.2;
    std::optional<std::int64_t> seed;

    // Throws InvalidArgument unless reserved < window and temperature >= 0.
    void validate() const;
};

enum class ProviderKind { Http, Stub };
std::string_view to_string(ProviderKind kind) noexcept;

struct CompletionRequest {
    std::string role;
    std::string prompt;
    ModelConfig config;
    std::size_t prompt_tokens = 0;

    // prompt_tokens filled from the shared estimator.
    static CompletionRequest make(std::string role, std::string prompt, ModelConfig config);
};

struct CompletionResult {
    std::string text;
    double latency_seconds = 0.0;
    ProviderKind provider = ProviderKind::Stub;
    bool truncated = false;
};

class ContextOverflowError : public Error {
public:
    ContextOverflowError(std::string role, std::size_t prompt_tokens, std::size_t reserved,
                         std::size_t window);

    const std::string& role() const noexcept { return role_; }
    std::size_t prompt_tokens() const noexcept { return prompt_tokens_; }
    std::size_t reserved_tokens() const noexcept { return reserved_; }
    std::size_t window() const noexcept { return window_; }

private:
    std::string role_;
    std::size_t prompt_tokens_;
    std::size_t reserved_;
    std::size_t window_;
};

/// Model access point shared by every agent. complete() enforces the
/// context-window precondition before the provider is touched and times only
/// the provider call. Implementations must be callable from several threads.
class Gateway {
public:
    virtual ~Gateway() = default;

    CompletionResult complete(const CompletionRequest& request);

    virtual std::size_t probe_window(const ModelConfig& config) = 0;
    virtual ProviderKind kind() const noexcept = 0;

protected:
    struct RawCompletion {
        std::string text;
        bool truncated = false;
    };
    virtual RawCompletion invoke(const CompletionRequest& request) = 0;
};

// Whitespace runs collapsed to one space, ends trimmed.
std::string canonical_prompt(std::string_view prompt);
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

struct StubOptions {
    double sleep_seconds = 0.0;
    std::map<std::string, double, std::less<>> role_sleep_seconds;
};

/// Deterministic scripted model. Scripts live in a directory with one
/// `<role>.json` per role, either a plain list of candidate outputs or
/// `{"variants": [{"match": "...", "responses": [...]}, ...]}`. The first
/// variant whose `match` substring occurs in the prompt is used (a variant
/// without `match` always applies). The chosen response is
/// `responses[(fnv1a64(canonical_prompt) + seed) mod n]`; object responses are
/// emitted as pretty-printed JSON, strings verbatim.
///
/// An optional `stub.json` in the same directory may set `sleep_seconds` and
/// `role_sleep_seconds`; explicit StubOptions take precedence when nonzero.
class StubGateway final : public Gateway {
public:
    explicit StubGateway(const std::filesystem::path& scripts_dir, StubOptions options = {});

    std::string stub_complete(std::string_view role, std::string_view prompt,
                              std::uint64_t seed) const;

    std::size_t probe_window(const ModelConfig& config) override { return config.context_window_tokens; }
    ProviderKind kind() const noexcept override { return ProviderKind::Stub; }

    bool has_script(std::string_view role) const noexcept { return scripts_.count(role) != 0; }

protected:
    RawCompletion invoke(const CompletionRequest& request) override;

private:
    struct Variant {
        std::optional<std::string> match;
        std::vector<std::string> responses;
    };

    std::map<std::string, std::vector<Variant>, std::less<>> scripts_;
    StubOptions options_;
};

struct HttpOptions {
    int retries = 2;
    std::chrono::milliseconds backoff{1000};
    std::chrono::seconds read_timeout{600};
    std::chrono::seconds connect_timeout{5};
};

/// Client for a local model server speaking the `/api/generate` JSON protocol.
class HttpGateway final : public Gateway {
public:
    explicit HttpGateway(std::string base_url, HttpOptions options = {});

    std::size_t probe_window(const ModelConfig& config) override;
    ProviderKind kind() const noexcept override { return ProviderKind::Http; }

    const std::string& base_url() const noexcept { return base_url_; }

    static json generate_body(const CompletionRequest& request);

protected:
    RawCompletion invoke(const CompletionRequest& request) override;

private:
    json post_json(const std::string& path, const json& body);

    std::string base_url_;
    std::string scheme_host_port_;
    std::string path_prefix_;
    HttpOptions options_;
};

}  // namespace riskforge
