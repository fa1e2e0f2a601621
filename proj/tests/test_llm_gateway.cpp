#include "riskforge/agent_contracts.hpp"
#include "riskforge/llm_gateway.hpp"
#include "support.hpp"

#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <chrono>
#include <set>
#include <thread>

using namespace riskforge;
using rftest::TempDir;

namespace {

class CountingGateway final : public Gateway {
public:
    std::atomic<int> calls{0};
    std::size_t probe_window(const ModelConfig& c) override { return c.context_window_tokens; }
    ProviderKind kind() const noexcept override { return ProviderKind::Stub; }

protected:
    RawCompletion invoke(const CompletionRequest&) override {
        ++calls;
        return {"{}", false};
    }
};

// Local model server on an ephemeral port.
class MockServer {
public:
    explicit MockServer(std::function<void(httplib::Server&)> routes) {
        routes(server_);
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockServer() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

HttpOptions fast_retries() {
    HttpOptions o;
    o.backoff = std::chrono::milliseconds(10);
    o.connect_timeout = std::chrono::seconds(1);
    o.read_timeout = std::chrono::seconds(5);
    return o;
}

ModelConfig config(std::size_t window, std::size_t reserved = 1024, std::optional<std::int64_t> seed = 1) {
    ModelConfig c;
    c.context_window_tokens = window;
    c.reserved_output_tokens = reserved;
    c.seed = seed;
    return c;
}

json intake_output(StubGateway& stub, const std::string& profile_name) {
    const json q = rftest::profile(profile_name);
    ContextStore store(registered_entry_kinds());
    PromptOptions po;
    po.questionnaire = &q;
    const auto prompt = assemble_prompt(rftest::contracts(), AgentRole::RiskIntake, store.snapshot(), {}, po);
    return json::parse(stub.stub_complete("risk_intake", prompt, 1));
}

std::string threat_prompt(StubGateway& stub, const std::string& profile_name) {
    ContextStore store(registered_entry_kinds());
    store.append_entry("org_profile", "risk_intake", intake_output(stub, profile_name));
    return assemble_prompt(rftest::contracts(), AgentRole::ThreatModeling,
                           store.snapshot(reads_of(AgentRole::ThreatModeling)), {});
}

}  // namespace

TEST_CASE("ModelConfig validation") {
    CHECK_NOTHROW(config(4096, 1024).validate());
    CHECK(rftest::error_code_of([] { config(1024, 1024).validate(); }) == ErrorCode::InvalidArgument);
    auto c = config(4096);
    c.temperature = -1;
    CHECK(rftest::error_code_of([&] { c.validate(); }) == ErrorCode::InvalidArgument);
    ModelConfig defaults;
    CHECK(defaults.temperature == doctest::Approx(0.2));
    CHECK(defaults.reserved_output_tokens == 1024);
}

TEST_CASE("CompletionRequest::make uses the shared estimator") {
    auto r = CompletionRequest::make("risk_intake", std::string(401, 'p'), config(4096));
    CHECK(r.prompt_tokens == 101);
}

TEST_CASE("overflow is raised before the provider is touched") {
    CountingGateway gw;
    auto req = CompletionRequest::make("threat_modeling", std::string(16000, 'x'), config(4096, 512));
    REQUIRE(req.prompt_tokens == 4000);
    try {
        gw.complete(req);
        FAIL("expected overflow");
    } catch (const ContextOverflowError& e) {
        CHECK(e.code() == ErrorCode::ContextOverflow);
        CHECK(e.prompt_tokens() == 4000);
        CHECK(e.window() == 4096);
        CHECK(e.reserved_tokens() == 512);
        CHECK(e.role() == "threat_modeling");
    }
    CHECK(gw.calls == 0);

    // exactly at the limit is allowed
    auto fits = CompletionRequest::make("threat_modeling", std::string(4 * (4096 - 512), 'x'), config(4096, 512));
    CHECK_NOTHROW(gw.complete(fits));
    CHECK(gw.calls == 1);
}

TEST_CASE("canonical_prompt and fnv1a64") {
    CHECK(canonical_prompt("  a \n\t b  ") == "a b");
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("stub selection formula and determinism") {
    TempDir dir;
    rftest::write_file(dir / "risk_scoring.json", R"(["r0", "r1", "r2"])");
    StubGateway stub(dir.path());
    CHECK(stub.has_script("risk_scoring"));

    const std::string prompt = "some   prompt\ntext";
    const auto h = fnv1a64(canonical_prompt(prompt));
    std::set<std::string> seen;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto out = stub.stub_complete("risk_scoring", prompt, seed);
        CHECK(out == "r" + std::to_string((h % 3 + seed % 3) % 3));
        CHECK(out == stub.stub_complete("risk_scoring", prompt, seed));
        // whitespace-insensitive via canonical prompt
        CHECK(out == stub.stub_complete("risk_scoring", "some prompt text", seed));
        seen.insert(out);
    }
    CHECK(seen.size() == 3);

    CHECK(rftest::error_code_of([&] { stub.stub_complete("mitigation", prompt, 1); }) == ErrorCode::NoScriptForRole);
}

TEST_CASE("stub variants match by substring, first match wins") {
    TempDir dir;
    rftest::write_file(dir / "mitigation.json", R"({"variants": [
        {"match": "ALPHA", "responses": ["alpha"]},
        {"match": "BETA", "responses": [{"k": 1}]},
        {"responses": ["fallback"]}]})");
    rftest::write_file(dir / "threat_modeling.json", R"({"variants": [{"match": "ONLY", "responses": ["x"]}]})");
    StubGateway stub(dir.path());
    CHECK(stub.stub_complete("mitigation", "xx ALPHA BETA", 5) == "alpha");
    CHECK(json::parse(stub.stub_complete("mitigation", "BETA", 5)) == json{{"k", 1}});
    CHECK(stub.stub_complete("mitigation", "none", 5) == "fallback");
    CHECK(rftest::error_code_of([&] { stub.stub_complete("threat_modeling", "nope", 1); }) ==
          ErrorCode::NoScriptForRole);
}

TEST_CASE("stub complete measures only the provider call") {
    TempDir dir;
    rftest::write_file(dir / "risk_intake.json", R"(["ok"])");
    StubOptions opts;
    opts.role_sleep_seconds["risk_intake"] = 0.2;
    StubGateway stub(dir.path(), opts);
    auto res = stub.complete(CompletionRequest::make("risk_intake", "p", config(4096)));
    CHECK(res.text == "ok");
    CHECK(res.provider == ProviderKind::Stub);
    CHECK(!res.truncated);
    CHECK(res.latency_seconds >= 0.2);
    CHECK(res.latency_seconds < 1.0);
}

TEST_CASE("stub probe_window passes the config through") {
    StubGateway stub(rftest::data_dir() / "stub" / "specific");
    CHECK(stub.probe_window(config(4096)) == 4096);
    CHECK(stub.probe_window(config(131072)) == 131072);
}

TEST_CASE("bundled stub: intake flags HIPAA ambiguity for health_15") {
    StubGateway stub(rftest::data_dir() / "stub" / "specific");
    for (std::uint64_t seed : {1, 2, 7}) {
        const json q = rftest::profile("health_15");
        ContextStore store(registered_entry_kinds());
        PromptOptions po;
        po.questionnaire = &q;
        const auto prompt = assemble_prompt(rftest::contracts(), AgentRole::RiskIntake, store.snapshot(), {}, po);
        const json out = json::parse(stub.stub_complete("risk_intake", prompt, seed));
        CHECK(out["industry"] == "Health data analytics");
        CHECK(out["employee_count"] == 15);
        bool flagged = false;
        for (const auto& a : out["ambiguities"]) {
            flagged |= a.get<std::string>().find("HIPAA applicability: unconfirmed") != std::string::npos;
        }
        CHECK(flagged);
    }
}

TEST_CASE("bundled stub: threat modeling on health_15 names Unsecured PHI") {
    StubGateway stub(rftest::data_dir() / "stub" / "specific");
    const auto prompt = threat_prompt(stub, "health_15");
    auto res = stub.complete(CompletionRequest::make("threat_modeling", prompt, config(131072)));
    CHECK(res.text.find("Unsecured PHI") != std::string::npos);
    auto again = stub.complete(CompletionRequest::make("threat_modeling", prompt, config(131072)));
    CHECK(res.text == again.text);
}

TEST_CASE("bundled generic stub: mfg_40 threat titles come from the baseline set") {
    StubGateway stub(rftest::data_dir() / "stub" / "generic");
    const auto prompt = threat_prompt(stub, "mfg_40");
    const std::set<std::string> allowed = {"Unauthorized Access", "Data Breach", "Malware Infection"};
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const json out = json::parse(stub.stub_complete("threat_modeling", prompt, seed));
        REQUIRE(out["threats"].size() >= 1);
        for (const auto& t : out["threats"]) CHECK(allowed.count(t["title"].get<std::string>()) == 1);
    }
}

TEST_CASE("http: generate body and response handling") {
    json last_body;
    std::mutex mu;
    MockServer server([&](httplib::Server& s) {
        s.Post("/api/generate", [&](const httplib::Request& req, httplib::Response& res) {
            json body = json::parse(req.body);
            {
                std::lock_guard lock(mu);
                last_body = body;
            }
            const std::string prompt = body["prompt"];
            if (prompt == "fail") {
                res.status = 500;
                res.set_content("model exploded", "text/plain");
            } else if (prompt == "long") {
                res.set_content(json{{"response", "partial"}, {"done_reason", "length"}}.dump(), "application/json");
            } else if (prompt == "odd") {
                res.set_content(json{{"text", "x"}}.dump(), "application/json");
            } else {
                res.set_content(json{{"response", "echo:" + prompt}, {"done_reason", "stop"}}.dump(),
                                "application/json");
            }
        });
    });

    HttpGateway gw(server.url(), fast_retries());
    auto c = config(8192, 1024, 42);
    c.model_id = "specific-model";
    auto res = gw.complete(CompletionRequest::make("risk_intake", "hello", c));
    CHECK(res.text == "echo:hello");
    CHECK(res.provider == ProviderKind::Http);
    CHECK(!res.truncated);
    {
        std::lock_guard lock(mu);
        CHECK(last_body["model"] == "specific-model");
        CHECK(last_body["stream"] == false);
        CHECK(last_body["options"]["num_ctx"] == 8192);
        CHECK(last_body["options"]["seed"] == 42);
        CHECK(last_body["options"]["temperature"].get<double>() == doctest::Approx(0.2));
    }

    CHECK(gw.complete(CompletionRequest::make("risk_intake", "long", c)).truncated);

    try {
        gw.complete(CompletionRequest::make("risk_intake", "fail", c));
        FAIL("expected ProviderError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ProviderError);
        CHECK(std::string(e.what()).find("model exploded") != std::string::npos);
    }
    CHECK(rftest::error_code_of([&] { gw.complete(CompletionRequest::make("r", "odd", c)); }) ==
          ErrorCode::ProviderError);

    auto no_seed = config(4096, 1024, std::nullopt);
    CHECK(!HttpGateway::generate_body(CompletionRequest::make("r", "p", no_seed))["options"].contains("seed"));
}

TEST_CASE("http: probe_window prefers the provider-reported value") {
    MockServer server([](httplib::Server& s) {
        s.Post("/api/show", [](const httplib::Request& req, httplib::Response& res) {
            const json body = json::parse(req.body);
            if (body["model"] == "runtime") {
                res.set_content(json{{"parameters", "temperature 0.7\nnum_ctx 8192\n"}}.dump(), "application/json");
            } else if (body["model"] == "trained") {
                res.set_content(json{{"model_info", {{"llama.context_length", 8192}}}}.dump(), "application/json");
            } else {
                res.set_content("{}", "application/json");
            }
        });
    });
    HttpGateway gw(server.url(), fast_retries());
    auto c = config(4096);
    c.model_id = "runtime";
    CHECK(gw.probe_window(c) == 8192);
    c.model_id = "trained";
    CHECK(gw.probe_window(c) == 8192);
    c.model_id = "silent";
    CHECK(gw.probe_window(c) == 4096);
}

TEST_CASE("http: unreachable server after retries") {
    int port = 0;
    {
        httplib::Server tmp;
        port = tmp.bind_to_any_port("127.0.0.1");
    }  // closed again: nothing listens there now
    HttpGateway gw("http://127.0.0.1:" + std::to_string(port), fast_retries());
    CHECK(rftest::error_code_of([&] { gw.complete(CompletionRequest::make("r", "p", config(4096))); }) ==
          ErrorCode::ProviderUnreachable);
    CHECK(rftest::error_code_of([&] { gw.probe_window(config(4096)); }) == ErrorCode::ProviderUnreachable);
    CHECK(rftest::error_code_of([] { HttpGateway("not a url"); }) == ErrorCode::ConfigError);
}

TEST_CASE("http: a server that comes up during backoff is reached on retry") {
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    std::atomic<int> hits{0};
    httplib::Server late;
    late.Post("/api/generate", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(json{{"response", "fine"}}.dump(), "application/json");
        ++hits;
    });
    std::thread starter([&] {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
        late.listen("127.0.0.1", port);
    });
    HttpOptions opts = fast_retries();
    opts.backoff = std::chrono::milliseconds(400);
    HttpGateway gw("http://127.0.0.1:" + std::to_string(port), opts);
    std::string text;
    try {
        text = gw.complete(CompletionRequest::make("r", "p", config(4096))).text;
    } catch (...) {
    }
    late.stop();
    starter.join();
    CHECK(text == "fine");
    CHECK(hits == 1);
}

TEST_CASE("http: two requests in flight at once") {
    MockServer server([](httplib::Server& s) {
        s.Post("/api/generate", [](const httplib::Request&, httplib::Response& res) {
            std::this_thread::sleep_for(std::chrono::milliseconds(400));
            res.set_content(json{{"response", "slow"}}.dump(), "application/json");
        });
    });
    HttpGateway gw(server.url(), fast_retries());
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::thread> ts;
    std::atomic<int> ok{0};
    for (int i = 0; i < 2; ++i) {
        ts.emplace_back([&] {
            if (gw.complete(CompletionRequest::make("r", "p", config(4096))).text == "slow") ++ok;
        });
    }
    for (auto& t : ts) t.join();
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(ok == 2);
    CHECK(elapsed < 0.75);
}
