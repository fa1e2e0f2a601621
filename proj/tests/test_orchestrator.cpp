#include "riskforge/orchestrator.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <chrono>
#include <map>
#include <mutex>
#include <regex>
#include <set>
#include <thread>

using namespace riskforge;
using rftest::TempDir;

namespace {

ContextEntry fake_entry(const std::string& key, std::size_t tokens) {
    ContextEntry e;
    e.key = key;
    e.agent_id = "x";
    e.revision = 1;
    e.token_estimate = tokens;
    return e;
}

ModelConfig window(std::size_t w, std::size_t reserved = 1024) {
    ModelConfig c;
    c.context_window_tokens = w;
    c.reserved_output_tokens = reserved;
    return c;
}

RunRecord sample_record(int i) {
    RunRecord r;
    r.run_id = "20261015T000000Z-" + std::to_string(1000 + i);
    r.profile_id = "health_15";
    r.model_id = "specific";
    r.mode = RunMode::SingleAgent;
    r.seed = i;
    r.window = 4096;
    r.completed = true;
    r.wall_seconds = 0.25 * i;
    r.structural_ok = true;
    r.unique_threat_titles = {"Unsecured PHI", "Title \"quoted\" " + std::to_string(i)};
    return r;
}

struct CallLog {
    std::mutex mu;
    std::vector<std::pair<std::string, bool>> events;  // (role, is_start)
    PipelineObserver observer() {
        PipelineObserver o;
        o.on_agent_start = [this](std::string_view role) {
            std::lock_guard lock(mu);
            events.emplace_back(std::string(role), true);
        };
        o.on_agent_finish = [this](std::string_view role, bool) {
            std::lock_guard lock(mu);
            events.emplace_back(std::string(role), false);
        };
        return o;
    }
};

// Every role starts only after every writer of its reads has finished.
void check_dag_order(const CallLog& log) {
    std::map<std::string, std::string> writer;
    for (AgentRole r : kAllRoles) writer[std::string(writes_key(r))] = std::string(to_string(r));
    std::set<std::string> finished;
    for (const auto& [role, is_start] : log.events) {
        if (!is_start) {
            finished.insert(role);
            continue;
        }
        for (const auto& key : reads_of(*parse_role(role))) CHECK_MESSAGE(finished.count(writer[key]) == 1, role);
    }
}

}  // namespace

TEST_CASE("run mode and failure kind names") {
    CHECK(to_string(RunMode::MultiAgent) == "multi_agent");
    CHECK(parse_run_mode("single") == RunMode::SingleAgent);
    CHECK(parse_run_mode("multi_agent") == RunMode::MultiAgent);
    CHECK(!parse_run_mode("both"));
    for (auto k : {FailureKind::ContextOverflow, FailureKind::AgentFailed, FailureKind::ProviderError}) {
        CHECK(parse_failure_kind(to_string(k)) == k);
    }
    CHECK(default_schema_mode(RunMode::MultiAgent) == SchemaMode::CaseStudy);
    CHECK(default_schema_mode(RunMode::SingleAgent) == SchemaMode::CrossSector);
}

TEST_CASE("standard plan") {
    auto plan = PipelinePlan::standard();
    REQUIRE(plan.stages.size() == 5);
    CHECK(plan.stages[0] == std::vector<AgentRole>{AgentRole::RiskIntake});
    CHECK(plan.stages[1] == std::vector<AgentRole>{AgentRole::ThreatModeling, AgentRole::ControlAssessment});
    CHECK(plan.stages[4] == std::vector<AgentRole>{AgentRole::ReportSynthesis});
    CHECK_NOTHROW(plan.validate());

    auto swapped = plan;
    std::swap(swapped.stages[2], swapped.stages[3]);
    CHECK(rftest::error_code_of([&] { swapped.validate(); }) == ErrorCode::InvalidArgument);
    auto dup = plan;
    dup.stages[4].push_back(AgentRole::RiskIntake);
    CHECK(rftest::error_code_of([&] { dup.validate(); }) == ErrorCode::InvalidArgument);
    auto merged = plan;
    merged.stages[0].push_back(AgentRole::ThreatModeling);
    merged.stages[1] = {AgentRole::ControlAssessment};
    CHECK(rftest::error_code_of([&] { merged.validate(); }) == ErrorCode::InvalidArgument);
    auto partial = plan;
    partial.stages.pop_back();
    CHECK(rftest::error_code_of([&] { partial.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("make_run_id format and uniqueness") {
    const std::regex shape(R"(\d{8}T\d{6}Z-[0-9a-f]{4})");
    std::set<std::string> ids;
    for (int i = 0; i < 20; ++i) {
        auto id = make_run_id();
        CHECK(std::regex_match(id, shape));
        ids.insert(id);
    }
    CHECK(ids.size() > 1);
}

TEST_CASE("enforce_budget examples") {
    ContextSnapshot snap;
    snap.entries = {fake_entry("threat_model", 2000), fake_entry("control_assessment", 1500),
                    fake_entry("org_profile", 9999)};
    snap.total_tokens = 2000 + 1500 + 9999;

    auto fail = enforce_budget(snap, AgentRole::RiskScoring, window(4096), 400);
    CHECK(!fail.pass);
    CHECK(fail.reads_tokens == 3500);
    CHECK(fail.prospective_tokens == 3900);
    CHECK(fail.deficit == 828);
    CHECK(fail.largest_entry == "threat_model");
    CHECK(fail.largest_entry_tokens == 2000);
    const auto diag = fail.diagnostic();
    for (const char* part : {"risk_scoring", "3900", "3500", "400", "1024", "4096", "828", "threat_model"}) {
        CHECK_MESSAGE(diag.find(part) != std::string::npos, part);
    }

    auto pass = enforce_budget(snap, AgentRole::RiskScoring, window(131072), 400);
    CHECK(pass.pass);
    CHECK(pass.deficit == 0);

    // exactly at the window passes
    CHECK(enforce_budget(snap, AgentRole::RiskScoring, window(4924), 400).pass);
    CHECK(!enforce_budget(snap, AgentRole::RiskScoring, window(4923), 400).pass);
}

TEST_CASE("enforce_budget: intake on an empty store fits 4096") {
    const json q = rftest::profile("health_15");
    ContextStore store(registered_entry_kinds());
    const auto snap = store.snapshot(reads_of(AgentRole::RiskIntake));
    const auto prompt = assemble_prompt(rftest::contracts(), AgentRole::RiskIntake, snap, {}, {SchemaMode::CaseStudy, &q});
    auto d = enforce_budget(snap, AgentRole::RiskIntake, window(4096), estimate_tokens(prompt));
    CHECK(d.pass);
    CHECK(d.reads_tokens == 0);
}

TEST_CASE("run record ledger round-trip") {
    TempDir dir;
    const auto ledger = dir / "runs.jsonl";
    CHECK(read_ledger(ledger).empty());
    for (int i = 0; i < 30; ++i) record_run(sample_record(i), ledger);

    RunRecord failed = sample_record(99);
    failed.mode = RunMode::MultiAgent;
    failed.completed = false;
    failed.failed_stage = "risk_scoring";
    failed.failure_kind = FailureKind::ContextOverflow;
    failed.failure_detail = "over by 1233";
    failed.structural_ok = false;
    record_run(failed, ledger);

    auto back = read_ledger(ledger);
    REQUIRE(back.size() == 31);
    for (int i = 0; i < 30; ++i) CHECK(to_json(back[i]) == to_json(sample_record(i)));
    CHECK(to_json(back[30]) == to_json(failed));
    CHECK(back[30].failure_kind == FailureKind::ContextOverflow);
    CHECK(back[30].failed_stage == std::string("risk_scoring"));

    // completed iff no failed stage
    json bad = to_json(failed);
    bad["completed"] = true;
    CHECK(rftest::error_code_of([&] { run_record_from_json(bad); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("concurrent ledger appends never interleave") {
    TempDir dir;
    const auto ledger = dir / "runs.jsonl";
    constexpr int kThreads = 8;
    constexpr int kPer = 100;
    std::vector<std::thread> ts;
    for (int t = 0; t < kThreads; ++t) {
        ts.emplace_back([&, t] {
            for (int i = 0; i < kPer; ++i) {
                auto r = sample_record(t * kPer + i);
                r.failure_detail = std::string(3000, static_cast<char>('a' + t));  // long lines
                record_run(r, ledger);
            }
        });
    }
    for (auto& t : ts) t.join();

    std::istringstream in(rftest::read_file(ledger));
    std::set<std::int64_t> seeds;
    int lines = 0;
    for (std::string line; std::getline(in, line); ++lines) {
        auto doc = json::parse(line);  // throws on a torn line
        seeds.insert(doc["seed"].get<std::int64_t>());
    }
    CHECK(lines == kThreads * kPer);
    CHECK(seeds.size() == kThreads * kPer);
}

TEST_CASE("record_run into an unwritable location") {
    CHECK(rftest::error_code_of([] { record_run(sample_record(1), "/proc/no-such-dir/runs.jsonl"); }) ==
          ErrorCode::StorageFailure);
}

TEST_CASE("health_15 multi-agent at 131072 completes") {
    CallLog log;
    const auto observer = log.observer();
    auto res = rftest::run_pipeline("health_15", 131072, RunMode::MultiAgent, 1, "specific", &observer);
    CHECK(res.record.completed);
    CHECK(!res.record.failed_stage);
    CHECK(res.record.structural_ok);
    REQUIRE(res.report_entry);
    CHECK(res.report_entry->key == "report");
    CHECK(res.report);
    CHECK(res.stages.size() == 5);
    CHECK(res.store->read_latest("threat_model").agent_id == "threat_modeling");
    CHECK(res.record.unique_threat_titles.size() == 4);
    CHECK(res.record.window == 131072);
    CHECK(res.record.wall_seconds >= 0.0);

    // every entry validates against its schema when re-read
    for (AgentRole r : kAllRoles) {
        const auto e = res.store->read_latest(writes_key(r));
        CHECK(validate_schema(rftest::contracts().at(r).output_schema, e.payload).empty());
        CHECK(e.agent_id == to_string(r));
    }
    check_dag_order(log);
    CHECK(log.events.size() == 12);
}

TEST_CASE("snapshot before the report stage holds five entries") {
    auto res = rftest::run_pipeline("health_15", 131072);
    std::vector<std::string> five(registered_entry_kinds().begin(), registered_entry_kinds().end() - 1);
    auto snap = res.store->snapshot(five);
    CHECK(snap.entries.size() == 5);
}

TEST_CASE("health_15 multi-agent at 4096 overflows mid-pipeline") {
    auto res = rftest::run_pipeline("health_15", 4096);
    CHECK(!res.record.completed);
    CHECK(res.record.failure_kind == FailureKind::ContextOverflow);
    REQUIRE(res.record.failed_stage);
    CHECK((*res.record.failed_stage == "risk_scoring" || *res.record.failed_stage == "mitigation"));
    REQUIRE(res.budget_failure);
    CHECK(!res.budget_failure->pass);
    CHECK(res.record.failure_detail.find("over by") != std::string::npos);
    CHECK(!res.report);
    CHECK(!res.report_entry);
    CHECK(!res.record.structural_ok);

    // abort cleanliness: nothing from the failed stage or later
    auto snap = res.store->snapshot();
    for (const char* later : {"risk_register", "recommendations", "report"}) CHECK(!snap.contains(later));
}

TEST_CASE("health_15 single-agent at 4096 completes with the 3/3/3 shape") {
    auto res = rftest::run_pipeline("health_15", 4096, RunMode::SingleAgent);
    CHECK(res.record.completed);
    CHECK(res.record.structural_ok);
    CHECK(res.stages.size() == 1);
    const auto snap = res.store->snapshot();
    CHECK(snap.entries.size() == 6);
    for (const auto& e : snap.entries) CHECK(e.agent_id == "single_agent");
    CHECK(snap.find("threat_model")->payload["threats"].size() == 3);
    CHECK(snap.find("risk_register")->payload["risks"].size() == 3);
    CHECK(snap.find("recommendations")->payload["recommendations"].size() == 3);
}

TEST_CASE("invalid profile is rejected before anything runs") {
    json bad = rftest::profile("health_15");
    bad.erase("industry");
    StubGateway stub(rftest::data_dir() / "stub" / "specific");
    PipelineOptions opts;
    CHECK(rftest::error_code_of([&] {
              execute_pipeline(bad, {rftest::contracts(), rftest::corpus(), stub}, opts);
          }) == ErrorCode::ProfileInvalid);
    json extra = rftest::profile("health_15");
    extra["surprise"] = 1;
    CHECK(rftest::error_code_of([&] {
              execute_pipeline(extra, {rftest::contracts(), rftest::corpus(), stub}, opts);
          }) == ErrorCode::ProfileInvalid);
}

TEST_CASE("missing script surfaces as provider_error at that stage") {
    TempDir dir;
    for (const char* role : {"risk_intake", "threat_modeling", "control_assessment", "risk_scoring"}) {
        std::filesystem::copy_file(rftest::data_dir() / "stub" / "specific" / (std::string(role) + ".json"),
                                   dir / (std::string(role) + ".json"));
    }
    StubGateway stub(dir.path());
    PipelineOptions opts;
    opts.config.seed = 1;
    auto res = execute_pipeline(rftest::profile("health_15"), {rftest::contracts(), rftest::corpus(), stub}, opts);
    CHECK(!res.record.completed);
    CHECK(res.record.failed_stage == std::string("mitigation"));
    CHECK(res.record.failure_kind == FailureKind::ProviderError);
    CHECK(res.store->snapshot().entries.size() == 4);
}

TEST_CASE("malformed agent output is agent_failed") {
    TempDir dir;
    for (const auto& f : std::filesystem::directory_iterator(rftest::data_dir() / "stub" / "specific")) {
        std::filesystem::copy_file(f.path(), dir / f.path().filename().string());
    }
    rftest::write_file(dir / "control_assessment.json", R"(["{\"functions\": {}}"])");
    StubGateway stub(dir.path());
    PipelineOptions opts;
    opts.config.seed = 1;
    auto res = execute_pipeline(rftest::profile("health_15"), {rftest::contracts(), rftest::corpus(), stub}, opts);
    CHECK(!res.record.completed);
    CHECK(res.record.failed_stage == std::string("control_assessment"));
    CHECK(res.record.failure_kind == FailureKind::AgentFailed);
    auto snap = res.store->snapshot();
    CHECK(!snap.contains("control_assessment"));
    CHECK(!snap.contains("risk_register"));
}

TEST_CASE("property: a passing budget check never meets a gateway overflow") {
    for (const char* profile : {"health_15", "fintech_30", "saas_25"}) {
        for (const char* label : {"specific", "generic"}) {
            for (std::size_t w = 2048; w <= 7168; w += 256) {
                auto res = rftest::run_pipeline(profile, w, RunMode::MultiAgent, 1, label);
                if (res.record.failure_kind == FailureKind::ContextOverflow) {
                    CHECK_MESSAGE(res.budget_failure.has_value(), profile, " ", label, " ", w);
                }
            }
        }
    }
}

TEST_CASE("session log captures the run and replays") {
    TempDir dir;
    StubGateway stub(rftest::data_dir() / "stub" / "specific");
    PipelineOptions opts;
    opts.config.seed = 2;
    opts.session_log = dir / "sub" / "context.jsonl";
    auto res = execute_pipeline(rftest::profile("health_15"), {rftest::contracts(), rftest::corpus(), stub}, opts);
    REQUIRE(res.record.completed);
    ContextStore replay(registered_entry_kinds(), *opts.session_log);
    for (const auto& key : registered_entry_kinds()) {
        CHECK(canonical(to_json(replay.read_latest(key))) == canonical(to_json(res.store->read_latest(key))));
    }
}

TEST_CASE("parallel stage overlaps and respects the DAG") {
    StubOptions sleepy;
    sleepy.sleep_seconds = 0.5;
    CallLog log;
    const auto observer = log.observer();
    auto res = rftest::run_pipeline("health_15", 131072, RunMode::MultiAgent, 1, "specific", &observer, sleepy);
    REQUIRE(res.record.completed);
    REQUIRE(res.stages.size() == 5);
    const auto& stage2 = res.stages[1];
    CHECK(stage2.roles == std::vector<std::string>{"threat_modeling", "control_assessment"});
    CHECK(stage2.seconds < 0.9);
    CHECK(stage2.seconds >= 0.5);
    for (std::size_t i : {0, 2, 3, 4}) CHECK(res.stages[i].seconds >= 0.5);
    check_dag_order(log);

    // both stage-2 agents started before either finished
    std::vector<std::string> order;
    for (const auto& [role, start] : log.events) order.push_back(role + (start ? "+" : "-"));
    auto pos = [&](const std::string& s) { return std::find(order.begin(), order.end(), s) - order.begin(); };
    CHECK(pos("threat_modeling+") < pos("control_assessment-"));
    CHECK(pos("control_assessment+") < pos("threat_modeling-"));
}
