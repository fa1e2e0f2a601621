#include "riskforge/context_store.hpp"

#include <algorithm>

namespace riskforge {

std::size_t estimate_tokens(std::string_view text) noexcept {
    const std::size_t chars = utf8_length(text);
    return (chars + 3) / 4;
}

json to_json(const ContextEntry& entry) {
    return json{
        {"key", entry.key},
        {"agent_id", entry.agent_id},
        {"revision", entry.revision},
        {"created_at", entry.created_at},
        {"payload", entry.payload},
        {"token_estimate", entry.token_estimate},
    };
}

ContextEntry entry_from_json(const json& line) {
    static constexpr std::array<std::string_view, 6> kFields = {
        "key", "agent_id", "revision", "created_at", "payload", "token_estimate"};
    if (!line.is_object() || line.size() != kFields.size()) {
        throw Error(ErrorCode::StorageFailure, "context entry must be an object with exactly 6 fields");
    }
    for (auto field : kFields) {
        if (!line.contains(std::string(field))) {
            throw Error(ErrorCode::StorageFailure,
                        "context entry missing field '" + std::string(field) + "'");
        }
    }
    try {
        ContextEntry entry;
        entry.key = line.at("key").get<std::string>();
        entry.agent_id = line.at("agent_id").get<std::string>();
        entry.revision = line.at("revision").get<int>();
        entry.created_at = line.at("created_at").get<std::string>();
        entry.payload = line.at("payload");
        entry.token_estimate = line.at("token_estimate").get<std::size_t>();
        return entry;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::StorageFailure, std::string("bad context entry: ") + e.what());
    }
}

const ContextEntry* ContextSnapshot::find(std::string_view key) const noexcept {
    for (const auto& entry : entries) {
        if (entry.key == key) return &entry;
    }
    return nullptr;
}

ContextStore::ContextStore(std::vector<std::string> registered_keys,
                           std::optional<std::filesystem::path> log_path)
    : registered_(std::move(registered_keys)), log_path_(std::move(log_path)) {
    if (!log_path_) return;

    std::error_code ec;
    if (std::filesystem::exists(*log_path_, ec)) replay_log();

    log_.open(*log_path_, std::ios::app | std::ios::binary);
    if (!log_) {
        throw Error(ErrorCode::StorageFailure, "cannot open context log " + log_path_->string());
    }
}

void ContextStore::replay_log() {
    std::ifstream in(*log_path_, std::ios::binary);
    if (!in) throw Error(ErrorCode::StorageFailure, "cannot read context log " + log_path_->string());

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = log_path_->string() + ":" + std::to_string(line_no) + ": ";
        json parsed = json::parse(line, nullptr, false);
        if (parsed.is_discarded()) throw Error(ErrorCode::StorageFailure, where + "invalid JSON");

        ContextEntry entry;
        try {
            entry = entry_from_json(parsed);
        } catch (const Error& e) {
            throw Error(ErrorCode::StorageFailure, where + e.what());
        }
        if (!is_registered(entry.key)) {
            throw Error(ErrorCode::StorageFailure, where + "unregistered key '" + entry.key + "'");
        }
        auto& revisions = history_[entry.key];
        if (entry.revision != static_cast<int>(revisions.size()) + 1) {
            throw Error(ErrorCode::StorageFailure, where + "revision gap for '" + entry.key + "'");
        }
        if (revisions.empty()) order_.push_back(entry.key);
        revisions.push_back(std::move(entry));
    }
}

bool ContextStore::is_registered(std::string_view key) const noexcept {
    return std::find(registered_.begin(), registered_.end(), key) != registered_.end();
}

ContextEntry ContextStore::append_entry(const std::string& key, const std::string& agent_id,
                                        json payload) {
    if (!is_registered(key)) throw Error(ErrorCode::UnknownKey, "unknown context key '" + key + "'");
    if (payload.is_discarded()) {
        throw Error(ErrorCode::InvalidArgument, "payload for '" + key + "' is not well-formed");
    }

    ContextEntry entry;
    entry.key = key;
    entry.agent_id = agent_id;
    entry.created_at = rfc3339_now();
    entry.token_estimate = estimate_tokens(canonical(payload));
    entry.payload = std::move(payload);

    std::unique_lock lock(mutex_);
    auto it = history_.find(key);
    entry.revision = it == history_.end() ? 1 : static_cast<int>(it->second.size()) + 1;

    if (log_path_) {
        log_ << canonical(to_json(entry)) << '\n';
        log_.flush();
        if (!log_) {
            log_.clear();
            throw Error(ErrorCode::StorageFailure, "write to context log " + log_path_->string() + " failed");
        }
    }

    if (it == history_.end()) {
        order_.push_back(key);
        it = history_.emplace(key, std::vector<ContextEntry>{}).first;
    }
    it->second.push_back(entry);
    return entry;
}

ContextEntry ContextStore::read_latest(std::string_view key) const {
    std::shared_lock lock(mutex_);
    auto it = history_.find(std::string(key));
    if (it == history_.end() || it->second.empty()) {
        throw Error(ErrorCode::KeyAbsent, "no entry written for '" + std::string(key) + "'");
    }
    return it->second.back();
}

std::vector<ContextEntry> ContextStore::read_history(std::string_view key) const {
    std::shared_lock lock(mutex_);
    auto it = history_.find(std::string(key));
    if (it == history_.end()) return {};
    return it->second;
}

ContextSnapshot ContextStore::snapshot(const std::optional<std::vector<std::string>>& keys) const {
    std::shared_lock lock(mutex_);
    ContextSnapshot snap;
    for (const auto& key : order_) {
        if (keys && std::find(keys->begin(), keys->end(), key) == keys->end()) continue;
        const auto& latest = history_.at(key).back();
        snap.total_tokens += latest.token_estimate;
        snap.entries.push_back(latest);
    }
    return snap;
}

}  // namespace riskforge
