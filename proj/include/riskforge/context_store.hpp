#pragma once

#include "riskforge/common.hpp"

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace riskforge {

/// ceil(characters / 4), characters counted as Unicode code points.
std::size_t estimate_tokens(std::string_view text) noexcept;

struct ContextEntry {
    std::string key;
    std::string agent_id;
    int revision = 0;
    std::string created_at;
    json payload;
    std::size_t token_estimate = 0;
};

json to_json(const ContextEntry& entry);
ContextEntry entry_from_json(const json& line);

struct ContextSnapshot {
    std::vector<ContextEntry> entries;
    std::size_t total_tokens = 0;

    const ContextEntry* find(std::string_view key) const noexcept;
    bool contains(std::string_view key) const noexcept { return find(key) != nullptr; }
};

/// The shared blackboard every agent reads from and writes to.
///
/// Append-only and versioned: each key holds a gapless revision history
/// starting at 1. When constructed with a log path, every append is written
/// as one JSON line before it becomes visible to readers, and an existing log
/// is replayed on construction.
///
/// Appends and reads may come from different threads; per-key revisions are
/// linearizable under a single writer lock.
class ContextStore {
public:
    explicit ContextStore(std::vector<std::string> registered_keys,
                          std::optional<std::filesystem::path> log_path = std::nullopt);

    ContextStore(const ContextStore&) = delete;
    ContextStore& operator=(const ContextStore&) = delete;

    ContextEntry append_entry(const std::string& key, const std::string& agent_id, json payload);

    ContextEntry read_latest(std::string_view key) const;
    std::vector<ContextEntry> read_history(std::string_view key) const;

    // Latest revision per key in first-append order. With a key list, only
    // those keys that have been written are included.
    ContextSnapshot snapshot(const std::optional<std::vector<std::string>>& keys = std::nullopt) const;

    bool is_registered(std::string_view key) const noexcept;
    const std::vector<std::string>& registered_keys() const noexcept { return registered_; }
    const std::optional<std::filesystem::path>& log_path() const noexcept { return log_path_; }

private:
    void replay_log();

    std::vector<std::string> registered_;
    std::optional<std::filesystem::path> log_path_;
    std::ofstream log_;

    mutable std::shared_mutex mutex_;
    std::vector<std::string> order_;
    std::unordered_map<std::string, std::vector<ContextEntry>> history_;
};

}  // namespace riskforge
