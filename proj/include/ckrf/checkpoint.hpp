#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ckrf/flow.hpp"

namespace ckrf {

// Self-describing resume record. phi is stored as (hi, lo) pairs so a resumed
// run reproduces the uninterrupted one bit for bit.
struct Checkpoint {
    int schema_version = 1;
    std::string config_hash;
    double t = 0.0;
    double eps = 0.0;
    std::vector<double> phi_hi, phi_lo, phi_dot;
    long step_count = 0;

    static Checkpoint from_state(const FlowState& st, const std::string& hash);
    FlowState to_state(const ReferenceBundle& refs) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

// Append-only run bookkeeping: stage events plus a file inventory with byte
// lengths, checked on load.
struct RunManifest {
    int schema_version = 1;
    std::string config_hash;
    std::string created;
    nlohmann::json events = nlohmann::json::array();
    nlohmann::json files = nlohmann::json::object(); // path -> bytes

    void add_event(const std::string& stage, const std::string& status);
    void record_file(const std::string& dir, const std::string& rel_path);
};

void save_manifest(const std::string& path, const RunManifest& m);
RunManifest load_manifest(const std::string& path);

// Every inventoried file exists under dir with the recorded byte length.
// Returns the list of violations (empty = ok).
std::vector<std::string> verify_inventory(const std::string& dir, const RunManifest& m);

} // namespace ckrf
