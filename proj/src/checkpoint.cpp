#include "ckrf/checkpoint.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "ckrf/errors.hpp"

namespace ckrf {

namespace fs = std::filesystem;
using nlohmann::json;

Checkpoint Checkpoint::from_state(const FlowState& st, const std::string& hash) {
    Checkpoint ck;
    ck.config_hash = hash;
    ck.t = st.t;
    ck.eps = st.eps;
    ck.step_count = st.step_count;
    ck.phi_hi.resize(st.phi.size());
    ck.phi_lo.resize(st.phi.size());
    for (std::size_t i = 0; i < st.phi.size(); ++i) {
        ck.phi_hi[i] = st.phi[i].hi;
        ck.phi_lo[i] = st.phi[i].lo;
    }
    ck.phi_dot = st.phi_dot;
    return ck;
}

FlowState Checkpoint::to_state(const ReferenceBundle& refs) const {
    FlowState st;
    st.t = t;
    st.eps = eps;
    st.step_count = step_count;
    st.phi = DDVec::from_parts(phi_hi, phi_lo);
    st.phi_dot = phi_dot;
    SecondDiff d2(refs.grid);
    std::vector<double> d2phi;
    d2.apply(st.phi, d2phi);
    st.rho = refs.chi_t(t);
    for (std::size_t i = 0; i < st.rho.size(); ++i)
        st.rho[i] += refs.model.delta * refs.profile_d2[i] + d2phi[i];
    return st;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    json j;
    j["schema_version"] = ck.schema_version;
    j["config_hash"] = ck.config_hash;
    j["t"] = ck.t;
    j["eps"] = ck.eps;
    j["step_count"] = ck.step_count;
    j["phi_hi"] = ck.phi_hi;
    j["phi_lo"] = ck.phi_lo;
    j["phi_dot"] = ck.phi_dot;
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write checkpoint " + path);
    f << j.dump();
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read checkpoint " + path);
    json j;
    f >> j;
    Checkpoint ck;
    ck.schema_version = j.at("schema_version").get<int>();
    if (ck.schema_version != 1)
        throw std::runtime_error("checkpoint schema_version " +
                                 std::to_string(ck.schema_version) + " unsupported");
    ck.config_hash = j.at("config_hash").get<std::string>();
    ck.t = j.at("t").get<double>();
    ck.eps = j.at("eps").get<double>();
    ck.step_count = j.at("step_count").get<long>();
    ck.phi_hi = j.at("phi_hi").get<std::vector<double>>();
    ck.phi_lo = j.at("phi_lo").get<std::vector<double>>();
    ck.phi_dot = j.at("phi_dot").get<std::vector<double>>();
    return ck;
}

void RunManifest::add_event(const std::string& stage, const std::string& status) {
    auto now = std::chrono::system_clock::now().time_since_epoch();
    json e;
    e["stage"] = stage;
    e["status"] = status;
    e["unix_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    events.push_back(e);
}

void RunManifest::record_file(const std::string& dir, const std::string& rel_path) {
    files[rel_path] = static_cast<long long>(fs::file_size(fs::path(dir) / rel_path));
}

void save_manifest(const std::string& path, const RunManifest& m) {
    json j;
    j["schema_version"] = m.schema_version;
    j["config_hash"] = m.config_hash;
    j["created"] = m.created;
    j["events"] = m.events;
    j["files"] = m.files;
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write manifest " + path);
    f << j.dump(2) << '\n';
}

RunManifest load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read manifest " + path);
    json j;
    f >> j;
    RunManifest m;
    m.schema_version = j.at("schema_version").get<int>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.created = j.value("created", "");
    m.events = j.at("events");
    m.files = j.at("files");
    return m;
}

std::vector<std::string> verify_inventory(const std::string& dir, const RunManifest& m) {
    std::vector<std::string> problems;
    for (auto it = m.files.begin(); it != m.files.end(); ++it) {
        fs::path p = fs::path(dir) / it.key();
        if (!fs::exists(p)) {
            problems.push_back("missing file: " + it.key());
            continue;
        }
        auto want = it.value().get<long long>();
        auto got = static_cast<long long>(fs::file_size(p));
        if (want != got)
            problems.push_back("size mismatch for " + it.key() + ": manifest " +
                               std::to_string(want) + ", disk " + std::to_string(got));
    }
    return problems;
}

} // namespace ckrf
