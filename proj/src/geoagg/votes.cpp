#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "obeskit/geoagg.hpp"

namespace obeskit::geoagg {

using nlohmann::json;

namespace {

std::string dedupe_key(const GeohashVote& v) {
    std::ostringstream k;
    k << v.voter << "|" << v.gh << "|" << v.t0 << "|" << v.t1;
    return k.str();
}

json vote_to_json(const GeohashVote& v) {
    return json{{"gh", v.gh}, {"voter", v.voter}, {"t0", v.t0}, {"t1", v.t1},
                {"payload", v.payload}};
}

GeohashVote vote_from_json(const json& j) {
    GeohashVote v;
    v.gh = j.at("gh").get<std::string>();
    v.voter = j.at("voter").get<std::string>();
    v.t0 = j.at("t0").get<EpochMs>();
    v.t1 = j.at("t1").get<EpochMs>();
    if (j.contains("payload"))
        v.payload = j.at("payload").get<std::map<std::string, double>>();
    return v;
}

void validate(const GeohashVote& v) {
    if (!geohash_valid(v.gh)) throw DataError("vote with invalid geohash: " + v.gh);
    if (v.voter.empty()) throw DataError("vote without voter tag");
    if (v.t1 <= v.t0) throw DataError("vote with empty visit interval");
    for (const auto& [key, _] : v.payload)
        if (key == "lat" || key == "lon" || key == "subject_id")
            throw DataError("vote payload may not carry coordinates or subject ids");
}

}  // namespace

VoteStore::VoteStore(const std::string& log_path) : log_path_(log_path) {
    // Truncate: the store owns the log for its lifetime.
    std::ofstream out(log_path_, std::ios::trunc);
    if (!out) throw DataError("cannot open vote log for writing: " + log_path_);
}

bool VoteStore::cast(const GeohashVote& v) {
    validate(v);
    const std::string key = dedupe_key(v);
    std::lock_guard<std::mutex> lock(mu_);
    if (!seen_.insert(key).second) return false;  // identical visit already voted
    votes_.push_back(v);
    if (!log_path_.empty()) {
        std::ofstream out(log_path_, std::ios::app);
        if (!out) throw DataError("cannot append to vote log: " + log_path_);
        out << vote_to_json(v).dump() << "\n";
    }
    return true;
}

std::size_t VoteStore::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return votes_.size();
}

std::vector<GeohashVote> VoteStore::snapshot() const {
    std::lock_guard<std::mutex> lock(mu_);
    return votes_;
}

VoteStore VoteStore::load(const std::string& log_path) {
    std::ifstream in(log_path);
    if (!in) throw DataError("cannot open vote log: " + log_path);
    VoteStore store;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(log_path + ":" + std::to_string(line_no) + ": bad vote record: " +
                            e.what());
        }
        store.cast(vote_from_json(j));
    }
    return store;
}

}  // namespace obeskit::geoagg
