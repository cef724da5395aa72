#include "nhcyl/certificate.hpp"

#include <json.hpp>

namespace nhc {

using ojson = nlohmann::ordered_json;

void CertificateReport::require_le(const std::string& key, double value, double threshold) {
    measured[key] = value;
    thresholds[key] = threshold;
    if (!(value <= threshold)) {
        passed = false;
        notes.push_back(key + " exceeds threshold");
    }
}

void CertificateReport::require_ge(const std::string& key, double value, double threshold) {
    measured[key] = value;
    thresholds[key] = threshold;
    if (!(value >= threshold)) {
        passed = false;
        notes.push_back(key + " below threshold");
    }
}

void CertificateReport::fail(const std::string& why) {
    passed = false;
    notes.push_back(why);
}

namespace {
ojson to_ojson(const CertificateReport& r) {
    ojson j;
    j["name"] = r.name;
    j["inputs_hash"] = r.inputs_hash;
    j["passed"] = r.passed;
    j["measured"] = r.measured;
    j["thresholds"] = r.thresholds;
    j["notes"] = r.notes;
    j["wall_time_s"] = r.wall_time_s;
    return j;
}
}  // namespace

std::string CertificateReport::to_json() const { return to_ojson(*this).dump(2); }

std::string certificates_to_json(const std::vector<CertificateReport>& reports) {
    ojson j = ojson::array();
    for (const auto& r : reports) j.push_back(to_ojson(r));
    return j.dump(2);
}

}  // namespace nhc
