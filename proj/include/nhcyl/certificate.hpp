#pragma once

#include <map>
#include <string>
#include <vector>

#include "nhcyl/types.hpp"

namespace nhc {

/**
 * Result of one verification step. Every quantitative claim the pipeline makes ends
 * up as a (measured, threshold) pair here, so the CSV summaries can be traced back
 * to a certificate field. Wall time is recorded for reporting only and is excluded
 * from the determinism-sensitive CSV outputs.
 */
struct CertificateReport {
    std::string name;
    std::uint64_t inputs_hash = 0;
    bool passed = true;
    std::map<std::string, double> measured;
    std::map<std::string, double> thresholds;
    std::vector<std::string> notes;
    double wall_time_s = 0.0;

    /** Record measured <= threshold (or >= if `at_least`); updates passed. */
    void require_le(const std::string& key, double value, double threshold);
    void require_ge(const std::string& key, double value, double threshold);
    void fail(const std::string& why);
    void note(const std::string& text) { notes.push_back(text); }

    std::string to_json() const;  // pretty-printed, key order deterministic
};

/** Serialize a batch of certificates into one JSON document. */
std::string certificates_to_json(const std::vector<CertificateReport>& reports);

}  // namespace nhc
