#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ext_dist.hpp"

namespace projcx {

/// A single counterexample to one axiom or property.
struct Violation {
    std::string axiom;                 // e.g. "SP3", "P1", "sandwich"
    std::vector<std::int64_t> spaces;  // witness space ids, role order fixed per axiom
    std::vector<ExtDist> values;       // the offending quantities
    std::string detail;                // human-readable expansion

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["axiom"] = axiom;
        j["spaces"] = spaces;
        nlohmann::json vals = nlohmann::json::array();
        for (const auto& v : values) {
            if (v.is_infinite())
                vals.push_back("inf");
            else
                vals.push_back(v.value());
        }
        j["values"] = vals;
        j["detail"] = detail;
        return j;
    }
};

/// Result of a verification or audit run.  `passed` is true exactly when no
/// violations were recorded.  `counts` holds named tallies (checked triples,
/// vacuous hypotheses, ...), `notes` carries caveats such as sampling.
struct AxiomReport {
    std::string check;
    bool passed = true;
    std::vector<Violation> violations;
    std::map<std::string, std::int64_t> counts;
    std::vector<std::string> notes;
    std::optional<std::int64_t> inferred_theta;  // set by inference runs; absent means "none"
    bool inferred_theta_none = false;            // inference ran and concluded no theta works
    std::string mode = "exhaustive";             // or "sampled"
    std::optional<std::uint64_t> seed;

    static constexpr std::size_t kMaxStoredViolations = 64;

    void add_violation(Violation v) {
        passed = false;
        counts["violations"]++;
        if (violations.size() < kMaxStoredViolations) violations.push_back(std::move(v));
    }

    /// Fold in a pre-counted block (used by chunked scans); `total` may
    /// exceed the number of stored witnesses.
    void add_violations_block(std::vector<Violation>&& stored, std::int64_t total) {
        if (total <= 0) return;
        passed = false;
        counts["violations"] += total;
        for (auto& v : stored)
            if (violations.size() < kMaxStoredViolations) violations.push_back(std::move(v));
    }

    void note(const std::string& n) { notes.push_back(n); }

    void bump(const std::string& key, std::int64_t by = 1) { counts[key] += by; }

    /// Merge another report's tallies into this one (used by chunked runs).
    void absorb(const AxiomReport& other) {
        if (!other.passed) passed = false;
        for (const auto& v : other.violations) {
            counts["violations"]++;
            if (violations.size() < kMaxStoredViolations) violations.push_back(v);
        }
        for (const auto& [k, c] : other.counts)
            if (k != "violations") counts[k] += c;
        for (const auto& n : other.notes) notes.push_back(n);
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["schema"] = "projcx-report-v1";
        j["check"] = check;
        j["passed"] = passed;
        nlohmann::json viols = nlohmann::json::array();
        for (const auto& v : violations) viols.push_back(v.to_json());
        j["violations"] = viols;
        j["counts"] = counts;
        j["notes"] = notes;
        if (inferred_theta_none)
            j["inferred_theta"] = "none";
        else if (inferred_theta)
            j["inferred_theta"] = *inferred_theta;
        j["mode"] = mode;
        if (seed) j["seed"] = *seed;
        return j;
    }

    std::string summary() const {
        std::ostringstream os;
        os << check << ": " << (passed ? "pass" : "FAIL");
        if (!passed) os << " (" << counts.at("violations") << " violations)";
        return os.str();
    }
};

/// Bounded witness collector for per-chunk scans: counts every violation but
/// stores only as many as a report can keep.
struct ViolationBuffer {
    std::vector<Violation> stored;
    std::int64_t total = 0;

    void add(Violation v) {
        ++total;
        if (stored.size() < AxiomReport::kMaxStoredViolations) stored.push_back(std::move(v));
    }
};

/// Thrown when a construction cannot certify its own output.  Carries the
/// report describing the witness.
class CertificationError : public std::runtime_error {
public:
    explicit CertificationError(AxiomReport report)
        : std::runtime_error(report.summary()), report_(std::move(report)) {}

    const AxiomReport& report() const { return report_; }

private:
    AxiomReport report_;
};

}  // namespace projcx
