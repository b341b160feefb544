#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace intrinsic {

inline constexpr const char* kReportSchemaVersion = "1.0";
inline constexpr const char* kLibraryVersion = "0.1.0";

enum class Status { pass, fail, vacuous, unsupported, inconclusive };
std::string to_string(Status s);

/// One verified inequality or identity. margin = rhs − lhs for "lhs ≤ rhs" checks and
/// −|lhs − rhs| for equalities; a check passes when margin ≥ −tolerance.
struct Record {
    std::string id;
    std::string anchor;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    double tolerance = 0.0;
    std::vector<std::string> estimators;
    double se = 0.0;
    Status status = Status::pass;
    std::string note;
};

Record check_leq(std::string id, std::string anchor, double lhs, double rhs, double tolerance,
                 std::vector<std::string> estimators = {"analytic"}, double se = 0.0);
Record check_equal(std::string id, std::string anchor, double lhs, double rhs, double tolerance,
                   std::vector<std::string> estimators = {"analytic"}, double se = 0.0);
Record make_status(std::string id, std::string anchor, Status status, std::string note);

struct StatusCounts {
    int pass = 0, fail = 0, vacuous = 0, unsupported = 0, inconclusive = 0;
};

class Report {
public:
    explicit Report(std::string suite, std::uint64_t seed = 0);

    const std::string& suite() const { return suite_; }
    std::uint64_t seed() const { return seed_; }
    void add(Record r) { records_.push_back(std::move(r)); }
    void append(const Report& other);
    const std::vector<Record>& records() const { return records_; }
    StatusCounts counts() const;
    /// 0 iff no record failed.
    int exit_code() const { return counts().fail == 0 ? 0 : 1; }

    void set_config(nlohmann::ordered_json config) { config_ = std::move(config); }
    void set_wall_seconds(double s) { wall_seconds_ = s; }
    void add_timing(std::string section, double seconds) {
        timings_.emplace_back(std::move(section), seconds);
    }
    const std::vector<std::pair<std::string, double>>& timings() const { return timings_; }
    double wall_seconds() const { return wall_seconds_; }

    /// Versioned JSON; wall time sits under "timing" and is the only run-dependent field.
    nlohmann::ordered_json to_json() const;
    void write_json(const std::string& path) const;
    void print_table(std::ostream& os) const;

private:
    std::string suite_;
    std::uint64_t seed_;
    std::vector<Record> records_;
    nlohmann::ordered_json config_;
    double wall_seconds_ = 0.0;
    std::vector<std::pair<std::string, double>> timings_;
};

/// JSON of a report with the timing block removed (for determinism comparisons).
std::string deterministic_dump(const nlohmann::ordered_json& report);

}  // namespace intrinsic
