#include "intrinsic/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace intrinsic {

using nlohmann::ordered_json;

std::string to_string(Status s) {
    switch (s) {
        case Status::pass: return "pass";
        case Status::fail: return "fail";
        case Status::vacuous: return "vacuous";
        case Status::unsupported: return "unsupported";
        case Status::inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

Record base_record(std::string id, std::string anchor, double lhs, double rhs, double tolerance,
                   std::vector<std::string> estimators, double se) {
    Record r;
    r.id = std::move(id);
    r.anchor = std::move(anchor);
    r.lhs = lhs;
    r.rhs = rhs;
    r.tolerance = tolerance;
    r.estimators = std::move(estimators);
    r.se = se;
    return r;
}

void classify(Record& r) {
    if (std::isnan(r.margin)) {
        r.status = Status::fail;
        r.note = "non-finite comparison";
    } else {
        r.status = r.margin >= -r.tolerance ? Status::pass : Status::fail;
    }
}

// Non-finite numbers become null with a sibling tag.
void put_number(ordered_json& j, const std::string& key, double v) {
    if (std::isfinite(v)) {
        j[key] = v;
        return;
    }
    j[key] = nullptr;
    j[key + "_tag"] = std::isnan(v) ? "nan" : (v > 0 ? "+inf" : "-inf");
}

std::string short_num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace

Record check_leq(std::string id, std::string anchor, double lhs, double rhs, double tolerance,
                 std::vector<std::string> estimators, double se) {
    Record r = base_record(std::move(id), std::move(anchor), lhs, rhs, tolerance,
                           std::move(estimators), se);
    r.margin = rhs - lhs;
    if (std::isinf(rhs) && rhs > 0 && std::isfinite(lhs)) {
        r.status = Status::vacuous;
        r.note = "upper side is +inf";
        return r;
    }
    if (std::isinf(lhs) && lhs < 0 && std::isfinite(rhs)) {
        r.status = Status::vacuous;
        r.note = "lower side is -inf";
        return r;
    }
    classify(r);
    return r;
}

Record check_equal(std::string id, std::string anchor, double lhs, double rhs, double tolerance,
                   std::vector<std::string> estimators, double se) {
    Record r = base_record(std::move(id), std::move(anchor), lhs, rhs, tolerance,
                           std::move(estimators), se);
    r.margin = -std::abs(lhs - rhs);
    classify(r);
    return r;
}

Record make_status(std::string id, std::string anchor, Status status, std::string note) {
    Record r;
    r.id = std::move(id);
    r.anchor = std::move(anchor);
    r.status = status;
    r.note = std::move(note);
    r.estimators = {};
    return r;
}

Report::Report(std::string suite, std::uint64_t seed) : suite_(std::move(suite)), seed_(seed) {}

void Report::append(const Report& other) {
    records_.insert(records_.end(), other.records_.begin(), other.records_.end());
    timings_.insert(timings_.end(), other.timings_.begin(), other.timings_.end());
}

StatusCounts Report::counts() const {
    StatusCounts c;
    for (const Record& r : records_) {
        switch (r.status) {
            case Status::pass: ++c.pass; break;
            case Status::fail: ++c.fail; break;
            case Status::vacuous: ++c.vacuous; break;
            case Status::unsupported: ++c.unsupported; break;
            case Status::inconclusive: ++c.inconclusive; break;
        }
    }
    return c;
}

ordered_json Report::to_json() const {
    ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["suite"] = suite_;
    j["environment"] = {{"seed", seed_}, {"version", kLibraryVersion}};
    if (!config_.is_null()) j["config"] = config_;
    StatusCounts c = counts();
    j["summary"] = {{"records", records_.size()}, {"pass", c.pass},          {"fail", c.fail},
                    {"vacuous", c.vacuous},       {"unsupported", c.unsupported},
                    {"inconclusive", c.inconclusive}};
    ordered_json recs = ordered_json::array();
    for (const Record& r : records_) {
        ordered_json x;
        x["id"] = r.id;
        x["anchor"] = r.anchor;
        put_number(x, "lhs", r.lhs);
        put_number(x, "rhs", r.rhs);
        put_number(x, "margin", r.margin);
        put_number(x, "tolerance", r.tolerance);
        x["estimators"] = r.estimators;
        put_number(x, "se", r.se);
        x["status"] = to_string(r.status);
        if (!r.note.empty()) x["note"] = r.note;
        recs.push_back(std::move(x));
    }
    j["records"] = std::move(recs);
    ordered_json sections = ordered_json::object();
    for (const auto& [name, sec] : timings_) sections[name] = sec;
    j["timing"] = {{"wall_seconds", wall_seconds_}, {"sections", sections}};
    return j;
}

void Report::write_json(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write report " + path);
    os << to_json().dump(2) << '\n';
}

void Report::print_table(std::ostream& os) const {
    os << "suite " << suite_ << "  seed " << seed_ << "\n";
    os << std::left << std::setw(58) << "check" << std::setw(13) << "status" << std::setw(12)
       << "lhs" << std::setw(12) << "rhs" << std::setw(12) << "margin" << "tol\n";
    for (const Record& r : records_) {
        os << std::left << std::setw(57) << r.id << " " << std::setw(13) << to_string(r.status)
           << std::setw(12) << short_num(r.lhs) << std::setw(12) << short_num(r.rhs)
           << std::setw(12) << short_num(r.margin) << short_num(r.tolerance);
        if (!r.note.empty()) os << "  " << r.note;
        os << "\n";
    }
    StatusCounts c = counts();
    os << "pass " << c.pass << "  fail " << c.fail << "  vacuous " << c.vacuous
       << "  unsupported " << c.unsupported << "  inconclusive " << c.inconclusive << "\n";
}

std::string deterministic_dump(const ordered_json& report) {
    ordered_json copy = report;
    copy.erase("timing");
    return copy.dump();
}

}  // namespace intrinsic
