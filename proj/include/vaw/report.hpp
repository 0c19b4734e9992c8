#pragma once
// Check records and report rendering.  Both renderings are assembled from the
// same sorted record list, so their status counts always agree.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "scalar.hpp"

namespace vaw {

enum class CheckStatus { Pass, Fail, Skip };

inline const char* statusName(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    default: return "skip";
  }
}

struct CheckRecord {
  std::string suite;
  std::string check;    // stable anchor id, e.g. "cdr.ope.LJ"
  std::string anchor;   // human-readable statement of what was checked
  CheckStatus status = CheckStatus::Skip;
  std::string witness;  // failing value in the expression mini-language
};

struct Report {
  std::vector<CheckRecord> records;
  std::uint64_t seed = 0;

  void add(std::string suite, std::string check, std::string anchor, bool ok,
           std::string witness = "") {
    records.push_back({std::move(suite), std::move(check), std::move(anchor),
                       ok ? CheckStatus::Pass : CheckStatus::Fail,
                       ok ? std::string() : std::move(witness)});
  }
  void skip(std::string suite, std::string check, std::string anchor, std::string why) {
    records.push_back({std::move(suite), std::move(check), std::move(anchor),
                       CheckStatus::Skip, std::move(why)});
  }
  void append(const Report& o) {
    records.insert(records.end(), o.records.begin(), o.records.end());
  }

  // order-independent assembly: records are sorted by check id before emission
  void sortRecords() {
    std::sort(records.begin(), records.end(),
              [](const CheckRecord& a, const CheckRecord& b) { return a.check < b.check; });
  }

  int count(CheckStatus s) const {
    int n = 0;
    for (const auto& r : records)
      if (r.status == s) ++n;
    return n;
  }
  int passed() const { return count(CheckStatus::Pass); }
  int failed() const { return count(CheckStatus::Fail); }
  int skipped() const { return count(CheckStatus::Skip); }

  std::string renderText() const {
    Report copy = *this;
    copy.sortRecords();
    std::string out;
    out += "seed " + std::to_string(seed) + "\n";
    for (const auto& r : copy.records) {
      out += "[" + std::string(statusName(r.status)) + "] " + r.check + "  " + r.anchor + "\n";
      if (!r.witness.empty()) out += "       witness: " + r.witness + "\n";
    }
    out += std::to_string(passed()) + " passed, " + std::to_string(failed()) + " failed";
    if (skipped() > 0) out += ", " + std::to_string(skipped()) + " skipped";
    out += "\n";
    return out;
  }

  // line-delimited records: suite|check|anchor|status|witness
  std::string renderRecords() const {
    Report copy = *this;
    copy.sortRecords();
    std::string out;
    out += "#seed|" + std::to_string(seed) + "\n";
    for (const auto& r : copy.records) {
      out += r.suite + "|" + r.check + "|" + r.anchor + "|" + statusName(r.status) + "|" +
             r.witness + "\n";
    }
    out += "#summary|" + std::to_string(passed()) + "|" + std::to_string(failed()) + "|" +
           std::to_string(skipped()) + "\n";
    return out;
  }
};

}  // namespace vaw
