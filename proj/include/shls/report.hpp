#pragma once

#include "json.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace shls {

enum class Status { pass, fail, inconclusive, skipped };

/// How `value` is compared with `oracle`.
enum class Comparison {
  absolute,       // |value - oracle| <= tolerance
  relative,       // |value - oracle| <= tolerance * |oracle|
  upper_bound,    // value <= oracle + tolerance
  within_se,      // |value - oracle| <= tolerance * standard_error
  informational,  // recorded only; status set by the producer
};

std::string to_string(Status s);
std::string to_string(Comparison c);

struct CheckReport {
  std::string name;
  std::string anchor;  // formula the check exercises, or "plumbing"
  double value = 0.0;
  double oracle = 0.0;
  double tolerance = 0.0;
  std::optional<double> standard_error;
  Status status = Status::skipped;
  Comparison comparison = Comparison::absolute;
  std::string note;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();

  /// Sets status from the comparison. Leaves skipped/inconclusive alone when
  /// `keep_status` is true.
  CheckReport& decide(bool keep_status = false);
  bool passed() const { return status == Status::pass; }
};

nlohmann::ordered_json to_json(const CheckReport& r);

/// Pass/fail per the comparison rule, ignoring the stored status.
bool within(const CheckReport& r);

struct RunReport {
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<CheckReport> checks;
  std::vector<std::string> errors;

  void add(CheckReport r) { checks.push_back(std::move(r)); }
  std::size_t count(Status s) const;
  /// 0 iff no check failed, no suite crashed, and (strict) nothing inconclusive.
  int exit_code(bool strict) const;

  nlohmann::ordered_json to_json() const;
  void write_json(const std::string& path) const;
  void write_summary_csv(const std::string& path) const;
};

}  // namespace shls
