#include "shls/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace shls {

std::string to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::inconclusive: return "inconclusive";
    case Status::skipped: return "skipped";
  }
  return "?";
}

std::string to_string(Comparison c) {
  switch (c) {
    case Comparison::absolute: return "absolute";
    case Comparison::relative: return "relative";
    case Comparison::upper_bound: return "upper_bound";
    case Comparison::within_se: return "within_se";
    case Comparison::informational: return "informational";
  }
  return "?";
}

bool within(const CheckReport& r) {
  if (!std::isfinite(r.value)) return false;
  const double diff = std::abs(r.value - r.oracle);
  switch (r.comparison) {
    case Comparison::absolute: return diff <= r.tolerance;
    case Comparison::relative: return diff <= r.tolerance * std::abs(r.oracle);
    case Comparison::upper_bound: return r.value <= r.oracle + r.tolerance;
    case Comparison::within_se:
      return r.standard_error.has_value() &&
             diff <= r.tolerance * *r.standard_error + 1e-12 * std::max(1.0, std::abs(r.oracle));
    case Comparison::informational: return true;
  }
  return false;
}

CheckReport& CheckReport::decide(bool keep_status) {
  if (keep_status && (status == Status::skipped || status == Status::inconclusive)) return *this;
  status = within(*this) ? Status::pass : Status::fail;
  return *this;
}

namespace {

nlohmann::ordered_json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return nullptr;
  return x > 0 ? "inf" : "-inf";
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

nlohmann::ordered_json to_json(const CheckReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["anchor"] = r.anchor.empty() ? std::string("plumbing") : r.anchor;
  j["value"] = number(r.value);
  j["oracle"] = number(r.oracle);
  j["tolerance"] = number(r.tolerance);
  j["standard_error"] = r.standard_error ? number(*r.standard_error) : nlohmann::ordered_json(nullptr);
  j["comparison"] = to_string(r.comparison);
  j["status"] = to_string(r.status);
  if (!r.note.empty()) j["note"] = r.note;
  if (!r.details.empty()) j["details"] = r.details;
  return j;
}

std::size_t RunReport::count(Status s) const {
  std::size_t n = 0;
  for (const auto& c : checks) n += c.status == s;
  return n;
}

int RunReport::exit_code(bool strict) const {
  if (!errors.empty() || count(Status::fail) > 0) return 1;
  if (strict && count(Status::inconclusive) > 0) return 1;
  return 0;
}

nlohmann::ordered_json RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["config"] = config;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& c : checks) list.push_back(shls::to_json(c));
  j["checks"] = list;
  j["summary"] = {{"total", checks.size()},
                  {"pass", count(Status::pass)},
                  {"fail", count(Status::fail)},
                  {"inconclusive", count(Status::inconclusive)},
                  {"skipped", count(Status::skipped)}};
  j["errors"] = errors;
  return j;
}

void RunReport::write_json(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json().dump(2) << '\n';
}

void RunReport::write_summary_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "name,status,value,oracle,tolerance,standard_error,comparison,anchor\n";
  out << std::setprecision(12);
  for (const auto& c : checks) {
    out << csv_field(c.name) << ',' << to_string(c.status) << ',' << c.value << ',' << c.oracle
        << ',' << c.tolerance << ',';
    if (c.standard_error) out << *c.standard_error;
    out << ',' << to_string(c.comparison) << ',' << csv_field(c.anchor.empty() ? "plumbing" : c.anchor)
        << '\n';
  }
}

}  // namespace shls
