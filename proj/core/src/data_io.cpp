#include "crashfreq/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace crashfreq {

namespace {

const std::vector<std::string> kColumnOrder = {
    "site_id",      "kabco",        "kabc",       "kab",
    "aadt",         "avg_on",       "avg_off",    "dist_to_int",
    "median_width", "speed_limit",  "lane_count", "school_count",
    "park_count",   "stop_count",   "int_type",   "marked_xwalk",
    "median_type",  "lighting",     "area",       "sidewalk",
    "curve",        "design",       "proximity",  "cover"};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& col, long line,
                    std::vector<std::string>& issues) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing chars");
    return v;
  } catch (const std::exception&) {
    issues.push_back("line " + std::to_string(line) + ": column '" + col +
                     "': not a number: '" + s + "'");
    return 0.0;
  }
}

int parse_int(const std::string& s, const std::string& col, long line,
              std::vector<std::string>& issues) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing chars");
    return v;
  } catch (const std::exception&) {
    issues.push_back("line " + std::to_string(line) + ": column '" + col +
                     "': not an integer: '" + s + "'");
    return 0;
  }
}

void check_label(const std::string& value, const std::string& col, long line,
                 std::vector<std::string>& issues) {
  const auto& domains = categorical_domains();
  const auto& levels = domains.at(col);
  if (std::find(levels.begin(), levels.end(), value) == levels.end()) {
    issues.push_back("line " + std::to_string(line) + ": column '" + col +
                     "': unknown label '" + value + "'");
  }
}

std::string& categorical_ref(SiteRecord& r, const std::string& name) {
  if (name == "int_type") return r.int_type;
  if (name == "marked_xwalk") return r.marked_xwalk;
  if (name == "median_type") return r.median_type;
  if (name == "lighting") return r.lighting;
  if (name == "area") return r.area;
  if (name == "sidewalk") return r.sidewalk;
  if (name == "curve") return r.curve;
  if (name == "design") return r.design;
  if (name == "proximity") return r.proximity;
  if (name == "cover") return r.cover;
  throw std::invalid_argument("unknown categorical field: " + name);
}

std::string format_double(double v) {
  // Shortest representation that round-trips exactly.
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = std::strtod(buf, nullptr);
  if (back == v) {
    for (int prec = 1; prec < 17; ++prec) {
      char tight[40];
      std::snprintf(tight, sizeof(tight), "%.*g", prec, v);
      if (std::strtod(tight, nullptr) == v) return tight;
    }
  }
  return buf;
}

}  // namespace

const std::map<std::string, std::vector<std::string>>& categorical_domains() {
  static const std::map<std::string, std::vector<std::string>> domains = {
      {"int_type", {"non_signalized", "signalized"}},
      {"marked_xwalk", {"yes", "no"}},
      {"median_type", {"divided", "undivided"}},
      {"lighting", {"yes", "no"}},
      {"area", {"com", "res", "mix"}},
      {"sidewalk", {"yes", "no"}},
      {"curve", {"no", "yes"}},
      {"design", {"other", "curbside"}},
      {"proximity", {"near", "far", "midblock"}},
      {"cover", {"covered", "uncovered"}},
  };
  return domains;
}

bool is_categorical_field(const std::string& name) {
  return categorical_domains().count(name) > 0;
}

bool is_continuous_field(const std::string& name) {
  static const std::vector<std::string> cont = {
      "aadt",        "avg_on",       "avg_off",     "dist_to_int",
      "median_width","speed_limit",  "lane_count",  "school_count",
      "park_count",  "stop_count"};
  return std::find(cont.begin(), cont.end(), name) != cont.end();
}

double continuous_value(const SiteRecord& r, const std::string& name) {
  if (name == "aadt") return r.aadt;
  if (name == "avg_on") return r.avg_on;
  if (name == "avg_off") return r.avg_off;
  if (name == "dist_to_int") return r.dist_to_int;
  if (name == "median_width") return r.median_width;
  if (name == "speed_limit") return r.speed_limit;
  if (name == "lane_count") return r.lane_count;
  if (name == "school_count") return r.school_count;
  if (name == "park_count") return r.park_count;
  if (name == "stop_count") return r.stop_count;
  throw std::invalid_argument("unknown continuous field: " + name);
}

const std::string& categorical_value(const SiteRecord& r, const std::string& name) {
  if (name == "int_type") return r.int_type;
  if (name == "marked_xwalk") return r.marked_xwalk;
  if (name == "median_type") return r.median_type;
  if (name == "lighting") return r.lighting;
  if (name == "area") return r.area;
  if (name == "sidewalk") return r.sidewalk;
  if (name == "curve") return r.curve;
  if (name == "design") return r.design;
  if (name == "proximity") return r.proximity;
  if (name == "cover") return r.cover;
  throw std::invalid_argument("unknown categorical field: " + name);
}

int response_value(const SiteRecord& r, const std::string& response) {
  if (response == "kabco") return r.kabco;
  if (response == "kabc") return r.kabc;
  if (response == "kab") return r.kab;
  throw std::invalid_argument("unknown response: " + response);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset file: " + path);

  std::string header_line;
  if (!std::getline(in, header_line))
    throw ValidationError("empty dataset file: " + path);

  const auto header = split_csv_line(trim(header_line));
  std::map<std::string, std::size_t> col_index;
  for (std::size_t i = 0; i < header.size(); ++i) col_index[trim(header[i])] = i;

  std::vector<std::string> missing;
  for (const auto& name : kColumnOrder) {
    if (!col_index.count(name)) missing.push_back(name);
  }
  if (!missing.empty()) {
    std::string msg = "missing column(s):";
    for (const auto& m : missing) msg += " " + m;
    throw ValidationError(msg);
  }

  Dataset out;
  std::vector<std::string> issues;
  std::string line;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < header.size()) {
      issues.push_back("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
      continue;
    }
    auto field = [&](const std::string& name) {
      return trim(fields[col_index.at(name)]);
    };
    SiteRecord r;
    r.site_id = field("site_id");
    r.kabco = parse_int(field("kabco"), "kabco", line_no, issues);
    r.kabc = parse_int(field("kabc"), "kabc", line_no, issues);
    r.kab = parse_int(field("kab"), "kab", line_no, issues);
    r.aadt = parse_double(field("aadt"), "aadt", line_no, issues);
    r.avg_on = parse_double(field("avg_on"), "avg_on", line_no, issues);
    r.avg_off = parse_double(field("avg_off"), "avg_off", line_no, issues);
    r.dist_to_int = parse_double(field("dist_to_int"), "dist_to_int", line_no, issues);
    r.median_width = parse_double(field("median_width"), "median_width", line_no, issues);
    r.speed_limit = parse_double(field("speed_limit"), "speed_limit", line_no, issues);
    r.lane_count = parse_int(field("lane_count"), "lane_count", line_no, issues);
    r.school_count = parse_int(field("school_count"), "school_count", line_no, issues);
    r.park_count = parse_int(field("park_count"), "park_count", line_no, issues);
    r.stop_count = parse_int(field("stop_count"), "stop_count", line_no, issues);
    for (const auto& [name, levels] : categorical_domains()) {
      (void)levels;
      const std::string value = field(name);
      check_label(value, name, line_no, issues);
      categorical_ref(r, name) = value;
    }

    if (r.kabco < 0 || r.kabc < 0 || r.kab < 0)
      issues.push_back("line " + std::to_string(line_no) + ": negative crash count");
    if (!(r.kab <= r.kabc && r.kabc <= r.kabco))
      issues.push_back("line " + std::to_string(line_no) +
                       ": severity ordering violated (kab <= kabc <= kabco)");
    if (!(r.aadt > 0))
      issues.push_back("line " + std::to_string(line_no) + ": aadt must be > 0");
    if (r.speed_limit < 20.0 || r.speed_limit > 65.0)
      issues.push_back("line " + std::to_string(line_no) +
                       ": speed_limit outside [20, 65]");
    if (r.avg_on < 0 || r.avg_off < 0 || r.dist_to_int < 0 || r.median_width < 0 ||
        r.lane_count < 0 || r.school_count < 0 || r.park_count < 0 || r.stop_count < 0)
      issues.push_back("line " + std::to_string(line_no) + ": negative covariate");
    out.push_back(std::move(r));
  }

  if (!issues.empty()) {
    std::string msg = std::to_string(issues.size()) + " invalid row(s):";
    for (const auto& i : issues) msg += "\n  " + i;
    throw ValidationError(msg, issues);
  }
  return out;
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write dataset file: " + path);
  for (std::size_t i = 0; i < kColumnOrder.size(); ++i) {
    out << kColumnOrder[i] << (i + 1 < kColumnOrder.size() ? ',' : '\n');
  }
  for (const auto& r : data) {
    out << r.site_id << ',' << r.kabco << ',' << r.kabc << ',' << r.kab << ','
        << format_double(r.aadt) << ',' << format_double(r.avg_on) << ','
        << format_double(r.avg_off) << ',' << format_double(r.dist_to_int) << ','
        << format_double(r.median_width) << ',' << format_double(r.speed_limit)
        << ',' << r.lane_count << ',' << r.school_count << ',' << r.park_count
        << ',' << r.stop_count << ',' << r.int_type << ',' << r.marked_xwalk
        << ',' << r.median_type << ',' << r.lighting << ',' << r.area << ','
        << r.sidewalk << ',' << r.curve << ',' << r.design << ',' << r.proximity
        << ',' << r.cover << '\n';
  }
}

namespace {

DescriptiveRow describe(const std::string& name, const std::vector<double>& v) {
  DescriptiveRow row;
  row.variable = name;
  row.min = *std::min_element(v.begin(), v.end());
  row.max = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  row.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - row.mean) * (x - row.mean);
  row.sd = std::sqrt(ss / static_cast<double>(v.size()));
  return row;
}

}  // namespace

DescriptivesReport validate_descriptives(
    const Dataset& data, const std::map<std::string, ReferenceStat>& reference) {
  if (data.empty()) throw ValidationError("validate_descriptives: empty dataset");
  DescriptivesReport report;

  auto add = [&](const std::string& name, auto getter) {
    std::vector<double> v(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) v[i] = getter(data[i]);
    DescriptiveRow row = describe(name, v);
    auto ref = reference.find(name);
    if (ref != reference.end() &&
        std::fabs(row.mean - ref->second.mean) > ref->second.tolerance) {
      row.flagged = true;
      report.flags.push_back(name + ": mean " + std::to_string(row.mean) +
                             " deviates from reference " +
                             std::to_string(ref->second.mean));
    }
    report.rows.push_back(row);
  };

  add("kabco", [](const SiteRecord& r) { return double(r.kabco); });
  add("kabc", [](const SiteRecord& r) { return double(r.kabc); });
  add("kab", [](const SiteRecord& r) { return double(r.kab); });
  for (const auto& name :
       {"aadt", "avg_on", "avg_off", "dist_to_int", "median_width",
        "speed_limit", "lane_count", "school_count", "park_count", "stop_count"}) {
    add(name, [&name](const SiteRecord& r) { return continuous_value(r, name); });
  }
  return report;
}

}  // namespace crashfreq
