#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace crashfreq {

// One bus stop observation. Categorical fields hold labels from the closed
// domains listed in categorical_domains().
struct SiteRecord {
  std::string site_id;
  int kabco = 0;
  int kabc = 0;
  int kab = 0;
  double aadt = 0.0;
  double avg_on = 0.0;
  double avg_off = 0.0;
  double dist_to_int = 0.0;
  double median_width = 0.0;
  double speed_limit = 0.0;
  int lane_count = 0;
  int school_count = 0;
  int park_count = 0;
  int stop_count = 0;
  std::string int_type;      // signalized | non_signalized
  std::string marked_xwalk;  // yes | no
  std::string median_type;   // divided | undivided
  std::string lighting;      // yes | no
  std::string area;          // com | res | mix
  std::string sidewalk;      // yes | no
  std::string curve;         // yes | no
  std::string design;        // curbside | other
  std::string proximity;     // near | far | midblock
  std::string cover;         // covered | uncovered
};

using Dataset = std::vector<SiteRecord>;

// Ordered level lists per categorical variable; the first level is the
// reference (code 0) and indicator columns are built for the others.
const std::map<std::string, std::vector<std::string>>& categorical_domains();

bool is_categorical_field(const std::string& name);
bool is_continuous_field(const std::string& name);

double continuous_value(const SiteRecord& r, const std::string& name);
const std::string& categorical_value(const SiteRecord& r, const std::string& name);
int response_value(const SiteRecord& r, const std::string& response);

// Thrown by load() with all row-level problems collected into the message.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg, std::vector<std::string> issues = {})
      : std::runtime_error(msg), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

// CSV ingestion. The header row must name every schema column; rows that
// violate a domain or the kab <= kabc <= kabco ordering are reported with
// their line numbers.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& data, const std::string& path);

// Reference descriptive values a report can be checked against.
struct ReferenceStat {
  double mean;
  double tolerance;
};

struct DescriptiveRow {
  std::string variable;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double sd = 0.0;  // population convention
  bool flagged = false;
};

struct DescriptivesReport {
  std::vector<DescriptiveRow> rows;
  std::vector<std::string> flags;
};

DescriptivesReport validate_descriptives(
    const Dataset& data,
    const std::map<std::string, ReferenceStat>& reference = {});

}  // namespace crashfreq
