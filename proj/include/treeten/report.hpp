#pragma once

#include <map>
#include <string>
#include <vector>

namespace treeten {

struct ReportRecord {
  std::string vertex;  // vertex key, or sequence/restart id for experiments
  double value = 0.0;
  double threshold = 0.0;
  bool pass = true;
  std::string note;
  std::map<std::string, double> extra;
};

struct Report {
  std::string name;
  std::vector<ReportRecord> records;

  bool pass() const;
  int violations() const;
};

}  // namespace treeten
