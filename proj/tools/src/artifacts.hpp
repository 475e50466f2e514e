#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace mtool {

using json = nlohmann::ordered_json;

// One pass/fail row of the run summary. Checks that do not apply to the
// configuration at hand report "skipped" rather than vanishing, so summaries
// for different configs stay comparable.
struct Check {
  std::string name;
  std::string status;  // pass | fail | skipped
  double value = 0.0;
  double threshold = 0.0;
  std::string note;
};

Check pass_if(const std::string& name, double value, double threshold, bool below = true);
Check skipped(const std::string& name, const std::string& note);

// Collects files written under a run directory and finishes with the
// summary.json / index.json pair. Registration order is emission order; the
// manifest repeats it verbatim so repeated runs byte-match.
class ArtifactSet {
 public:
  explicit ArtifactSet(const std::string& dir);

  const std::string& dir() const { return dir_; }
  std::string path(const std::string& name) const;

  // registers a file the caller just wrote via a core writer
  void add(const std::string& name);
  // writes the JSON document then registers it
  void add_json(const std::string& name, const json& doc);

  // summary.json with the config echo and checks, then index.json; returns
  // false when any check failed
  bool finish(const json& config_echo, const json& diagnostics, const std::vector<Check>& checks);

 private:
  void write_json(const std::string& name, const json& doc) const;

  std::string dir_;
  std::vector<std::string> names_;
};

json check_to_json(const Check& c);

}  // namespace mtool
