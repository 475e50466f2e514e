#include "artifacts.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace mtool {

namespace fs = std::filesystem;

Check pass_if(const std::string& name, double value, double threshold, bool below) {
  Check c{name, "", value, threshold, ""};
  const bool ok = below ? (value <= threshold) : (value >= threshold);
  c.status = ok ? "pass" : "fail";
  return c;
}

Check skipped(const std::string& name, const std::string& note) {
  return Check{name, "skipped", 0.0, 0.0, note};
}

ArtifactSet::ArtifactSet(const std::string& dir) : dir_(dir) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw std::runtime_error("artifacts: cannot create directory " + dir_ + ": " + ec.message());
}

std::string ArtifactSet::path(const std::string& name) const {
  return (fs::path(dir_) / name).string();
}

void ArtifactSet::add(const std::string& name) {
  if (!fs::exists(path(name)))
    throw std::runtime_error("artifacts: registered file was never written: " + path(name));
  names_.push_back(name);
}

void ArtifactSet::write_json(const std::string& name, const json& doc) const {
  std::ofstream out(path(name), std::ios::binary);
  if (!out) throw std::runtime_error("artifacts: cannot open " + path(name) + " for writing");
  out << doc.dump(2) << "\n";
  if (!out) throw std::runtime_error("artifacts: short write to " + path(name));
}

void ArtifactSet::add_json(const std::string& name, const json& doc) {
  write_json(name, doc);
  names_.push_back(name);
}

json check_to_json(const Check& c) {
  json j;
  j["name"] = c.name;
  j["status"] = c.status;
  if (c.status != "skipped") {
    j["value"] = c.value;
    j["threshold"] = c.threshold;
  }
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

bool ArtifactSet::finish(const json& config_echo, const json& diagnostics,
                         const std::vector<Check>& checks) {
  bool all_ok = true;
  json rows = json::array();
  for (const Check& c : checks) {
    rows.push_back(check_to_json(c));
    if (c.status == "fail") all_ok = false;
  }
  json summary;
  summary["tool"] = {{"name", "mtlab"}, {"version", "0.1.0"}};
  summary["config"] = config_echo;
  summary["diagnostics"] = diagnostics;
  summary["checks"] = rows;
  summary["status"] = all_ok ? "pass" : "fail";
  write_json("summary.json", summary);

  // The manifest lists the data artifacts only, in emission order; the
  // summary/index pair is run metadata, not listed in itself.
  json index;
  index["artifacts"] = json::array();
  for (const std::string& name : names_) {
    index["artifacts"].push_back(
        {{"path", name}, {"bytes", std::uintmax_t(fs::file_size(path(name)))}});
  }
  write_json("index.json", index);
  return all_ok;
}

}  // namespace mtool
