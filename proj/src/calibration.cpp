#include "finsler/calibration.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "finsler/errors.hpp"
#include "finsler/io.hpp"

#ifndef FINSLER_DATA_DIR
#define FINSLER_DATA_DIR "data"
#endif

namespace finsler {

using nlohmann::json;

std::string CalibrationTable::key(const std::string& lemma, double p, double s, std::size_t n) {
  return lemma + "/p=" + json(p).dump() + "/s=" + json(s).dump() + "/n=" + std::to_string(n);
}

CalibrationTable CalibrationTable::parse(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("calibration file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigurationError("calibration file must hold a JSON object");
  CalibrationTable t;
  for (const auto& [k, v] : doc.items()) {
    try {
      CalibrationEntry e{v.at("lemma").get<std::string>(),
                         v.at("p").get<double>(),
                         v.at("s").get<double>(),
                         v.at("n").get<std::size_t>(),
                         v.at("c_hat").get<double>(),
                         v.at("C_hat").get<double>(),
                         v.at("N").get<std::size_t>(),
                         v.at("seed").get<std::uint64_t>()};
      if (key(e.lemma, e.p, e.s, e.n) != k) {
        throw ConfigurationError("calibration key '" + k + "' does not match its entry");
      }
      t.entries_[k] = e;
    } catch (const json::exception& ex) {
      throw ConfigurationError("calibration entry '" + k + "' is malformed: " + ex.what());
    }
  }
  return t;
}

CalibrationTable CalibrationTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open calibration file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string CalibrationTable::dump() const {
  json doc = json::object();
  for (const auto& [k, e] : entries_) {
    doc[k] = {{"lemma", e.lemma}, {"p", e.p},         {"s", e.s},   {"n", e.n},
              {"c_hat", e.c_hat}, {"C_hat", e.C_hat}, {"N", e.N},   {"seed", e.seed}};
  }
  return doc.dump(2) + "\n";
}

void CalibrationTable::save(const std::string& path) const { write_file_atomic(path, dump()); }

void CalibrationTable::put(const CalibrationEntry& e) { entries_[key(e.lemma, e.p, e.s, e.n)] = e; }

void CalibrationTable::put(const EstimateReport& rep) {
  // The matrix lemma has no s; it is filed under s = 2.
  const double s = rep.lemma == LemmaId::Matrix ? 2.0 : rep.s;
  put(CalibrationEntry{to_string(rep.lemma), rep.p, s, rep.n, rep.c_hat, rep.C_hat,
                       rep.sample_count, rep.seed});
}

std::optional<CalibrationEntry> CalibrationTable::find(const std::string& lemma, double p,
                                                       double s, std::size_t n) const {
  auto it = entries_.find(key(lemma, p, s, n));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

const CalibrationEntry& CalibrationTable::at(const std::string& lemma, double p, double s,
                                             std::size_t n) const {
  auto it = entries_.find(key(lemma, p, s, n));
  if (it == entries_.end()) {
    throw ConfigurationError("no calibration entry for " + key(lemma, p, s, n));
  }
  return it->second;
}

std::string default_calibration_path() { return std::string(FINSLER_DATA_DIR) + "/calibration.json"; }

}  // namespace finsler
