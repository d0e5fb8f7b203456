#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "finsler/bregman.hpp"

namespace finsler {

struct CalibrationEntry {
  std::string lemma;
  double p;
  double s;
  std::size_t n;
  double c_hat;
  double C_hat;
  std::size_t N;
  std::uint64_t seed;
};

/// Empirical equivalence constants keyed by "lemma/p=<p>/s=<s>/n=<n>".
/// Doubles are written in shortest round-trip form, so a reread is bit-exact.
class CalibrationTable {
 public:
  static std::string key(const std::string& lemma, double p, double s, std::size_t n);

  static CalibrationTable load(const std::string& path);
  static CalibrationTable parse(const std::string& text);
  std::string dump() const;
  void save(const std::string& path) const;

  void put(const CalibrationEntry& e);
  void put(const EstimateReport& rep);
  std::optional<CalibrationEntry> find(const std::string& lemma, double p, double s,
                                       std::size_t n) const;
  /// Like find, but throws ConfigurationError when the entry is missing.
  const CalibrationEntry& at(const std::string& lemma, double p, double s, std::size_t n) const;

  const std::map<std::string, CalibrationEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, CalibrationEntry> entries_;
};

/// Default location of the shipped calibration file (compile-time path).
std::string default_calibration_path();

}  // namespace finsler
