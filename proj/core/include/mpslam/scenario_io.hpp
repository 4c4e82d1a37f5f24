#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpslam/world.hpp"

namespace mpslam {

/// Scenario file error with the offending line and field.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& what);

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::filesystem::path& path);

void write_scenario(std::ostream& out, const Scenario& s);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

/// CSV columns: t, pa, z_tau_s, z_theta_rad, z_vartheta_rad, z_u, origin_label.
void write_frames(std::ostream& out, const std::vector<MeasurementFrame>& frames);
void save_frames(const std::vector<MeasurementFrame>& frames, const std::filesystem::path& path);

}  // namespace mpslam
