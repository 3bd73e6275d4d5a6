#pragma once

#include <string>
#include <vector>

#include "cohaptics/sim_engine.hpp"

namespace cohaptics::plots {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal line chart; one colour per series.
std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series,
                       const std::vector<double>& h_lines = {});

Series distance_series(const std::string& label, const SimTrace& trace);
// TCP path projected on the table plane.
Series path_series(const std::string& label, const SimTrace& trace);

void write_file(const std::string& path, const std::string& content);

}  // namespace cohaptics::plots
