#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ergolab {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool points = false;  ///< markers instead of a polyline
};

struct Figure {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
  std::vector<std::string> notes;  ///< annotation lines, top left
};

/// Self-contained SVG. Figures without plottable points render empty axes
/// with a "no data" marker.
std::string render_svg(const Figure& figure);
void write_svg(const Figure& figure, const std::filesystem::path& path);

/// Header plus string cells; enough for the CSVs this tool writes.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  bool has(const std::string& name) const;
  /// Parsed numeric column; throws std::out_of_range for unknown names.
  std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

/// Renders the standard figures of a run directory from its CSVs and
/// manifest. Unknown kinds produce no figures and a warning on stderr.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& run_dir);

}  // namespace ergolab
