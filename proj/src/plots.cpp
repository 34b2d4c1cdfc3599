#include "ergolab/plots.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ergolab/serialize.hpp"

namespace ergolab {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 460.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 60.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                "#8c564b", "#e377c2", "#7f7f7f", "#17becf", "#bcbd22"};

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

struct Axis {
  bool log = false;
  double lo = 0.0;
  double hi = 1.0;

  double transform(double v) const { return log ? std::log10(v) : v; }
  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }

  void fit(const std::vector<double>& values) {
    double a = INFINITY, b = -INFINITY;
    for (double v : values) {
      if (!usable(v)) continue;
      a = std::min(a, transform(v));
      b = std::max(b, transform(v));
    }
    if (!std::isfinite(a)) {
      a = 0.0;
      b = 1.0;
    }
    if (b - a < 1e-12 * std::max(1.0, std::abs(a))) {
      a -= 0.5;
      b += 0.5;
    }
    const double pad = log ? 0.0 : 0.05 * (b - a);
    lo = a - pad;
    hi = b + pad;
  }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double e = std::floor(lo); e <= std::ceil(hi); e += 1.0) {
        if (e >= lo - 1e-9 && e <= hi + 1e-9) out.push_back(e);
      }
      if (out.size() >= 2) return out;
      out.clear();
    }
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
      if (raw <= m * mag) {
        step = m * mag;
        break;
      }
    }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) out.push_back(v);
    return out;
  }

  std::string label(double tick) const { return log ? "1e" + fmt(tick) : fmt(std::abs(tick) < 1e-14 ? 0.0 : tick); }
};

}  // namespace

std::string render_svg(const Figure& figure) {
  Axis ax{figure.log_x}, ay{figure.log_y};
  std::vector<double> all_x, all_y;
  std::size_t plotted = 0;
  for (const auto& s : figure.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (ax.usable(s.x[i]) && ay.usable(s.y[i])) {
        all_x.push_back(s.x[i]);
        all_y.push_back(s.y[i]);
        ++plotted;
      }
    }
  }
  ax.fit(all_x);
  ay.fit(all_y);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (ax.transform(v) - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto py = [&](double v) { return kTop + ph - (ay.transform(v) - ay.lo) / (ay.hi - ay.lo) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(figure.title)
      << "</text>\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ax.ticks()) {
    const double x = kLeft + (t - ax.lo) / (ax.hi - ax.lo) * pw;
    svg << "<line x1=\"" << x << "\" y1=\"" << kTop + ph << "\" x2=\"" << x << "\" y2=\"" << kTop + ph + 5
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << x << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">" << ax.label(t) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double y = kTop + ph - (t - ay.lo) / (ay.hi - ay.lo) * ph;
    svg << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << y << "\" x2=\"" << kLeft << "\" y2=\"" << y
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << ay.label(t) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 16 << "\" text-anchor=\"middle\">"
      << escape(figure.x_label) << "</text>\n";
  svg << "<text transform=\"translate(18," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(figure.y_label) << "</text>\n";

  if (plotted == 0) {
    svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kTop + ph / 2
        << "\" text-anchor=\"middle\" font-size=\"18\" fill=\"#888\">no data</text>\n";
  }
  std::size_t colour = 0;
  double legend_y = kTop + 10;
  for (const auto& s : figure.series) {
    const char* c = kPalette[colour++ % std::size(kPalette)];
    std::ostringstream pts;
    std::size_t count = 0;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
      if (s.points) {
        svg << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << c << "\"/>\n";
      } else {
        pts << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      }
      ++count;
    }
    if (!s.points && count > 0) {
      svg << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.3\" points=\"" << pts.str() << "\"/>\n";
    }
    if (!s.label.empty()) {
      svg << "<rect x=\"" << kWidth - kRight + 12 << "\" y=\"" << legend_y - 8 << "\" width=\"12\" height=\"8\" fill=\""
          << c << "\"/>\n";
      svg << "<text x=\"" << kWidth - kRight + 30 << "\" y=\"" << legend_y << "\">" << escape(s.label) << "</text>\n";
      legend_y += 16;
    }
  }
  double note_y = kTop + 16;
  for (const auto& note : figure.notes) {
    svg << "<text x=\"" << kLeft + 8 << "\" y=\"" << note_y << "\" fill=\"#333\">" << escape(note) << "</text>\n";
    note_y += 15;
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_svg(const Figure& figure, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << render_svg(figure);
}

bool CsvTable::has(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

std::vector<double> CsvTable::column(const std::string& name) const {
  if (header.empty()) return {};
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::out_of_range("no CSV column '" + name + "'");
  const auto idx = static_cast<std::size_t>(it - header.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    out.push_back(idx < row.size() ? std::strtod(row[idx].c_str(), nullptr) : NAN);
  }
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

namespace {

namespace fs = std::filesystem;

/// Rows of `table` whose `key` column equals `value`.
CsvTable filter(const CsvTable& table, const std::string& key, double value) {
  CsvTable out{table.header, {}};
  const auto col = table.column(key);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (col[i] == value) out.rows.push_back(table.rows[i]);
  }
  return out;
}

std::vector<double> distinct(const std::vector<double>& values) {
  std::vector<double> out;
  std::set<double> seen;
  for (double v : values) {
    if (seen.insert(v).second) out.push_back(v);
  }
  return out;
}

Series fit_line(const Json& fit, const std::vector<double>& xs, const std::string& label) {
  Series line{label, {}, {}, false};
  if (!fit.is_object() || !fit.contains("slope")) return line;
  const double b = fit["slope"].get<double>();
  const double la = fit["log_prefactor"].get<double>();
  if (xs.empty()) return line;
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  for (int i = 0; i <= 20; ++i) {
    const double x = *lo + (*hi - *lo) * i / 20.0;
    line.x.push_back(x);
    line.y.push_back(std::exp(la - b * x));
  }
  return line;
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return Json::object();
  return Json::parse(in, nullptr, false);
}

std::vector<fs::path> plot_simulate(const fs::path& dir) {
  const auto table = read_csv(dir / "empirical.csv");
  Figure fig{"Empirical measure integrals", "n", "integral", true, false, {}, {}};
  const auto n = table.column("n");
  for (const char* name : {"f1", "f2", "f3", "f4"}) {
    if (table.has(name)) fig.series.push_back({name, n, table.column(name), false});
  }
  write_svg(fig, dir / "simulate.svg");
  return {dir / "simulate.svg"};
}

std::vector<fs::path> plot_exponents(const fs::path& dir) {
  std::vector<fs::path> out;
  const auto summary = read_csv(dir / "summary.csv");
  Figure fig{"Center exponent decay", "n", "|lambda_c|", true, true, {}, {}};
  const auto n = summary.column("n");
  const auto med = summary.column("median_abs");
  fig.series.push_back({"median", n, med, false});
  fig.series.push_back({"max", n, summary.column("max_abs"), false});
  if (!n.empty() && med.front() > 0.0) {
    Series ref{"n^-1/2", {}, {}, false};
    for (double v : n) {
      ref.x.push_back(v);
      ref.y.push_back(med.front() * std::sqrt(n.front() / v));
    }
    fig.series.push_back(ref);
  }
  write_svg(fig, dir / "exponents.svg");
  out.push_back(dir / "exponents.svg");
  if (fs::exists(dir / "spectrum.csv")) {
    const auto spec = read_csv(dir / "spectrum.csv");
    Figure sf{"Lyapunov spectrum convergence", "n", "exponent", true, false, {}, {}};
    const auto sn = spec.column("n");
    for (const char* name : {"l1", "l2", "l3"}) {
      if (spec.has(name)) sf.series.push_back({name, sn, spec.column(name), false});
    }
    write_svg(sf, dir / "spectrum.svg");
    out.push_back(dir / "spectrum.svg");
  }
  return out;
}

std::vector<fs::path> plot_sigma(const fs::path& dir) {
  const auto table = read_csv(dir / "green_kubo.csv");
  Figure fig{"Green-Kubo partial sums", "lag L", "C(0) + 2 sum C(k)", false, false, {}, {}};
  fig.series.push_back({"partial sum", table.column("lag"), table.column("partial_sum"), false});
  const Json report = read_json(dir / "report.json");
  if (report.contains("green_kubo")) {
    fig.notes.push_back("sigma = " + fmt(report["green_kubo"]["value"].get<double>()) + " +- " +
                        fmt(report["green_kubo"]["standard_error"].get<double>()));
  }
  write_svg(fig, dir / "sigma.svg");
  return {dir / "sigma.svg"};
}

std::vector<fs::path> plot_clt(const fs::path& dir) {
  std::vector<fs::path> out;
  const auto paths = read_csv(dir / "paths.csv");
  Figure fan{"CLT path fan", "t", "X_n(t)", false, false, {}, {}};
  if (!paths.rows.empty()) {
    const auto members = distinct(paths.column("member"));
    for (std::size_t i = 0; i < std::min<std::size_t>(members.size(), 40); ++i) {
      const auto rows = filter(paths, "member", members[i]);
      fan.series.push_back({"", rows.column("t"), rows.column("value"), false});
    }
  }
  write_svg(fan, dir / "clt_paths.svg");
  out.push_back(dir / "clt_paths.svg");
  const auto profile = read_csv(dir / "variance_profile.csv");
  Figure var{"Variance profile", "t", "Var X_n(t)", false, false, {}, {}};
  const auto t = profile.column("t");
  var.series.push_back({"sample variance", t, profile.column("variance"), true});
  var.series.push_back({"Var W(t) = t", t, t, false});
  write_svg(var, dir / "clt_variance.svg");
  out.push_back(dir / "clt_variance.svg");
  return out;
}

std::vector<fs::path> plot_decay(const fs::path& dir, const std::string& csv, const std::string& key,
                                 const std::string& xname, const std::string& title, const std::string& stem) {
  const auto table = read_csv(dir / csv);
  const Json fits = read_json(dir / "fit.json");
  Figure fig{title, xname, "deviant fraction", false, true, {}, {}};
  if (!table.rows.empty()) {
    for (double eps : distinct(table.column(key))) {
      const auto rows = filter(table, key, eps);
      const auto xs = rows.column(xname);
      fig.series.push_back({"eps = " + fmt(eps), xs, rows.column("fraction"), true});
      for (const auto& f : fits.value("curves", Json::array())) {
        if (f.value("epsilon", NAN) != eps || !f.contains("fit") || f["fit"].is_null()) continue;
        fig.series.push_back(fit_line(f["fit"], xs, "fit"));
        fig.notes.push_back("eps = " + fmt(eps) + ": b = " + fmt(f["fit"]["slope"].get<double>()) +
                            ", R^2 = " + fmt(f["fit"]["r_squared"].get<double>()));
      }
    }
  }
  write_svg(fig, dir / (stem + ".svg"));
  return {dir / (stem + ".svg")};
}

std::vector<fs::path> plot_entropy(const fs::path& dir) {
  const auto table = read_csv(dir / "separated.csv");
  Figure fig{"Separated-set growth", "n", "log cardinality", false, false, {}, {}};
  const auto n = table.column("n");
  const auto lc = table.column("log_cardinality");
  fig.series.push_back({"log #X", n, lc, true});
  const Json report = read_json(dir / "report.json");
  if (report.contains("entropy") && !n.empty()) {
    const double slope = report["entropy"]["slope"].get<double>();
    const double icpt = report["entropy"]["intercept"].get<double>();
    Series line{"fit", {}, {}, false};
    for (double v : n) {
      line.x.push_back(v);
      line.y.push_back(icpt + slope * v);
    }
    fig.series.push_back(line);
    fig.notes.push_back("slope = " + fmt(slope) + " per step");
  }
  write_svg(fig, dir / "entropy.svg");
  return {dir / "entropy.svg"};
}

std::vector<fs::path> plot_historical(const fs::path& dir) {
  std::vector<fs::path> out;
  for (int i = 0; i < 4; ++i) {
    const auto csv = dir / ("orbit_" + std::to_string(i) + ".csv");
    if (!fs::exists(csv)) break;
    const auto table = read_csv(csv);
    Figure fig{"Empirical measure oscillation, orbit " + std::to_string(i), "n", "weak-* distance", true, false, {}, {}};
    const auto n = table.column("n");
    fig.series.push_back({"d(., nu1)", n, table.column("d1"), false});
    fig.series.push_back({"d(., nu2)", n, table.column("d2"), false});
    fig.series.push_back({"d(., segment)", n, table.column("dseg"), false});
    const auto svg = dir / ("historical_" + std::to_string(i) + ".svg");
    write_svg(fig, svg);
    out.push_back(svg);
  }
  return out;
}

std::vector<fs::path> plot_lorenz(const fs::path& dir) {
  std::vector<fs::path> out;
  const auto avg = read_csv(dir / "averages.csv");
  Figure fig{"Lorenz time averages", "T", "(1/T) int psi", true, false, {}, {}};
  if (!avg.rows.empty()) {
    for (double s : distinct(avg.column("start"))) {
      const auto rows = filter(avg, "start", s);
      fig.series.push_back({"start " + fmt(s), rows.column("T"), rows.column("value"), false});
    }
  }
  write_svg(fig, dir / "lorenz_averages.svg");
  out.push_back(dir / "lorenz_averages.svg");
  auto more = plot_decay(dir, "deviation.csv", "epsilon", "T", "Lorenz flow deviations", "lorenz_deviation");
  out.insert(out.end(), more.begin(), more.end());
  return out;
}

std::vector<fs::path> plot_calibrate(const fs::path& dir) {
  const auto table = read_csv(dir / "calibration.csv");
  Figure fig{"Calibration campaign", "quantile", "statistic", false, false, {}, {}};
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    auto values = table.column(table.header[c]);
    std::sort(values.begin(), values.end());
    Series s{table.header[c], {}, values, false};
    for (std::size_t i = 0; i < values.size(); ++i) s.x.push_back((i + 0.5) / values.size());
    fig.series.push_back(s);
  }
  write_svg(fig, dir / "calibrate.svg");
  return {dir / "calibrate.svg"};
}

std::vector<fs::path> plots_for_kind(const fs::path& run_dir, const std::string& kind) {
  if (kind == "simulate") return plot_simulate(run_dir);
  if (kind == "exponents") return plot_exponents(run_dir);
  if (kind == "sigma") return plot_sigma(run_dir);
  if (kind == "clt") return plot_clt(run_dir);
  if (kind == "deviation") {
    return plot_decay(run_dir, "deviation.csv", "epsilon", "n", "Large-deviation decay", "deviation");
  }
  if (kind == "entropy") return plot_entropy(run_dir);
  if (kind == "historical") return plot_historical(run_dir);
  if (kind == "lorenz") return plot_lorenz(run_dir);
  if (kind == "calibrate") return plot_calibrate(run_dir);
  std::cerr << "warning: no plots for experiment kind '" << kind << "'\n";
  return {};
}

}  // namespace

std::vector<fs::path> emit_plots(const fs::path& run_dir) {
  const Json manifest = read_json(run_dir / "manifest.json");
  const std::string kind = manifest.is_object() ? manifest.value("kind", "") : "";
  try {
    return plots_for_kind(run_dir, kind);
  } catch (const std::exception& e) {
    std::cerr << "warning: " << e.what() << "; writing an empty figure\n";
    Figure empty{kind + " (no data)", "", "", false, false, {}, {}};
    write_svg(empty, run_dir / (kind + ".svg"));
    return {run_dir / (kind + ".svg")};
  }
}

}  // namespace ergolab
