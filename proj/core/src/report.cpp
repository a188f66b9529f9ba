#include "rdl/report.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "rdl/error.hpp"

namespace rdl {

namespace {

using json = nlohmann::json;

json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);  // "inf", "-inf" or "nan"
}

json fit_json(const LinearFit& f) {
  return {{"slope", number(f.slope)},
          {"intercept", number(f.intercept)},
          {"r_squared", number(f.r_squared)},
          {"slope_stderr", number(f.slope_stderr)},
          {"points", f.points}};
}

struct PlotPoint {
  double x, y, lo, hi;
};

void svg_plot(std::ostream& out, const std::string& title, const std::string& xlabel, const std::string& ylabel,
              std::vector<PlotPoint> pts, bool log_x) {
  const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 60;
  std::erase_if(pts, [&](const PlotPoint& p) {
    return !std::isfinite(p.x) || !std::isfinite(p.y) || (log_x && p.x <= 0.0);
  });
  auto fx = [&](double x) { return log_x ? std::log10(x) : x; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& p : pts) {
    x0 = std::min(x0, fx(p.x));
    x1 = std::max(x1, fx(p.x));
    y0 = std::min({y0, p.y, p.lo});
    y1 = std::max({y1, p.y, p.hi});
  }
  if (pts.empty()) x0 = y0 = 0.0, x1 = y1 = 1.0;
  if (x1 <= x0) x0 -= 0.5, x1 += 0.5;
  if (y1 <= y0) y0 -= 0.5, y1 += 0.5;
  const double py = 0.05 * (y1 - y0);
  y0 -= py;
  y1 += py;
  auto sx = [&](double x) { return L + (fx(x) - x0) / (x1 - x0) * (W - L - R); };
  auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
      << title << "</text>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    const double xp = L + (W - L - R) * i / 4.0, yp = H - B - (H - T - B) * i / 4.0;
    char xb[32], yb[32];
    std::snprintf(xb, sizeof xb, "%.3g", log_x ? std::pow(10.0, xv) : xv);
    std::snprintf(yb, sizeof yb, "%.4g", yv);
    out << "<text x=\"" << xp << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << xb << "</text>\n";
    out << "<text x=\"" << L - 6 << "\" y=\"" << yp + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << yb << "</text>\n";
  }
  out << "<text x=\"" << W / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\">" << xlabel << "</text>\n";
  out << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 16 " << H / 2 << ")\">" << ylabel << "</text>\n";
  for (const auto& p : pts) {
    if (p.hi > p.lo) {
      out << "<line x1=\"" << sx(p.x) << "\" y1=\"" << sy(p.lo) << "\" x2=\"" << sx(p.x) << "\" y2=\"" << sy(p.hi)
          << "\" stroke=\"steelblue\"/>\n";
    }
    out << "<circle cx=\"" << sx(p.x) << "\" cy=\"" << sy(p.y) << "\" r=\"3\" fill=\"steelblue\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_raw_csv(const ExperimentReport& report, std::ostream& out) {
  out << "trial,seed,N,eps,lambda_1";
  for (const auto& v : report.value_names) out << ',' << v;
  for (const auto& f : report.flag_names) out << ',' << f;
  out << '\n';
  for (const auto& r : report.trials) {
    out << r.trial << ',' << r.seed << ',' << r.cells << ',' << format_double(r.eps) << ','
        << format_double(r.lambda_1);
    for (double v : r.values) out << ',' << format_double(v);
    for (bool f : r.flags) out << ',' << (f ? 1 : 0);
    out << '\n';
  }
}

std::string report_to_json(const ExperimentReport& report, const RunConfig& config) {
  json j;
  j["name"] = report.name;
  j["config"] = json::parse(config_to_json(config));
  json scalars = json::object();
  for (const auto& [k, v] : report.scalars) scalars[k] = number(v);
  j["results"] = scalars;
  json series = json::object();
  for (const auto& [k, v] : report.series) {
    json arr = json::array();
    for (double x : v) arr.push_back(number(x));
    series[k] = arr;
  }
  j["series"] = series;
  json probs = json::array();
  for (const auto& p : report.probabilities) {
    probs.push_back({{"label", p.label},
                     {"N", p.cells},
                     {"parameter", number(p.parameter)},
                     {"events", p.p.events},
                     {"trials", p.p.trials},
                     {"estimate", p.p.estimate},
                     {"wilson_lower", p.p.lower},
                     {"wilson_upper", p.p.upper}});
  }
  j["empirical_probabilities"] = probs;
  json fits = json::object();
  for (const auto& f : report.fits) fits[f.label] = fit_json(f.fit);
  j["fits"] = fits;
  json checks = json::object();
  for (const auto& [k, v] : report.checks) checks[k] = v;
  j["checks"] = checks;
  json seeds = json::array();
  for (const auto& r : report.trials) seeds.push_back(r.seed);
  j["provenance"] = {{"nodes_per_cell", config.numerics.nodes_per_cell},
                     {"solver_tol", config.numerics.tol},
                     {"quadrature_order", config.numerics.quadrature_order},
                     {"nodes_per_crossing", config.numerics.nodes_per_crossing},
                     {"run_seed", config.seed},
                     {"trial_seeds", seeds}};
  return j.dump(2);
}

void write_plot_svg(const ExperimentReport& report, std::ostream& out) {
  std::vector<PlotPoint> pts;
  if (!report.probabilities.empty()) {
    const bool by_n = report.name == "ilse";
    for (const auto& p : report.probabilities) {
      pts.push_back({by_n ? static_cast<double>(p.cells) : p.parameter, p.p.estimate, p.p.lower, p.p.upper});
    }
    const bool log_x = report.name == "wegner";
    svg_plot(out, report.name + ": probability with 95% Wilson intervals", by_n ? "N" : "parameter", "probability",
             pts, log_x);
    return;
  }
  if (report.series.size() >= 2 && report.series[0].second.size() == report.series[1].second.size()) {
    for (std::size_t i = 0; i < report.series[0].second.size(); ++i) {
      const double y = report.series[1].second[i];
      pts.push_back({report.series[0].second[i], y, y, y});
    }
    svg_plot(out, report.name, report.series[0].first, report.series[1].first, pts, false);
    return;
  }
  for (const auto& r : report.trials) pts.push_back({static_cast<double>(r.trial), r.lambda_1, r.lambda_1, r.lambda_1});
  svg_plot(out, report.name + ": lowest box eigenvalue per trial", "trial", "lambda_1", pts, false);
}

std::filesystem::path make_run_directory(const std::filesystem::path& parent, const std::string& name) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &utc);
  const std::string base = name + "-" + stamp;
  std::filesystem::create_directories(parent);
  std::filesystem::path dir = parent / base;
  for (int suffix = 2; std::filesystem::exists(dir); ++suffix) dir = parent / (base + "-" + std::to_string(suffix));
  std::filesystem::create_directory(dir);
  return dir;
}

void write_run_outputs(const ExperimentReport& report, const RunConfig& config, const std::filesystem::path& dir,
                       bool plot) {
  auto open = [&](const char* file) {
    std::ofstream f(dir / file, std::ios::binary);
    if (!f) throw Error(ErrorCode::kInvalidModel, "cannot write " + (dir / file).string());
    return f;
  };
  {
    std::ofstream f = open("report.json");
    f << report_to_json(report, config) << '\n';
  }
  {
    std::ofstream f = open("raw.csv");
    write_raw_csv(report, f);
  }
  if (plot) {
    std::ofstream f = open("plot.svg");
    write_plot_svg(report, f);
  }
}

}  // namespace rdl
