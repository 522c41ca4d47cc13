#include "tfddrl/evalcli/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "tfddrl/errors.hpp"

namespace tfddrl::evalcli {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(where + ": not a number: '" + s + "'");
  }
}

std::uint64_t to_uint(const std::string& s, const std::string& where) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw IoError(where + ": not an integer: '" + s + "'");
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

// Plain line chart, iteration on x.
std::string svg_chart(const std::string& title, const std::string& y_label, const std::vector<Series>& series) {
  constexpr double W = 640, H = 400, L = 70, R = 160, T = 40, B = 50;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  const auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    o << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << fmt(xv)
      << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">iteration</text>\n";
  o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
    << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* c = colors[i % 6];
    o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[i].points) o << px(x) << ',' << py(y) << ' ';
    o << "\"/>\n";
    const double ly = T + 16 * static_cast<double>(i);
    o << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
      << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << W - R + 36 << "\" y=\"" << ly + 4 << "\">" << series[i].label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<CurvePoint> wall_clock_curve(const RunData& run) {
  std::vector<CurvePoint> c;
  for (const auto& r : run.rows) {
    if (r.eval_j) c.push_back({r.wall_clock, *r.eval_j});
  }
  return c;
}

}  // namespace

std::vector<MetricsRow> parse_metrics(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError(source + ": empty file");
  const auto header = split_csv(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need : {"iteration", "wall_clock_s", "eval_j", "eval_t", "eval_e", "eval_f"}) {
    if (!col.count(need)) throw IoError(source + ":1: missing column " + need);
  }
  std::vector<MetricsRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw IoError(where + ": expected " + std::to_string(header.size()) + " fields");
    const auto get = [&](const char* name) -> const std::string* {
      const auto it = col.find(name);
      return it == col.end() ? nullptr : &cells[it->second];
    };
    const auto num = [&](const char* name, double fallback = 0.0) {
      const auto* s = get(name);
      return s && !s->empty() ? to_double(*s, where) : fallback;
    };
    const auto opt = [&](const char* name) -> std::optional<double> {
      const auto* s = get(name);
      if (!s || s->empty()) return std::nullopt;
      return to_double(*s, where);
    };
    MetricsRow r;
    r.iteration = to_uint(*get("iteration"), where);
    if (const auto* s = get("envelopes")) r.envelopes = to_uint(*s, where);
    r.mean_reward = num("mean_reward");
    r.loss_value = num("loss_value");
    r.loss_policy = num("loss_policy");
    r.loss_entropy = num("loss_entropy");
    r.loss_total = num("loss_total");
    if (const auto* s = get("policy_version")) r.policy_version = to_uint(*s, where);
    r.mean_lag = num("mean_lag");
    if (const auto* s = get("max_lag")) r.max_lag = to_uint(*s, where);
    r.wall_clock = num("wall_clock_s");
    r.eval_j = opt("eval_j");
    r.eval_t = opt("eval_t");
    r.eval_e = opt("eval_e");
    r.eval_f = opt("eval_f");
    if (!rows.empty() && r.iteration <= rows.back().iteration) {
      throw IoError(where + ": iteration " + std::to_string(r.iteration) + " does not increase");
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw IoError(source + ": no rows");
  return rows;
}

RunData load_run(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError(dir.string() + ": not a directory");
  const auto metrics = dir / "metrics.csv";
  if (!std::filesystem::exists(metrics)) throw IoError(dir.string() + ": no metrics.csv in run directory");
  RunData run;
  run.dir = dir;
  run.name = std::filesystem::absolute(dir).lexically_normal().filename().string();
  if (run.name.empty()) run.name = std::filesystem::absolute(dir).lexically_normal().parent_path().filename().string();
  run.rows = parse_metrics(read_file(metrics), metrics.string());
  const auto sco = dir / "sco.csv";
  if (std::filesystem::exists(sco)) {
    std::istringstream in(read_file(sco));
    std::string line;
    std::getline(in, line);
    if (line != "seconds") throw IoError(sco.string() + ":1: expected header 'seconds'");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty()) run.sco_samples.push_back(to_double(line, sco.string() + ":" + std::to_string(lineno)));
    }
  }
  return run;
}

void save_sco_samples(const std::filesystem::path& path, const std::vector<double>& samples) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "seconds\n";
  char buf[64];
  for (double s : samples) {
    std::snprintf(buf, sizeof buf, "%.9g\n", s);
    out << buf;
  }
}

ReportOutcome write_report(const std::vector<std::filesystem::path>& run_dirs,
                           const std::filesystem::path& out_dir, const ReportOptions& options) {
  ReportOutcome outcome;
  std::vector<RunData> runs;
  for (const auto& dir : run_dirs) {
    try {
      runs.push_back(load_run(dir));
    } catch (const Error& e) {
      outcome.errors.push_back(e.what());
    }
  }
  if (runs.empty()) {
    std::string listing = "no run directory could be loaded";
    for (const auto& e : outcome.errors) listing += "\n  " + e;
    throw IoError(listing);
  }
  std::filesystem::create_directories(out_dir);
  const auto open = [&](const std::string& name) {
    const auto path = out_dir / name;
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    outcome.written.push_back(path);
    return f;
  };

  {
    auto f = open("costs.csv");
    f << "technique,iteration,wall_clock_s,J,T,E,F\n";
    for (const auto& run : runs) {
      for (const auto& r : run.rows) {
        if (!r.eval_j) continue;
        f << run.name << ',' << r.iteration << ',' << fmt(r.wall_clock) << ',' << fmt(*r.eval_j) << ','
          << fmt(r.eval_t.value_or(NAN)) << ',' << fmt(r.eval_e.value_or(NAN)) << ','
          << fmt(r.eval_f.value_or(NAN)) << '\n';
      }
    }
  }

  // Final evaluated row of each run.
  std::vector<const MetricsRow*> finals;
  for (const auto& run : runs) {
    const MetricsRow* last = nullptr;
    for (const auto& r : run.rows) {
      if (r.eval_j) last = &r;
    }
    finals.push_back(last);
  }
  {
    auto f = open("summary.csv");
    f << "technique,metric,value\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto* r = finals[i];
      const auto put = [&](const char* m, std::optional<double> v) {
        f << runs[i].name << ',' << m << ',' << (v ? fmt(*v) : std::string("")) << '\n';
      };
      put("J", r ? r->eval_j : std::nullopt);
      put("T", r ? r->eval_t : std::nullopt);
      put("E", r ? r->eval_e : std::nullopt);
      put("F", r ? r->eval_f : std::nullopt);
    }
  }

  if (!options.mixes.empty()) {
    auto f = open("ghe.csv");
    f << "technique,mix,energy_kwh,ghe_kg_co2e\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
      if (!finals[i] || !finals[i]->eval_e) continue;
      const double kwh = *finals[i]->eval_e / kJoulesPerKwh;
      for (const auto& mix : options.mixes) {
        f << runs[i].name << ',' << mix.name << ',' << fmt(kwh) << ',' << fmt(ghe(kwh, mix)) << '\n';
      }
    }
  }

  if (options.threshold) {
    auto f = open("speedup.csv");
    f << "reference,technique,threshold,time_reference_s,time_candidate_s,spu\n";
    const auto ref = wall_clock_curve(runs.front());
    for (const auto& run : runs) {
      const auto cand = wall_clock_curve(run);
      SpeedupResult s;
      try {
        s = speedup(ref, cand, *options.threshold);
      } catch (const DomainError&) {
        s.time_reference = first_crossing(ref, *options.threshold);
        s.time_candidate = first_crossing(cand, *options.threshold);
      }
      f << runs.front().name << ',' << run.name << ',' << fmt(*options.threshold) << ','
        << (s.time_reference ? fmt(*s.time_reference) : "not reached") << ','
        << (s.time_candidate ? fmt(*s.time_candidate) : "not reached") << ',' << s.describe() << '\n';
    }
  }

  bool any_sco = false;
  for (const auto& run : runs) any_sco = any_sco || run.sco_samples.size() >= 2;
  if (any_sco) {
    auto f = open("sco.csv");
    f << "technique,samples,time_a_s,ci_low_s,ci_high_s,level\n";
    for (const auto& run : runs) {
      if (run.sco_samples.size() < 2) continue;
      const auto ci = t_interval(run.sco_samples, options.level);
      f << run.name << ',' << ci.n << ',' << fmt(ci.mean) << ',' << fmt(ci.low) << ',' << fmt(ci.high) << ','
        << fmt(options.level) << '\n';
    }
  }

  const struct {
    const char* file;
    const char* label;
    std::optional<double> MetricsRow::*field;
  } charts[] = {{"cost_J.svg", "weighted cost J", &MetricsRow::eval_j},
                {"cost_T.svg", "response time T (s)", &MetricsRow::eval_t},
                {"cost_E.svg", "energy E (J)", &MetricsRow::eval_e},
                {"cost_F.svg", "monetary cost F", &MetricsRow::eval_f}};
  for (const auto& c : charts) {
    std::vector<Series> series;
    for (const auto& run : runs) {
      Series s{run.name, {}};
      for (const auto& r : run.rows) {
        if (const auto& v = r.*(c.field); v && std::isfinite(*v)) s.points.emplace_back(r.iteration, *v);
      }
      series.push_back(std::move(s));
    }
    auto f = open(c.file);
    f << svg_chart(c.label, c.label, series);
  }
  return outcome;
}

}  // namespace tfddrl::evalcli
