#include "lcdqn/svg.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include "lcdqn/errors.h"

namespace lcdqn::svg {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void Add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void Finish() {
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) {
      const double pad = std::max(1.0, std::abs(lo)) * 0.05;
      lo -= pad;
      hi += pad;
    }
  }
};

// Roughly five round tick values covering [lo, hi].
std::vector<double> Ticks(double lo, double hi) {
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return ticks;
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

void WritePanel(std::ostream& os, const Panel& panel, double top, double width,
                double height) {
  const double left = 70.0, right = 150.0, head = 28.0, foot = 40.0;
  const double pw = width - left - right;
  const double ph = height - head - foot;
  const double y0 = top + head;

  Range xr, yr;
  for (const Series& s : panel.series) {
    for (double v : s.x) xr.Add(v);
    for (double v : s.y) yr.Add(v);
    for (double v : s.lo) yr.Add(v);
    for (double v : s.hi) yr.Add(v);
  }
  xr.Finish();
  yr.Finish();
  auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return y0 + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << top + 18
     << "\" text-anchor=\"middle\" font-weight=\"bold\">" << Escape(panel.title)
     << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << y0 << "\" width=\"" << pw
     << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (double t : Ticks(xr.lo, xr.hi)) {
    os << "<line x1=\"" << px(t) << "\" x2=\"" << px(t) << "\" y1=\"" << y0
       << "\" y2=\"" << y0 + ph << "\" stroke=\"#ddd\"/>\n"
       << "<text x=\"" << px(t) << "\" y=\"" << y0 + ph + 14
       << "\" text-anchor=\"middle\" font-size=\"10\">" << Num(t) << "</text>\n";
  }
  for (double t : Ticks(yr.lo, yr.hi)) {
    os << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << py(t)
       << "\" y2=\"" << py(t) << "\" stroke=\"#ddd\"/>\n"
       << "<text x=\"" << left - 6 << "\" y=\"" << py(t) + 3
       << "\" text-anchor=\"end\" font-size=\"10\">" << Num(t) << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << y0 + ph + 32
     << "\" text-anchor=\"middle\" font-size=\"11\">" << Escape(panel.x_label)
     << "</text>\n";
  os << "<text x=\"16\" y=\"" << y0 + ph / 2 << "\" font-size=\"11\" "
     << "text-anchor=\"middle\" transform=\"rotate(-90 16 " << y0 + ph / 2
     << ")\">" << Escape(panel.y_label) << "</text>\n";

  for (std::size_t k = 0; k < panel.series.size(); ++k) {
    const Series& s = panel.series[k];
    const char* color = kPalette[k % kPaletteSize];
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (s.lo.size() == n && s.hi.size() == n && n > 0) {
      os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" "
         << "stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < n; ++i) os << px(s.x[i]) << ',' << py(s.hi[i]) << ' ';
      for (std::size_t i = n; i-- > 0;) os << px(s.x[i]) << ',' << py(s.lo[i]) << ' ';
      os << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.6\" points=\"";
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isfinite(s.y[i])) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    os << "\"/>\n";
    const double ly = y0 + 12 + 16 * static_cast<double>(k);
    os << "<line x1=\"" << left + pw + 10 << "\" x2=\"" << left + pw + 28
       << "\" y1=\"" << ly << "\" y2=\"" << ly << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << left + pw + 32 << "\" y=\"" << ly + 4
       << "\" font-size=\"11\">" << Escape(s.label) << "</text>\n";
  }
}

}  // namespace

void WritePanels(std::ostream& os, const std::vector<Panel>& panels,
                 double width, double panel_height) {
  const double height = panel_height * static_cast<double>(panels.size());
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" font-family=\"sans-serif\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    WritePanel(os, panels[i], panel_height * static_cast<double>(i), width,
               panel_height);
  }
  os << "</svg>\n";
}

std::vector<Panel> TrainingCurvePanels(const std::vector<CurveGroup>& groups) {
  struct Metric {
    const char* title;
    const char* unit;
    double (*get)(const harness::EvalPoint&);
  };
  const Metric metrics[] = {
      {"Completion rate", "%",
       [](const harness::EvalPoint& p) { return p.report.completion_rate; }},
      {"Collision rate", "%",
       [](const harness::EvalPoint& p) { return p.report.collision_rate; }},
      {"Average velocity", "m/s",
       [](const harness::EvalPoint& p) { return p.report.avg_velocity; }},
      {"Average reward", "per episode",
       [](const harness::EvalPoint& p) { return p.report.avg_reward; }},
  };
  std::vector<Panel> panels;
  for (const Metric& m : metrics) {
    Panel panel{m.title, "training episode", m.unit, {}};
    for (const CurveGroup& g : groups) {
      if (g.runs.empty()) throw UsageError("curve group '" + g.label + "' has no runs");
      // episode -> values from every run that evaluated there
      std::map<int, std::vector<double>> by_episode;
      for (const auto& run : g.runs) {
        for (const auto& p : run) by_episode[p.episode].push_back(m.get(p));
      }
      Series s;
      s.label = g.label;
      for (const auto& [episode, values] : by_episode) {
        if (values.size() != g.runs.size()) continue;
        double sum = 0.0;
        for (double v : values) sum += v;
        s.x.push_back(episode);
        s.y.push_back(sum / static_cast<double>(values.size()));
        s.lo.push_back(*std::min_element(values.begin(), values.end()));
        s.hi.push_back(*std::max_element(values.begin(), values.end()));
      }
      if (g.runs.size() < 2) s.lo.clear(), s.hi.clear();
      panel.series.push_back(std::move(s));
    }
    panels.push_back(std::move(panel));
  }
  return panels;
}

std::vector<Panel> TrajectoryPanels(
    const std::vector<std::pair<std::string, plan::Trajectory>>& family,
    double speed, double step) {
  if (!(step > 0.0)) throw UsageError("TrajectoryPanels: step must be > 0");
  Panel path{"Lateral path", "x (m)", "y (m)", {}};
  Panel accel{"Lateral acceleration y'' v^2 at " + Num(speed) + " m/s", "x (m)",
              "m/s^2", {}};
  for (const auto& [label, traj] : family) {
    Series p{label, {}, {}, {}, {}};
    Series a{label, {}, {}, {}, {}};
    const int n = static_cast<int>(std::ceil(traj.horizon() / step));
    for (int i = 0; i <= n; ++i) {
      const double x = std::min(traj.x0() + i * step, traj.x_end());
      const plan::LateralPoint pt = traj.Sample(x);
      p.x.push_back(x);
      p.y.push_back(pt.y);
      a.x.push_back(x);
      a.y.push_back(pt.ddy * speed * speed);
    }
    path.series.push_back(std::move(p));
    accel.series.push_back(std::move(a));
  }
  return {path, accel};
}

void WriteRollout(std::ostream& os, const std::vector<harness::StepRecord>& trace,
                  const env::ScenarioConfig& scenario, int stride) {
  if (trace.empty()) throw UsageError("WriteRollout: empty trace");
  if (stride < 1) throw UsageError("WriteRollout: stride must be >= 1");
  Range xr;
  for (const auto& r : trace) {
    xr.Add(r.ego.x - r.ego.length);
    xr.Add(r.ego.x + r.ego.length);
    for (const auto& v : r.others) xr.Add(v.x);
  }
  xr.Finish();
  const double road = scenario.n_lanes * scenario.lane_width;
  const double width = 1200.0, left = 20.0, right = 20.0, top = 40.0;
  const double scale_y = 14.0;  // px per metre across the road
  const double road_px = road * scale_y;
  const double height = top + road_px + 60.0;
  const double pw = width - left - right;
  auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return top + road_px - y * scale_y; };
  const double mpp = (xr.hi - xr.lo) / pw;  // metres per pixel along x

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" font-family=\"sans-serif\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw
     << "\" height=\"" << road_px << "\" fill=\"#eee\"/>\n";
  for (int lane = 1; lane < scenario.n_lanes; ++lane) {
    const double y = py(lane * scenario.lane_width);
    os << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << y
       << "\" y2=\"" << y << "\" stroke=\"#999\" stroke-dasharray=\"8 6\"/>\n";
  }
  const harness::StepRecord& last = trace.back();
  os << "<text x=\"" << left << "\" y=\"20\" font-size=\"13\">outcome: "
     << env::ToString(last.status) << ", steps: " << last.step
     << ", x range " << Num(xr.lo) << " to " << Num(xr.hi) << " m</text>\n";

  auto rect = [&](const env::VehicleState& v, const char* color, double opacity) {
    const double w = std::max(v.length / mpp, 2.0);
    os << "<rect x=\"" << px(v.x) - w / 2 << "\" y=\"" << py(v.y + v.width / 2)
       << "\" width=\"" << w << "\" height=\"" << v.width * scale_y
       << "\" fill=\"" << color << "\" fill-opacity=\"" << opacity << "\"/>\n";
  };
  const int n = static_cast<int>(trace.size());
  for (int i = 0; i < n; ++i) {
    if (i % stride != 0 && i != n - 1) continue;
    const double opacity = 0.25 + 0.75 * i / std::max(1, n - 1);
    for (const auto& v : trace[i].others) {
      rect(v, v.direction > 0 ? "#2ca02c" : "#d62728", opacity);
    }
    rect(trace[i].ego, "#1f77b4", opacity);
  }
  os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (const auto& r : trace) os << px(r.ego.x) << ',' << py(r.ego.y) << ' ';
  os << "\"/>\n";
  os << "<text x=\"" << left << "\" y=\"" << height - 20
     << "\" font-size=\"11\">blue: ego, green: same direction, red: oncoming; "
        "darker is later</text>\n</svg>\n";
}

}  // namespace lcdqn::svg
