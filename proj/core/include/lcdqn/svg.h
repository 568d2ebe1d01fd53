#ifndef LCDQN_SVG_H_
#define LCDQN_SVG_H_

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lcdqn/env.h"
#include "lcdqn/harness.h"
#include "lcdqn/plan.h"

// Dependency-free SVG figures: line panels with optional bands, and a
// bird's-eye strip of a recorded episode.
namespace lcdqn::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  // Optional band drawn behind the line; empty or aligned with x.
  std::vector<double> lo;
  std::vector<double> hi;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

// Stacks the panels vertically in one SVG document.
void WritePanels(std::ostream& os, const std::vector<Panel>& panels,
                 double width = 760.0, double panel_height = 230.0);

// One curve per group: the mean over its runs at every evaluation episode
// shared by all runs, with a min-max band when there is more than one run.
struct CurveGroup {
  std::string label;
  std::vector<std::vector<harness::EvalPoint>> runs;
};
std::vector<Panel> TrainingCurvePanels(const std::vector<CurveGroup>& groups);

// Lateral offset and the approximate lateral acceleration y'' v^2 along x.
std::vector<Panel> TrajectoryPanels(
    const std::vector<std::pair<std::string, plan::Trajectory>>& family,
    double speed, double step = 0.5);

// Lanes, the ego path and vehicle footprints every `stride` steps.
void WriteRollout(std::ostream& os, const std::vector<harness::StepRecord>& trace,
                  const env::ScenarioConfig& scenario, int stride = 10);

}  // namespace lcdqn::svg

#endif  // LCDQN_SVG_H_
