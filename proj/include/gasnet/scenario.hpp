#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gasnet/conservation.hpp"
#include "gasnet/io.hpp"
#include "gasnet/lqg.hpp"
#include "gasnet/reduction.hpp"

namespace gasnet {

// One end-to-end run, read from a flat key=value file with [section]
// headers. Signal lists are space separated; weights are diagonal entries
// aligned with the measured / commanded selections.
struct ScenarioConfig {
  std::string name = "scenario";
  std::string network_file;
  std::vector<std::string> measured;   // plant outputs the controller reads
  std::vector<std::string> commanded;  // plant inputs the controller drives
  std::vector<std::string> tracked;    // measured subset given integral action
  int filter_order = 8;
  double filter_cutoff_hz = 0.4;
  Index reduced_order = 11;
  double sample_period = 1.0;          // s
  Vector output_weight;                // per measured output, Pa^-2 scale
  Vector control_weight;               // per commanded input
  double process_noise = 0.01;         // isotropic, in the reduced state basis
  Vector measurement_noise;            // per measured output, Pa^2
  Vector integral_weight;              // per measured output
  std::string disturbance_channel;
  double disturbance_magnitude = 1.0;  // kg/s
  double disturbance_step_time = 0.5;  // s
  double horizon = 4000.0;             // s, must exceed the step time
  int substeps = 20;                   // inner integration steps per sample
};

ScenarioConfig parse_scenario_config(const std::string& text);
// Relative network paths are resolved against the config file's directory.
ScenarioConfig load_scenario_config(const std::string& path);

// Everything the staged run produces: the closed network and its physics
// verdicts, the filtered / reduced / discretized models, and both controller
// realizations designed on the commanded/measured channel selection.
struct PipelineResult {
  ScenarioConfig config;
  NetworkArtifacts network;
  ConservationReport conservation;
  IntegratorReport integrator;
  LtiSystem filtered;
  ReductionResult reduction;
  LtiSystem discrete;
  LtiSystem design_plant;
  std::vector<Index> measured_idx;         // rows of the closed/filtered outputs
  std::vector<Index> commanded_idx;        // columns of the closed inputs
  std::vector<Index> tracked_in_measured;  // positions within `measured`
  LqgWeights weights;
  ControllerRealization lqg;
  ControllerRealization lqgi;
};

// parse -> rules -> build -> conservation -> integrator -> filters ->
// reduce -> discretize -> design; a stage that throws aborts the run with
// its name prefixed to the diagnostics. Conservation and integrator verdicts
// are recorded, not gating: a flow-only loop legitimately fails the
// conservation certificate by carrying the integrator instead.
PipelineResult run_pipeline(const ScenarioConfig& config);

// Sampled-data closed-loop record at substep resolution. The pressure
// columns are the plant's outputs as simulated: measured channels pass
// through whatever sensor filters the plant embeds, the rest are raw.
struct ScenarioTrace {
  Vector time;
  Matrix pressures;        // N x p
  Matrix commands;         // N x m_c, held between samples
  Vector disturbance;      // N
  Vector controller_norm;  // N, estimator state norm, held per sample
  std::vector<std::string> pressure_names, command_names;
  Vector command_signs;    // +1 fill, -1 draw, per commanded channel
  double disturbance_sign = 1.0;
};

// Runs the discrete controller against a continuous plant: controller moves
// are held over each sample period, the plant is integrated exactly over
// every substep (the disturbance step is split at its onset), measurements
// are read at sample instants. The same controller can face the filtered
// full-order, unfiltered full-order, or reduced plant. Channel signs are
// looked up in the network file named by the config.
ScenarioTrace simulate_closed_loop(const LtiSystem& plant_continuous,
                                   const ControllerRealization& controller,
                                   const ScenarioConfig& config);

// Net steady injection error |sum of signed commands + signed disturbance|
// averaged over the last tenth of the horizon. Every pressure and command
// column must have stopped drifting (1e-6 of its own trace peak) or the
// trace is not settled and the mean would be meaningless.
double steady_state_balance(const ScenarioTrace& trace);

struct ScenarioArtifacts {
  PipelineResult pipeline;
  std::vector<std::pair<std::string, ScenarioTrace>> traces;
};

// Writes models and reports as JSON, traces and grids as CSV, plus a plain
// text summary, under `<out_dir>/<scenario name>/<stage>.<ext>`. Returns the
// paths written. Identical inputs produce byte-identical files.
std::vector<std::string> emit_reports(const ScenarioArtifacts& artifacts,
                                      const std::string& out_dir);

Json conservation_report_json(const ConservationReport& rep);
Json integrator_report_json(const IntegratorReport& rep);

}  // namespace gasnet
