#pragma once

#include "cellwlan/config.hpp"
#include "cellwlan/report.hpp"

#include <span>
#include <string_view>

namespace cellwlan {

// Each run_* checks that the traffic mode fits, then returns tables ready
// for write_bundle. Solver failures propagate as exceptions; PBD violations
// and unstable cells become bundle warnings.
ResultBundle run_saturation(const AnalysisConfig& cfg);
ResultBundle run_tcp_long(const AnalysisConfig& cfg);
ResultBundle run_tcp_short(const AnalysisConfig& cfg);
ResultBundle run_infinite_rho(const AnalysisConfig& cfg);

// Payloads in bits; empty means cfg.sweep.payload_sizes. In tcp-long mode the
// swept value is the TCP DATA size.
ResultBundle run_payload_sweep(const AnalysisConfig& cfg, std::span<const double> payloads = {});

ResultBundle run_validate(const AnalysisConfig& cfg);

// Dispatch by CLI verb name; throws ValidationError for unknown verbs.
ResultBundle run_verb(std::string_view verb, const AnalysisConfig& cfg);

// Theta for short flows: the override if given, else the isolated-cell
// TCP-long AP rate times the application payload per packet.
double tcp_short_single_cell_rate(const AnalysisConfig& cfg);

// "{}" for the empty set, else "{1,3}" with cell labels.
std::string state_label(const ContentionGraph& g, CellMask active);

} // namespace cellwlan
