#pragma once

#include "npga/graph.hpp"
#include "npga/oracle.hpp"
#include "npga/schemes.hpp"
#include "npga/solver.hpp"
#include "npga/theory.hpp"

#include <json.hpp>

#include <string>

namespace npga {

using nlohmann::json;

// Header: iter,comm_rounds,gap,consensus_err,kkt,lyapunov,wall_ms.
// Timings default to zero so identical configs give byte-identical files;
// pass include_timings to record measured wall time instead.
std::string trace_to_csv(const Trace& trace, bool include_timings = false);

json steps_to_json(const StepSizes& steps);
StepSizes steps_from_json(const json& j);

json scheme_to_json(const NetworkScheme& scheme);  // matrices as row-major arrays

json assumption_report_to_json(const AssumptionReport& report);
json mixing_validation_to_json(const MixingValidationReport& report);

json certificate_to_json(const RateCertificate& cert);

json fixed_point_to_json(const FixedPoint& fp);
FixedPoint fixed_point_from_json(const json& j);

// Writes via a temp file and rename so concurrent runs never observe a
// partially written artifact.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace npga
