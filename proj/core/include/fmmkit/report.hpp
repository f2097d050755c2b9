// SPDX-License-Identifier: MIT
//
// report.hpp — JSON report assembly shared by the command-line tool and the
// tests.  Reports use insertion-ordered objects and contain no wall-clock
// data unless explicitly requested, so a fixed seed yields byte-identical
// output.

#pragma once

#include "fmmkit/al.hpp"
#include "fmmkit/linalg.hpp"
#include "fmmkit/stability.hpp"
#include "fmmkit/transforms.hpp"

#include "json.hpp"

#include <string>

namespace fmm {

using Json = nlohmann::ordered_json;

// Schema identifier embedded in every report.
inline constexpr const char* kReportSchema = "fmmkit-report/1";

Json report_envelope(const std::string& command);

Json json_dims(const Dims& d);
Json json_rank_report(const RankReport& r, int sv_head = 8);
Json json_fingerprint(const Fingerprint& f);
Json json_stability(const StabilityReport& s);
Json json_lm_result(const LmResult& r);
Json json_al_result(const AlResult& r);

// dump(2) + trailing newline; the single serialization point for reports.
std::string dump_report(const Json& j);

}  // namespace fmm
