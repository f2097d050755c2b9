// SPDX-License-Identifier: MIT
//
// Determinism and shape tests for the JSON report helpers.

#include "fmmkit/report.hpp"

#include "fmmkit/catalog.hpp"
#include "fmmkit/mmt.hpp"

#include <doctest.h>

#include <string>

using namespace fmm;

TEST_SUITE("report") {

TEST_CASE("envelope starts with the schema identifier") {
  Json j = report_envelope("verify");
  CHECK(j["schema"] == kReportSchema);
  CHECK(j["command"] == "verify");
  // Insertion order is preserved, so "schema" serializes first.
  CHECK(dump_report(j).find("\"schema\"") < dump_report(j).find("\"command\""));
}

TEST_CASE("serialization is deterministic and newline-terminated") {
  Json j = report_envelope("stability");
  j["dims"] = json_dims({2, 2, 2});
  j["stability"] = json_stability(stability_report(classic_222_pd()));
  std::string a = dump_report(j);
  std::string b = dump_report(j);
  CHECK(a == b);
  REQUIRE(!a.empty());
  CHECK(a.back() == '\n');
  CHECK(a.find("\"q\": 8") != std::string::npos);
  CHECK(a.find("\"e\": 12.0") != std::string::npos);
}

TEST_CASE("rank report window surrounds the decision point") {
  RankReport rr = jacobian_rank(classic_222_pd());
  Json j = json_rank_report(rr);
  CHECK(j["rank"] == 61);
  CHECK(j["sv_window"].is_array());
  CHECK(!j["sv_window"].empty());
  // The gap of the classic decomposition is finite and large.
  CHECK(j["gap"].is_number());
  CHECK(double(j["gap"]) > 1e6);
}

TEST_CASE("infinite gaps serialize as a string marker") {
  // A full-rank square identity has no singular value below the threshold.
  RankReport rr = numerical_rank(Mat::Identity(3, 3));
  REQUIRE(rr.rank == 3);
  Json j = json_rank_report(rr);
  CHECK(j["gap"] == "inf");
}

TEST_CASE("fingerprint JSON carries the invariants") {
  Json j = json_fingerprint(fingerprint(classic_222_pd()));
  CHECK(j["traces"].size() == 7);
  CHECK(j["jacobian_rank"] == 61);
  CHECK(j["product_ranks"].size() == 7);
}

}  // TEST_SUITE
