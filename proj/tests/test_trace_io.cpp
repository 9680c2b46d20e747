#include <doctest.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <sstream>

#include "oco/trace_io.hpp"

using namespace oco;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

void check_round_trip(const RunTrace& trace, const std::vector<TraceCsvRow>& back, bool per_constraint) {
  REQUIRE(back.size() == trace.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    const auto want = to_csv_row(trace.rows[k], per_constraint);
    CHECK(back[k].t == want.t);
    CHECK(same_bits(back[k].fx, want.fx));
    CHECK(same_bits(back[k].g_max, want.g_max));
    CHECK(same_bits(back[k].g_clip, want.g_clip));
    CHECK(same_bits(back[k].lambda_norm, want.lambda_norm));
    CHECK(same_bits(back[k].x_norm, want.x_norm));
    REQUIRE(back[k].g.size() == want.g.size());
    for (std::size_t i = 0; i < want.g.size(); ++i) CHECK(same_bits(back[k].g[i], want.g[i]));
  }
}

}  // namespace

TEST_CASE("format_real round-trips doubles") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, 5e-324}) {
    CHECK(same_bits(std::strtod(format_real(v).c_str(), nullptr), v));
  }
}

TEST_CASE("trace CSV round-trip is bit-identical") {
  const auto trace = run(make_problem("toy"), default_config(Variant::ClippedOGD, 300), 6);
  std::stringstream ss;
  write_trace_csv(ss, trace);
  std::string header;
  std::getline(std::stringstream(ss.str()), header);
  CHECK(header == kTraceHeader);
  check_round_trip(trace, read_trace_csv(ss), false);
}

TEST_CASE("per-constraint columns") {
  const auto trace = run(make_problem("dispatch"), default_config(Variant::MahdaviOGD, 50), 1);
  std::stringstream ss;
  write_trace_csv(ss, trace, true);
  std::string header;
  std::getline(std::stringstream(ss.str()), header);
  CHECK(header == std::string(kTraceHeader) + ",g_1,g_2,g_3,g_4,g_5,g_6,g_7");
  check_round_trip(trace, read_trace_csv(ss), true);
}

TEST_CASE("trace CSV through a file") {
  const auto trace = run(make_problem("toy"), default_config(Variant::AOGD, 20), 2);
  const auto path = std::filesystem::temp_directory_path() / "oco_trace_rt.csv";
  write_trace_csv(path, trace);
  check_round_trip(trace, read_trace_csv(path), false);
  CHECK_THROWS_AS(read_trace_csv(std::filesystem::temp_directory_path() / "oco_no_such_trace.csv"),
                  std::runtime_error);
}

TEST_CASE("malformed trace CSV") {
  auto error_of = [](const std::string& text) -> std::string {
    std::istringstream in(text);
    try {
      read_trace_csv(in);
    } catch (const std::runtime_error& e) {
      return e.what();
    }
    return "";
  };
  const std::string h = std::string(kTraceHeader) + "\n";
  CHECK(error_of("") == "trace csv: empty input");
  CHECK(error_of("t,fx\n1,2\n").find("line 1") != std::string::npos);
  CHECK(error_of(h + "1,0,0,0,0,0\n2,0,0,0\n").find("line 3") != std::string::npos);
  CHECK(error_of(h + "1,0,x,0,0,0\n").find("line 2") != std::string::npos);
  CHECK(error_of(h + "-1,0,0,0,0,0\n").find("line 2") != std::string::npos);
  CHECK(error_of(h + "1,0,0,0,0,0\n").empty());
}
