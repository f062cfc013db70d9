#pragma once

// Text formats: the matrix-stack data file, the JSON test report and the
// power-study CSV.
//
// Matrix stack:
//
//   # optional comment lines
//   N d1 d2
//   <d1 lines of d2 numbers>   (repeated N times)
//
// Numbers are written in shortest round-trip form, so write(parse(f)) is
// lossless.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sepcov/simulation.hpp"

namespace sepcov::io {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

SampleSet read_matrix_stack(std::istream& in);
SampleSet read_matrix_stack_file(const std::filesystem::path& path);
void write_matrix_stack(std::ostream& out, const SampleSet& s);
void write_matrix_stack_file(const std::filesystem::path& path, const SampleSet& s);

/// Keys: statistic, value, p_value, p_plus, method, proj, B, df, seed,
/// warnings and, when given, runtime_ms. Absent quantities are null.
nlohmann::json report_to_json(const TestReport& r, std::optional<double> runtime_ms = {});

inline constexpr std::string_view kPowerCsvHeader =
    "scenario,gamma,N,statistic,method,I,B,reps,power,se,seed";

/// One CSV line without the trailing newline. Fields containing commas are quoted.
std::string power_csv_line(const PowerRow& row);
/// Splits one CSV line, honoring double quotes.
std::vector<std::string> split_csv_line(std::string_view line);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull);

std::string read_text_file(const std::filesystem::path& path);
/// Writes to path.tmp and renames over path.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace sepcov::io
