#include "sepcov/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sepcov/error.hpp"

namespace sepcov::io {
namespace {

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

[[noreturn]] void parse_error(std::size_t line_no, const std::string& what) {
  fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": " + what);
}

long long parse_count(std::string_view tok, std::size_t line_no) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 0) {
    parse_error(line_no, "expected a non-negative integer, got '" + std::string(tok) + "'");
  }
  return v;
}

double parse_value(std::string_view tok, std::size_t line_no) {
  double v = 0.0;
  const char* first = tok.data();
  if (!tok.empty() && tok.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    parse_error(line_no, "expected a finite number, got '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

SampleSet read_matrix_stack(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  long long n = -1, d1 = -1, d2 = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto tok = tokens(line);
    if (tok.size() != 3) parse_error(line_no, "header must be 'N d1 d2'");
    n = parse_count(tok[0], line_no);
    d1 = parse_count(tok[1], line_no);
    d2 = parse_count(tok[2], line_no);
    break;
  }
  if (n < 0) fail(ErrorKind::Parse, "missing header 'N d1 d2'");
  if (n == 0) fail(ErrorKind::EmptySample, "matrix stack has N = 0");
  if (d1 == 0 || d2 == 0) fail(ErrorKind::Parse, "matrix dimensions must be positive");

  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(n * d1 * d2));
  const long long rows = n * d1;
  long long row = 0;
  while (row < rows && std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto tok = tokens(line);
    if (static_cast<long long>(tok.size()) != d2) {
      parse_error(line_no, "expected " + std::to_string(d2) + " values, got " +
                               std::to_string(tok.size()));
    }
    for (auto t : tok) data.push_back(parse_value(t, line_no));
    ++row;
  }
  if (row < rows) {
    fail(ErrorKind::Parse, "expected " + std::to_string(rows) + " data rows, got " +
                               std::to_string(row));
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!is_blank(line)) parse_error(line_no, "unexpected data after the last matrix");
  }
  return SampleSet(n, d1, d2, std::move(data));
}

SampleSet read_matrix_stack_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return read_matrix_stack(in);
}

void write_matrix_stack(std::ostream& out, const SampleSet& s) {
  out << s.n() << ' ' << s.d1() << ' ' << s.d2() << '\n';
  std::string line;
  for (Eigen::Index m = 0; m < s.n(); ++m) {
    const auto x = s[m];
    for (Eigen::Index i = 0; i < s.d1(); ++i) {
      line.clear();
      for (Eigen::Index j = 0; j < s.d2(); ++j) {
        if (j > 0) line += ' ';
        line += format_double(x(i, j));
      }
      out << line << '\n';
    }
  }
}

void write_matrix_stack_file(const std::filesystem::path& path, const SampleSet& s) {
  std::ostringstream out;
  write_matrix_stack(out, s);
  write_text_file_atomic(path, out.str());
}

nlohmann::json report_to_json(const TestReport& r, std::optional<double> runtime_ms) {
  nlohmann::json j;
  j["statistic"] = std::string(to_string(r.statistic));
  j["value"] = r.statistic_value;
  j["p_value"] = r.p_value;
  j["p_plus"] = r.p_plus ? nlohmann::json(*r.p_plus) : nlohmann::json(nullptr);
  j["method"] = std::string(to_string(r.method));
  j["proj"] = r.proj.to_string();
  j["B"] = r.replicates ? nlohmann::json(*r.replicates) : nlohmann::json(nullptr);
  j["df"] = r.df ? nlohmann::json(*r.df) : nlohmann::json(nullptr);
  j["seed"] = r.seed;
  j["warnings"] = r.warnings;
  if (runtime_ms) j["runtime_ms"] = *runtime_ms;
  return j;
}

std::string power_csv_line(const PowerRow& row) {
  auto field = [](const std::string& v) {
    return v.find(',') == std::string::npos ? v : "\"" + v + "\"";
  };
  std::string out;
  out += field(row.scenario) + ',';
  out += format_double(row.gamma) + ',';
  out += std::to_string(row.n) + ',';
  out += field(row.statistic) + ',';
  out += field(row.method) + ',';
  out += field(row.proj) + ',';
  out += std::to_string(row.B) + ',';
  out += std::to_string(row.reps) + ',';
  out += format_double(row.power) + ',';
  out += format_double(row.se) + ',';
  out += std::to_string(row.seed);
  return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file_atomic(const std::filesystem::path& path, std::string_view text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write '" + tmp.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) fail(ErrorKind::Io, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::Io, "cannot replace '" + path.string() + "': " + ec.message());
}

}  // namespace sepcov::io
