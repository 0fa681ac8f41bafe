#include "cfaf/results_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace cfaf {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

// Labels and scenario tags must not break the CSV layout.
void require_plain_field(const std::string& s, const char* what) {
  if (s.find_first_of(",\"\n\r") != std::string::npos)
    throw IoError(std::string(what) + " '" + s + "' contains a CSV delimiter");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw IoError(path.string() + ":" + std::to_string(line) + ": cannot parse '" + s + "'");
  return value;
}

}  // namespace

std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw IoError("cannot format number");
  return std::string(buf.data(), ptr);
}

void write_samples_csv(const std::filesystem::path& path, const std::vector<SeSample>& samples) {
  auto out = open_for_write(path);
  out << kSampleHeader << '\n';
  for (const auto& s : samples) {
    require_plain_field(s.scenario, "scenario");
    require_plain_field(s.scheme, "scheme");
    require_plain_field(s.combiner, "combiner");
    out << s.scenario << ',' << s.setup_id << ',' << s.realization_id << ',' << s.ue_id << ','
        << s.scheme << ',' << s.combiner << ',' << s.M << ',' << format_double(s.sinr) << ','
        << format_double(s.se) << '\n';
  }
  check_written(out, path);
}

std::vector<SeSample> read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kSampleHeader)
    throw IoError(path.string() + ": unexpected header");
  std::vector<SeSample> out;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 9)
      throw IoError(path.string() + ":" + std::to_string(n) + ": expected 9 columns");
    SeSample s;
    s.scenario = f[0];
    s.setup_id = parse_number<std::int64_t>(f[1], path, n);
    s.realization_id = parse_number<std::int64_t>(f[2], path, n);
    s.ue_id = parse_number<std::int64_t>(f[3], path, n);
    s.scheme = f[4];
    s.combiner = f[5];
    s.M = parse_number<std::int64_t>(f[6], path, n);
    s.sinr = parse_number<double>(f[7], path, n);
    s.se = parse_number<double>(f[8], path, n);
    out.push_back(std::move(s));
  }
  return out;
}

void write_cdf_csv(const std::filesystem::path& path, const std::vector<CdfSeries>& cdfs) {
  auto out = open_for_write(path);
  out << "label,se,cdf\n";
  for (const auto& c : cdfs) {
    require_plain_field(c.label, "label");
    for (std::size_t i = 0; i < c.values.size(); ++i)
      out << c.label << ',' << format_double(c.values[i]) << ',' << format_double(c.levels[i])
          << '\n';
  }
  check_written(out, path);
}

void write_failure_log(const std::filesystem::path& path,
                       const std::vector<FailureRecord>& failures) {
  auto out = open_for_write(path);
  for (const auto& f : failures) {
    out << "setup " << f.setup_id;
    if (f.realization_id) out << " realization " << *f.realization_id;
    out << ": " << f.message << '\n';
  }
  check_written(out, path);
}

ExportPaths export_results(const std::vector<SeSample>& samples, const std::vector<CdfSeries>& cdfs,
                           const ExperimentConfig& config, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  ExportPaths paths{dir / "samples.csv", dir / "cdf.csv", dir / "config.json"};
  write_samples_csv(paths.samples, samples);
  write_cdf_csv(paths.cdf, cdfs);
  auto out = open_for_write(paths.config);
  out << to_json(config) << '\n';
  check_written(out, paths.config);
  return paths;
}

}  // namespace cfaf
