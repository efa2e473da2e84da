#include "lfptd/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace lfptd {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<double> parse_double(std::string_view field) {
  const std::string text = trim(field);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

void append_number(std::string& out, double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), ptr);
}

}  // namespace

CsvError::CsvError(const std::string& message, std::size_t line)
    : Error(message + " (line " + std::to_string(line) + ")"), line_(line) {}

SessionTable read_session_table(const fs::path& csv_path) {
  auto in = open_input(csv_path);
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw CsvError("empty file", 1);
  ++line_no;
  {
    std::string header;
    for (char c : line) {
      if (c != ' ' && c != '\t' && c != '\r') header.push_back(c);
    }
    if (header != "t,hip,nac") throw CsvError("expected header t,hip,nac", line_no);
  }

  SessionTable table;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::array<double, 3> row{};
    std::size_t col = 0;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      const auto field = std::string_view(line).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (col >= row.size()) throw CsvError("too many fields", line_no);
      const auto value = parse_double(field);
      if (!value) throw CsvError("non-numeric field", line_no);
      row[col++] = *value;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (col != row.size()) throw CsvError("expected 3 fields", line_no);
    table.t.push_back(row[0]);
    table.hip.push_back(row[1]);
    table.nac.push_back(row[2]);
  }
  if (table.t.size() < 2) throw CsvError("fewer than two samples", line_no);
  return table;
}

void write_session_table(const fs::path& csv_path, const SessionTable& table) {
  if (table.t.size() != table.hip.size() || table.t.size() != table.nac.size()) {
    throw Error("column lengths differ");
  }
  std::string out = "t,hip,nac\n";
  out.reserve(table.t.size() * 48);
  for (std::size_t i = 0; i < table.t.size(); ++i) {
    append_number(out, table.t[i]);
    out.push_back(',');
    append_number(out, table.hip[i]);
    out.push_back(',');
    append_number(out, table.nac[i]);
    out.push_back('\n');
  }
  std::ofstream file(csv_path, std::ios::binary);
  if (!file) throw Error("cannot write " + csv_path.string());
  file << out;
}

fs::path sidecar_path(const fs::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".json");
  return p;
}

SessionMeta read_session_meta(const fs::path& json_path) {
  auto in = open_input(json_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed sidecar " + json_path.string() + ": " + e.what());
  }
  SessionMeta meta;
  try {
    meta.subject_id = j.at("subject_id").get<std::string>();
    meta.phase = parse_phase(j.at("phase").get<std::string>());
    if (j.contains("treatment") && !j.at("treatment").is_null()) {
      meta.treatment = parse_treatment(j.at("treatment").get<std::string>());
    }
    if (j.contains("fs")) meta.fs = j.at("fs").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed sidecar " + json_path.string() + ": " + e.what());
  }
  return meta;
}

void write_session_meta(const fs::path& json_path, const SessionMeta& meta) {
  nlohmann::json j;
  j["subject_id"] = meta.subject_id;
  j["phase"] = std::string(to_string(meta.phase));
  j["treatment"] = meta.treatment ? nlohmann::json(std::string(to_string(*meta.treatment))) : nlohmann::json();
  j["fs"] = meta.fs;
  std::ofstream file(json_path, std::ios::binary);
  if (!file) throw Error("cannot write " + json_path.string());
  file << j.dump(2) << '\n';
}

SessionRecord read_session(const fs::path& csv_path) {
  const auto meta = read_session_meta(sidecar_path(csv_path));
  auto table = read_session_table(csv_path);
  return SessionRecord(meta.subject_id, meta.phase, meta.treatment,
                       Signal(std::move(table.hip), meta.fs, meta.subject_id + ":HIP"),
                       Signal(std::move(table.nac), meta.fs, meta.subject_id + ":NAC"));
}

void write_session(const fs::path& csv_path, const SessionRecord& record) {
  SessionTable table;
  const auto n = record.hip().size();
  table.t.resize(n);
  for (std::size_t i = 0; i < n; ++i) table.t[i] = static_cast<double>(i) / record.fs();
  table.hip = record.hip().values();
  table.nac = record.nac().values();
  write_session_table(csv_path, table);
  write_session_meta(sidecar_path(csv_path),
                     SessionMeta{record.subject_id(), record.phase(), record.treatment(), record.fs()});
}

Signal read_channel(const fs::path& csv_path, Site site) {
  auto table = read_session_table(csv_path);
  double rate = Signal::kDefaultFs;
  std::string id = std::string(to_string(site));
  if (fs::exists(sidecar_path(csv_path))) {
    const auto meta = read_session_meta(sidecar_path(csv_path));
    rate = meta.fs;
    id = meta.subject_id + ":" + id;
  } else {
    const double dt = table.t[1] - table.t[0];
    if (dt > 0.0 && std::isfinite(dt)) rate = 1.0 / dt;
  }
  return Signal(site == Site::Hip ? std::move(table.hip) : std::move(table.nac), rate, id);
}

std::vector<double> read_numeric_column(const fs::path& path) {
  auto in = open_input(path);
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto value = parse_double(text);
    if (!value) {
      if (line_no == 1) continue;  // header
      throw CsvError("non-numeric value", line_no);
    }
    values.push_back(*value);
  }
  return values;
}

}  // namespace lfptd
