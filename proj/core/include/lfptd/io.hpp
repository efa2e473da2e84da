#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lfptd/signal.hpp"

namespace lfptd {

/// Malformed CSV input; `line()` is 1-based and counts the header.
class CsvError : public Error {
 public:
  CsvError(const std::string& message, std::size_t line);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Sidecar metadata stored next to each session CSV as `<stem>.json`:
/// `{"subject_id": ..., "phase": ..., "treatment": ..., "fs": ...}`.
/// `treatment` may be null or absent for blind sessions.
struct SessionMeta {
  std::string subject_id;
  Phase phase = Phase::Pre;
  std::optional<Treatment> treatment;
  double fs = Signal::kDefaultFs;
};

/// Raw contents of a `t,hip,nac` session table.
struct SessionTable {
  std::vector<double> t;
  std::vector<double> hip;
  std::vector<double> nac;
};

SessionTable read_session_table(const std::filesystem::path& csv_path);
void write_session_table(const std::filesystem::path& csv_path, const SessionTable& table);

SessionMeta read_session_meta(const std::filesystem::path& json_path);
void write_session_meta(const std::filesystem::path& json_path, const SessionMeta& meta);

/// Path of the sidecar belonging to a session CSV.
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

/// Reads `<csv>` plus its sidecar into a validated record.
SessionRecord read_session(const std::filesystem::path& csv_path);

/// Writes `<csv>` and its sidecar. Time stamps are `i / fs`.
void write_session(const std::filesystem::path& csv_path, const SessionRecord& record);

/// Loads one channel from a session CSV. The rate comes from the sidecar when
/// present, otherwise from the spacing of the `t` column.
Signal read_channel(const std::filesystem::path& csv_path, Site site);

/// Reads a one-column numeric file (optional non-numeric header line), as used
/// by the `stats` subcommand.
std::vector<double> read_numeric_column(const std::filesystem::path& path);

}  // namespace lfptd
