#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "tsf/dataset.hpp"

namespace tsf::csv {

enum class SchemaKind { narma, motor };

// Shortest round-trip decimal form (std::to_chars).
std::string format_double(double v);

// NARMA columns: t, x1..xn, u1..un, series_id, alpha.
// Motor columns:  t, i_d, i_q, u_d, u_q, omega_r, series_id.
// Doubles are written shortest-round-trip, so export -> ingest is value-exact.
std::string serialize(const SeriesSet& set, SchemaKind kind);
void write_series(const std::filesystem::path& path, const SeriesSet& set, SchemaKind kind);

SeriesSet read_narma(const std::filesystem::path& path);

// Maps logical motor column names (t, i_d, i_q, u_d, u_q, omega_r, series_id)
// onto the file's header names; missing entries default to the logical name.
using ColumnMap = std::map<std::string, std::string>;

SeriesSet read_motor(const std::filesystem::path& path, const ColumnMap& columns = {});

}  // namespace tsf::csv
