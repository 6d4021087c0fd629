#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "slicesim/scenario_file.hpp"
#include "slicing/sim.hpp"

namespace slicesim {

struct ResultRow {
  std::string scenario_id;
  std::string engine;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  std::optional<double> sweep_value;
  std::vector<slicing::sim::NamedValue> values;  // flatten() order
};

struct RunOptions {
  bool sweep = false;        // iterate the sweep block
  unsigned threads = 0;      // 0: hardware concurrency
  std::string trace_path;    // empty: no traces
};

/// Runs every (sweep value, engine, seed) cell. Rows come back in that
/// order whatever the completion order. With several cells, traces go to
/// `<stem>.<sweep index>.<engine>.<seed><ext>` next to `trace_path`.
std::vector<ResultRow> execute(const ScenarioFile& file, const RunOptions& opts);

/// Header line plus one line per row; numbers printed with %.6g.
void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);

/// Path of the trace for one cell (see execute).
std::string trace_file_name(const std::string& base, std::size_t cells, std::optional<std::size_t> sweep_index,
                            const std::string& engine, std::uint64_t seed);

}  // namespace slicesim
