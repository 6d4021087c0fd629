#include "slicesim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace slicesim {

namespace {

struct Cell {
  std::optional<std::size_t> sweep_index;
  std::size_t engine = 0;
  std::uint64_t seed = 0;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

std::string trace_file_name(const std::string& base, std::size_t cells, std::optional<std::size_t> sweep_index,
                            const std::string& engine, std::uint64_t seed) {
  if (cells == 1) return base;
  const std::filesystem::path p(base);
  std::string name = p.stem().string();
  if (sweep_index) name += "." + std::to_string(*sweep_index);
  name += "." + engine + "." + std::to_string(seed) + p.extension().string();
  return (p.parent_path() / name).string();
}

std::vector<ResultRow> execute(const ScenarioFile& file, const RunOptions& opts) {
  if (opts.sweep && !file.sweep) throw ParseError("scenario '" + file.id + "' has no sweep block");

  std::vector<ScenarioFile> variants;
  if (opts.sweep)
    for (double v : file.sweep->values) variants.push_back(file.with_value(v));
  else
    variants.push_back(file);

  std::vector<Cell> cells;
  for (std::size_t s = 0; s < variants.size(); ++s)
    for (std::size_t e = 0; e < file.run.engines.size(); ++e)
      for (std::uint64_t seed : file.run.seeds)
        cells.push_back({opts.sweep ? std::optional<std::size_t>(s) : std::nullopt, e, seed});

  const bool traced = !opts.trace_path.empty();
  std::vector<slicing::sim::Metrics> results(cells.size());
  std::vector<slicing::sim::Trace> traces(traced ? cells.size() : 0);
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < cells.size(); j = next++) {
      try {
        const Cell& cell = cells[j];
        const ScenarioFile& f = variants[cell.sweep_index.value_or(0)];
        const auto sc = f.scenario(f.run.engines[cell.engine], cell.seed);
        results[j] = slicing::sim::run_simulation(sc, traced ? &traces[j] : nullptr);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  unsigned threads = opts.threads != 0 ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, cells.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<ResultRow> rows;
  for (std::size_t j = 0; j < cells.size(); ++j) {
    const Cell& cell = cells[j];
    const ScenarioFile& f = variants[cell.sweep_index.value_or(0)];
    const auto& engine = f.run.engines[cell.engine];
    ResultRow row;
    row.scenario_id = f.id;
    row.engine = engine.label();
    row.alpha = engine.alpha;
    row.seed = cell.seed;
    if (cell.sweep_index) row.sweep_value = file.sweep->values[*cell.sweep_index];
    row.values = slicing::sim::flatten(f.instance, results[j]);
    if (traced) {
      const std::string path = trace_file_name(opts.trace_path, cells.size(), cell.sweep_index, row.engine, cell.seed);
      std::ofstream out(path);
      if (!out) throw std::runtime_error("cannot write trace '" + path + "'");
      slicing::sim::write_trace(out, f.instance, traces[j]);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "scenario_id,engine,alpha,seed,sweep_value";
  if (!rows.empty())
    for (const auto& nv : rows.front().values) os << ',' << nv.name;
  os << '\n';
  for (const auto& r : rows) {
    os << r.scenario_id << ',' << r.engine << ',' << fmt(r.alpha) << ',' << r.seed << ','
       << (r.sweep_value ? fmt(*r.sweep_value) : "");
    for (const auto& nv : r.values) os << ',' << fmt(nv.value);
    os << '\n';
  }
}

}  // namespace slicesim
