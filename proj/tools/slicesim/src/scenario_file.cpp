#include "slicesim/scenario_file.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace slicesim {

namespace {

using slicing::InstanceSpec;
using slicing::WorkloadDist;

struct Entry {
  std::string value;
  std::size_t line = 0;
  bool used = false;
};

struct Block {
  std::string kind;  // "", resource, slice, class, run, sweep
  std::string name;
  std::size_t line = 0;
  std::map<std::string, Entry> entries;
  std::vector<std::string> order;  // key order as written

  std::string path() const {
    if (kind.empty()) return "";
    if (kind == "run" || kind == "sweep") return kind;
    const char* plural = kind == "class" ? "classes" : kind == "slice" ? "slices" : "resources";
    return std::string(plural) + "." + name;
  }
  std::string path(const std::string& key) const { return kind.empty() ? key : path() + "." + key; }
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

bool valid_id(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-';
  });
}

[[noreturn]] void semantic(const std::string& problem, const std::string& path, std::size_t line,
                           const std::string& detail = {}) {
  std::string msg = problem + " at " + path;
  if (!detail.empty()) msg += ": " + detail;
  if (line != 0) msg += " (line " + std::to_string(line) + ")";
  throw ParseError(msg, line);
}

std::optional<double> to_number(const std::string& text) {
  auto plain = [](const std::string& s) -> std::optional<double> {
    double x = 0.0;
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, x);
    if (res.ec != std::errc() || res.ptr != end || !std::isfinite(x)) return std::nullopt;
    return x;
  };
  const auto slash = text.find('/');
  if (slash == std::string::npos) return plain(text);
  const auto num = plain(trim(text.substr(0, slash)));
  const auto den = plain(trim(text.substr(slash + 1)));
  if (!num || !den || *den == 0.0) return std::nullopt;
  return *num / *den;
}

class Reader {
 public:
  explicit Reader(Block& b) : b_(b) {}

  const Entry* find(const std::string& key) {
    auto it = b_.entries.find(key);
    if (it == b_.entries.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }
  const Entry& need(const std::string& key) {
    const Entry* e = find(key);
    if (!e) semantic("missing key", b_.path(key), b_.line);
    return *e;
  }
  double number(const std::string& key, const Entry& e) {
    const auto x = to_number(e.value);
    if (!x) semantic("invalid number", b_.path(key), e.line, "'" + e.value + "'");
    return *x;
  }
  double number(const std::string& key, double fallback) {
    const Entry* e = find(key);
    return e ? number(key, *e) : fallback;
  }
  double number(const std::string& key) { return number(key, need(key)); }
  std::vector<double> numbers(const std::string& key) {
    const Entry& e = need(key);
    std::vector<double> out;
    for (const std::string& item : split(e.value, ',')) {
      const auto x = to_number(item);
      if (!x) semantic("invalid number", b_.path(key), e.line, "'" + item + "'");
      out.push_back(*x);
    }
    return out;
  }
  // Keys nobody asked for.
  void reject_unknown() const {
    for (const std::string& key : b_.order)
      if (!b_.entries.at(key).used) semantic("unknown key", b_.path(key), b_.entries.at(key).line);
  }
  const Block& block() const { return b_; }

 private:
  Block& b_;
};

std::vector<Block> tokenize(std::string_view text) {
  std::vector<Block> blocks(1);  // top level first
  std::optional<std::size_t> open;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    std::string_view raw = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string_view::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    auto fail = [&](const std::string& what) -> void {
      throw ParseError("syntax error on line " + std::to_string(lineno) + ": " + what, lineno);
    };

    if (line == "}") {
      if (!open) fail("'}' without an open block");
      open.reset();
      continue;
    }
    if (line.back() == '{') {
      if (open) fail("blocks cannot be nested");
      const auto head = words(line.substr(0, line.size() - 1));
      if (head.empty()) fail("block header needs a kind");
      Block b;
      b.kind = head[0];
      b.line = lineno;
      if (b.kind == "run" || b.kind == "sweep") {
        if (head.size() != 1) fail("'" + b.kind + "' block takes no name");
      } else if (b.kind == "resource" || b.kind == "slice" || b.kind == "class") {
        if (head.size() != 2) fail("'" + b.kind + "' block needs exactly one name");
        if (!valid_id(head[1])) fail("invalid id '" + head[1] + "'");
        b.name = head[1];
      } else {
        fail("unknown block kind '" + b.kind + "'");
      }
      blocks.push_back(std::move(b));
      open = blocks.size() - 1;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value', '<kind> [name] {' or '}'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_id(key)) fail("invalid key '" + key + "'");
    if (value.empty()) fail("missing value for '" + key + "'");
    Block& b = blocks[open.value_or(0)];
    if (b.entries.count(key)) fail("duplicate key '" + key + "'");
    b.entries[key] = Entry{value, lineno, false};
    b.order.push_back(key);
  }
  if (open) throw ParseError("syntax error: block opened on line " + std::to_string(blocks[*open].line) +
                                 " is never closed",
                             blocks[*open].line);
  return blocks;
}

RunBlock read_run(Reader& rd) {
  RunBlock run;
  run.alpha = rd.number("alpha", 1.0);
  if (!(run.alpha > 0.0)) semantic("alpha must be positive", "run.alpha", rd.need("alpha").line);
  const Entry& eng = rd.need("engine");
  for (const std::string& name : split(eng.value, ',')) {
    const auto e = slicing::sim::Engine::from_name(name, run.alpha);
    if (!e) semantic("unknown engine", "run.engine", eng.line, "'" + name + "'");
    run.engines.push_back(*e);
  }
  run.horizon = rd.number("horizon", run.horizon);
  if (!(run.horizon > 0.0)) semantic("horizon must be positive", "run.horizon", rd.need("horizon").line);
  if (const Entry* u = rd.find("horizon_unit")) {
    if (u->value == "time")
      run.horizon_unit = slicing::sim::HorizonUnit::time;
    else if (u->value == "departures")
      run.horizon_unit = slicing::sim::HorizonUnit::departures;
    else
      semantic("horizon_unit must be 'time' or 'departures'", "run.horizon_unit", u->line);
  }
  run.warmup = rd.number("warmup", run.warmup);
  if (!(run.warmup >= 0.0 && run.warmup < 1.0))
    semantic("warmup must lie in [0, 1)", "run.warmup", rd.need("warmup").line);
  if (const Entry* s = rd.find("seeds")) {
    run.seeds.clear();
    for (const std::string& item : split(s->value, ',')) {
      auto as_seed = [&](const std::string& t) {
        std::uint64_t x = 0;
        const auto res = std::from_chars(t.data(), t.data() + t.size(), x);
        if (res.ec != std::errc() || res.ptr != t.data() + t.size())
          semantic("invalid seed", "run.seeds", s->line, "'" + t + "'");
        return x;
      };
      const auto dots = item.find("..");
      if (dots == std::string::npos) {
        run.seeds.push_back(as_seed(item));
      } else {
        const std::uint64_t lo = as_seed(trim(item.substr(0, dots))), hi = as_seed(trim(item.substr(dots + 2)));
        if (hi < lo || hi - lo > 100000) semantic("invalid seed range", "run.seeds", s->line, "'" + item + "'");
        for (std::uint64_t k = lo; k <= hi; ++k) run.seeds.push_back(k);
      }
    }
  }
  rd.reject_unknown();
  return run;
}

}  // namespace

ScenarioFile parse_scenario(std::string_view text) {
  std::vector<Block> blocks = tokenize(text);

  InstanceSpec spec;
  for (Block& b : blocks) {
    if (b.kind == "resource") {
      Reader rd(b);
      const double cap = rd.number("capacity", 1.0);
      if (!(cap > 0.0)) semantic("capacity must be positive", b.path("capacity"), b.line);
      spec.resources.push_back({b.name, cap});
      rd.reject_unknown();
    }
  }
  for (Block& b : blocks) {
    if (b.kind != "slice") continue;
    Reader rd(b);
    const double share = rd.number("share");
    if (!(share > 0.0)) semantic("share must be positive", b.path("share"), rd.need("share").line);
    spec.slices.push_back({b.name, share});
    rd.reject_unknown();
  }
  for (Block& b : blocks) {
    if (b.kind != "class") continue;
    Reader rd(b);
    slicing::UserClass uc;
    uc.id = b.name;
    const Entry& sl = rd.need("slice");
    if (std::none_of(spec.slices.begin(), spec.slices.end(), [&](const auto& s) { return s.id == sl.value; }))
      semantic("unknown slice", b.path("slice"), sl.line, "'" + sl.value + "'");
    uc.slice = sl.value;
    uc.demand.assign(spec.resources.size(), 0.0);
    const Entry& dem = rd.need("demand");
    for (const std::string& item : split(dem.value, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) semantic("expected resource:value", b.path("demand"), dem.line, "'" + item + "'");
      const std::string rid = trim(item.substr(0, colon));
      const auto it = std::find_if(spec.resources.begin(), spec.resources.end(),
                                   [&](const auto& r) { return r.id == rid; });
      if (it == spec.resources.end()) semantic("unknown resource", b.path("demand"), dem.line, "'" + rid + "'");
      const auto x = to_number(trim(item.substr(colon + 1)));
      if (!x || *x < 0.0) semantic("invalid demand", b.path("demand"), dem.line, "'" + item + "'");
      uc.demand[static_cast<std::size_t>(it - spec.resources.begin())] = *x;
    }
    uc.arrival_rate = rd.number("arrival_rate", 0.0);
    if (!(uc.arrival_rate >= 0.0)) semantic("arrival_rate must be non-negative", b.path("arrival_rate"), b.line);
    uc.mean_workload = rd.number("mean_workload", 1.0);
    if (!(uc.mean_workload > 0.0)) semantic("mean_workload must be positive", b.path("mean_workload"), b.line);
    if (const Entry* w = rd.find("workload")) {
      if (w->value == "exp")
        uc.workload = WorkloadDist::exponential;
      else if (w->value == "det")
        uc.workload = WorkloadDist::deterministic;
      else
        semantic("workload must be 'exp' or 'det'", b.path("workload"), w->line);
    }
    spec.classes.push_back(uc);
    rd.reject_unknown();
  }

  std::optional<ScenarioFile> file;
  try {
    file.emplace(spec);
  } catch (const slicing::ModelError& e) {
    throw ParseError(std::string("invalid instance: ") + e.what());
  }

  Reader top(blocks[0]);
  const Entry& ver = top.need("version");
  if (ver.value != "1") semantic("unsupported version", "version", ver.line, "'" + ver.value + "'");
  const Entry& id = top.need("id");
  if (!valid_id(id.value)) semantic("invalid id", "id", id.line, "'" + id.value + "'");
  file->id = id.value;
  top.reject_unknown();

  bool have_run = false;
  for (Block& b : blocks) {
    if (b.kind == "run") {
      if (have_run) throw ParseError("syntax error on line " + std::to_string(b.line) + ": second run block", b.line);
      Reader rd(b);
      file->run = read_run(rd);
      have_run = true;
    }
  }
  if (!have_run) throw ParseError("missing run block");

  for (Block& b : blocks) {
    if (b.kind != "sweep") continue;
    if (file->sweep) throw ParseError("syntax error on line " + std::to_string(b.line) + ": second sweep block", b.line);
    Reader rd(b);
    SweepBlock sw;
    sw.parameter = rd.need("parameter").value;
    sw.values = rd.numbers("values");
    rd.reject_unknown();
    const std::size_t line = b.entries.at("parameter").line;
    for (double v : sw.values) {
      try {
        apply_parameter(*file, sw.parameter, v);
      } catch (const ParseError& e) {
        throw ParseError(std::string(e.what()) + " (sweep block, line " + std::to_string(line) + ")", line);
      }
    }
    file->sweep = std::move(sw);
  }
  return std::move(*file);
}

ScenarioFile load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

ScenarioFile apply_parameter(const ScenarioFile& file, std::string_view path_view, double value) {
  const std::string path(path_view);
  const auto parts = split(path, '.');
  InstanceSpec spec = file.spec;
  RunBlock run = file.run;
  auto bad = [&](const std::string& problem) { semantic(problem, path, 0, std::to_string(value)); };

  if (parts.size() == 2 && parts[0] == "run") {
    if (parts[1] == "alpha") {
      if (!(value > 0.0)) bad("alpha must be positive");
      run.alpha = value;
      for (auto& e : run.engines) e.alpha = value;
    } else if (parts[1] == "warmup") {
      if (!(value >= 0.0 && value < 1.0)) bad("warmup must lie in [0, 1)");
      run.warmup = value;
    } else if (parts[1] == "horizon") {
      if (!(value > 0.0)) bad("horizon must be positive");
      run.horizon = value;
    } else {
      semantic("unknown sweep parameter", path, 0);
    }
  } else if (parts.size() == 3 && parts[0] == "slices" && parts[2] == "share") {
    auto it = std::find_if(spec.slices.begin(), spec.slices.end(), [&](const auto& s) { return s.id == parts[1]; });
    if (it == spec.slices.end()) semantic("unknown slice", path, 0);
    if (spec.slices.size() < 2) bad("a share sweep needs at least two slices");
    if (!(value > 0.0 && value < 1.0)) bad("share must lie in (0, 1)");
    double others = 0.0;
    for (const auto& s : spec.slices)
      if (s.id != parts[1]) others += s.share;
    for (auto& s : spec.slices) s.share = s.id == parts[1] ? value : s.share / others * (1.0 - value);
  } else if (parts.size() == 3 && parts[0] == "classes" &&
             (parts[2] == "arrival_rate" || parts[2] == "mean_workload")) {
    bool hit = false;
    for (auto& c : spec.classes) {
      if (parts[1] != "*" && c.id != parts[1]) continue;
      hit = true;
      if (parts[2] == "arrival_rate") {
        if (!(value >= 0.0)) bad("arrival_rate must be non-negative");
        c.arrival_rate = value;
      } else {
        if (!(value > 0.0)) bad("mean_workload must be positive");
        c.mean_workload = value;
      }
    }
    if (!hit) semantic("unknown class", path, 0);
  } else if (parts.size() == 3 && parts[0] == "resources" && parts[2] == "capacity") {
    auto it = std::find_if(spec.resources.begin(), spec.resources.end(),
                           [&](const auto& r) { return r.id == parts[1]; });
    if (it == spec.resources.end()) semantic("unknown resource", path, 0);
    if (!(value > 0.0)) bad("capacity must be positive");
    it->capacity = value;
  } else {
    semantic("unknown sweep parameter", path, 0);
  }

  ScenarioFile out(spec);
  out.version = file.version;
  out.id = file.id;
  out.run = std::move(run);
  out.sweep = file.sweep;
  return out;
}

ScenarioFile ScenarioFile::with_value(double value) const {
  if (!sweep) throw ParseError("scenario '" + id + "' has no sweep block");
  return apply_parameter(*this, sweep->parameter, value);
}

slicing::sim::Scenario ScenarioFile::scenario(const slicing::sim::Engine& engine, std::uint64_t seed) const {
  slicing::sim::Scenario sc(instance);
  sc.id = id;
  sc.engine = engine;
  sc.horizon = run.horizon;
  sc.horizon_unit = run.horizon_unit;
  sc.warmup = run.warmup;
  sc.seed = seed;
  return sc;
}

}  // namespace slicesim
