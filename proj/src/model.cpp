#include "mgems/model.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mgems/csv.hpp"

namespace mgems {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double to_double(const std::string& v, const std::string& key) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size())
    throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
  return x;
}

int to_int(const std::string& v, const std::string& key) {
  char* end = nullptr;
  long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size())
    throw ConfigError("config key '" + key + "': not an integer: '" + v + "'");
  return static_cast<int>(x);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Section {
  std::string kind;  // "microgrid", "generator", "storage", "grid", "prices", "commitment"
  std::string id;    // for generator/storage
  std::vector<std::pair<std::string, std::string>> entries;
};

std::vector<Section> parse_sections(const std::string& text) {
  std::vector<Section> sections;
  for (const auto& line : csv::lines(text)) {
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("malformed section header: " + line);
      std::string inner = trim(line.substr(1, line.size() - 2));
      auto sp = inner.find(' ');
      Section s;
      s.kind = trim(sp == std::string::npos ? inner : inner.substr(0, sp));
      s.id = sp == std::string::npos ? "" : trim(inner.substr(sp + 1));
      sections.push_back(std::move(s));
    } else {
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("expected 'key = value': " + line);
      if (sections.empty())
        throw ConfigError("key outside any [section]: " + line);
      sections.back().entries.emplace_back(trim(line.substr(0, eq)),
                                           trim(line.substr(eq + 1)));
    }
  }
  return sections;
}

// `interval_index, buy_price, sell_price`
void parse_prices_csv(const std::string& text, GridLink& grid) {
  auto ls = csv::lines(text);
  size_t i = !ls.empty() && csv::is_header(ls[0]) ? 1 : 0;
  long expect = 0;
  for (; i < ls.size(); ++i) {
    auto f = csv::fields(ls[i]);
    if (f.size() != 3)
      throw ConfigError("price series: expected 3 columns, got " +
                        std::to_string(f.size()) + " in: " + ls[i]);
    long idx = csv::parse_long(f[0], "price series interval_index");
    if (idx != expect)
      throw ConfigError("price series: missing interval " +
                        std::to_string(expect) + " (found " +
                        std::to_string(idx) + ")");
    grid.buy_price.push_back(csv::parse_double(f[1], "price series buy_price"));
    grid.sell_price.push_back(csv::parse_double(f[2], "price series sell_price"));
    ++expect;
  }
  if (grid.buy_price.empty()) throw ConfigError("price series: empty series");
}

// `interval_index, generator_id, status(0|1)`
void parse_commitment_csv(const std::string& text, MicrogridModel& model) {
  auto ls = csv::lines(text);
  size_t i = !ls.empty() && csv::is_header(ls[0]) ? 1 : 0;
  std::map<long, std::map<std::string, int>> rows;
  long max_idx = -1;
  for (; i < ls.size(); ++i) {
    auto f = csv::fields(ls[i]);
    if (f.size() != 3)
      throw ConfigError("commitment schedule: expected 3 columns in: " + ls[i]);
    long idx = csv::parse_long(f[0], "commitment interval_index");
    long st = csv::parse_long(f[2], "commitment status");
    if (st != 0 && st != 1)
      throw ConfigError("commitment schedule: status must be 0 or 1 at interval " +
                        std::to_string(idx));
    rows[idx][f[1]] = static_cast<int>(st);
    max_idx = std::max(max_idx, idx);
  }
  if (max_idx < 0) throw ConfigError("commitment schedule: empty series");
  model.commitment.assign(max_idx + 1, std::vector<int>(model.generators.size(), 0));
  for (long t = 0; t <= max_idx; ++t) {
    auto it = rows.find(t);
    if (it == rows.end())
      throw ConfigError("commitment schedule: missing interval " + std::to_string(t));
    for (size_t g = 0; g < model.generators.size(); ++g) {
      const auto& gid = model.generators[g].id;
      auto st = it->second.find(gid);
      if (st == it->second.end())
        throw ConfigError("commitment schedule: missing generator '" + gid +
                          "' at interval " + std::to_string(t));
      model.commitment[t][g] = st->second;
    }
  }
}

void fail(const std::string& field, const std::string& what) {
  throw ConfigError(field + ": " + what);
}

}  // namespace

int MicrogridModel::generator_index(const std::string& gid) const {
  for (size_t g = 0; g < generators.size(); ++g)
    if (generators[g].id == gid) return static_cast<int>(g);
  return -1;
}

void validate_model(const MicrogridModel& m) {
  for (const auto& g : m.generators) {
    const std::string tag = "Generator(" + g.id + ")";
    if (!(g.p_min >= 0.0 && g.p_min <= g.p_max))
      fail(tag + ".p_min", "requires 0 <= p_min (" + num(g.p_min) +
                               ") <= p_max (" + num(g.p_max) + ")");
    if (!(g.ramp > 0.0)) fail(tag + ".ramp", "requires ramp > 0, got " + num(g.ramp));
    if (!(g.linear_cost >= 0.0))
      fail(tag + ".linear_cost", "requires linear_cost >= 0, got " + num(g.linear_cost));
  }
  for (const auto& s : m.storage) {
    const std::string tag = "EnergyStorage(" + s.id + ")";
    if (!(s.e_min >= 0.0 && s.e_min <= s.e_initial && s.e_initial <= s.e_max))
      fail(tag + ".e_min", "requires 0 <= e_min (" + num(s.e_min) +
                               ") <= e_initial (" + num(s.e_initial) +
                               ") <= e_max (" + num(s.e_max) + ")");
    if (!(s.p_charge_min >= 0.0 && s.p_charge_min <= s.p_charge_max))
      fail(tag + ".p_charge_min",
           "requires 0 <= p_charge_min (" + num(s.p_charge_min) +
               ") <= p_charge_max (" + num(s.p_charge_max) + ")");
    if (!(s.p_discharge_min >= 0.0 && s.p_discharge_min <= s.p_discharge_max))
      fail(tag + ".p_discharge_min",
           "requires 0 <= p_discharge_min (" + num(s.p_discharge_min) +
               ") <= p_discharge_max (" + num(s.p_discharge_max) + ")");
    if (!(s.delta_p >= 0.0))
      fail(tag + ".delta_p", "requires delta_p >= 0, got " + num(s.delta_p));
    if (!(s.delta_e >= 0.0))
      fail(tag + ".delta_e", "requires delta_e >= 0, got " + num(s.delta_e));
    if (!(2.0 * s.delta_p < s.p_charge_max - s.p_charge_min))
      fail(tag + ".delta_p", "requires 2*delta_p (" + num(2.0 * s.delta_p) +
                                 ") < p_charge_max - p_charge_min (" +
                                 num(s.p_charge_max - s.p_charge_min) + ")");
    if (!(2.0 * s.delta_p < s.p_discharge_max - s.p_discharge_min))
      fail(tag + ".delta_p", "requires 2*delta_p (" + num(2.0 * s.delta_p) +
                                 ") < p_discharge_max - p_discharge_min (" +
                                 num(s.p_discharge_max - s.p_discharge_min) + ")");
    if (!(2.0 * s.delta_e < s.e_max - s.e_min))
      fail(tag + ".delta_e", "requires 2*delta_e (" + num(2.0 * s.delta_e) +
                                 ") < e_max - e_min (" + num(s.e_max - s.e_min) + ")");
  }
  if (!(m.grid.p_max > 0.0))
    fail("GridLink.p_max", "requires p_max > 0, got " + num(m.grid.p_max));
  if (m.grid.buy_price.size() != m.grid.sell_price.size())
    fail("GridLink.sell_price", "buy and sell series lengths differ");
  if (m.grid.buy_price.empty()) fail("GridLink.buy_price", "missing price series");
  for (size_t t = 0; t < m.grid.buy_price.size(); ++t)
    if (!(m.grid.sell_price[t] <= m.grid.buy_price[t]))
      fail("GridLink.sell_price",
           "requires sell_price (" + num(m.grid.sell_price[t]) +
               ") <= buy_price (" + num(m.grid.buy_price[t]) + ") at interval " +
               std::to_string(t));
  if (!(m.reserve_fraction >= 0.0 && m.reserve_fraction < 1.0))
    fail("MicrogridModel.reserve_fraction",
         "requires 0 <= reserve_fraction < 1, got " + num(m.reserve_fraction));
  if (m.dt_dispatch_s <= 0 || m.dt_control_s <= 0)
    fail("MicrogridModel.dt_dispatch_s", "durations must be positive");
  if (m.dt_dispatch_s % m.dt_control_s != 0)
    fail("MicrogridModel.dt_dispatch_s",
         "dt_dispatch (" + std::to_string(m.dt_dispatch_s) +
             "s) must be an integer multiple of dt_control (" +
             std::to_string(m.dt_control_s) + "s)");
  if (m.window < 1)
    fail("MicrogridModel.window", "requires window >= 1, got " + std::to_string(m.window));
  if (m.commitment.empty())
    fail("MicrogridModel.commitment", "missing commitment schedule");
  for (size_t t = 0; t < m.commitment.size(); ++t) {
    if (m.commitment[t].size() != m.generators.size())
      fail("MicrogridModel.commitment",
           "interval " + std::to_string(t) + " covers " +
               std::to_string(m.commitment[t].size()) + " generators, expected " +
               std::to_string(m.generators.size()));
    for (int st : m.commitment[t])
      if (st != 0 && st != 1)
        fail("MicrogridModel.commitment",
             "status must be 0 or 1 at interval " + std::to_string(t));
  }
}

MicrogridModel load_model(const std::string& config_text, const SeriesResolver& resolver) {
  MicrogridModel model;
  std::string prices_ref, commitment_ref;
  std::vector<std::pair<std::string, std::string>> inline_prices, inline_commitment;
  bool storage_delta_p_set = false, storage_delta_e_set = false, e_initial_set = false;

  for (const auto& sec : parse_sections(config_text)) {
    if (sec.kind == "microgrid") {
      for (const auto& [k, v] : sec.entries) {
        if (k == "reserve_fraction") model.reserve_fraction = to_double(v, k);
        else if (k == "dt_dispatch_s") model.dt_dispatch_s = to_int(v, k);
        else if (k == "dt_control_s") model.dt_control_s = to_int(v, k);
        else if (k == "window") model.window = to_int(v, k);
        else if (k == "prices") prices_ref = v;
        else if (k == "commitment") commitment_ref = v;
        else throw ConfigError("unknown key '" + k + "' in [microgrid]");
      }
    } else if (sec.kind == "generator") {
      if (sec.id.empty()) throw ConfigError("[generator] section needs an id");
      Generator g;
      g.id = sec.id;
      for (const auto& [k, v] : sec.entries) {
        if (k == "p_min") g.p_min = to_double(v, k);
        else if (k == "p_max") g.p_max = to_double(v, k);
        else if (k == "ramp") g.ramp = to_double(v, k);
        else if (k == "linear_cost") g.linear_cost = to_double(v, k);
        else if (k == "no_load_cost") g.no_load_cost = to_double(v, k);
        else if (k == "startup_cost") g.startup_cost = to_double(v, k);
        else throw ConfigError("unknown key '" + k + "' in [generator " + sec.id + "]");
      }
      model.generators.push_back(std::move(g));
    } else if (sec.kind == "storage") {
      if (sec.id.empty()) throw ConfigError("[storage] section needs an id");
      EnergyStorage s;
      s.id = sec.id;
      storage_delta_p_set = storage_delta_e_set = e_initial_set = false;
      for (const auto& [k, v] : sec.entries) {
        if (k == "e_min") s.e_min = to_double(v, k);
        else if (k == "e_max") s.e_max = to_double(v, k);
        else if (k == "e_initial") { s.e_initial = to_double(v, k); e_initial_set = true; }
        else if (k == "p_charge_min") s.p_charge_min = to_double(v, k);
        else if (k == "p_charge_max") s.p_charge_max = to_double(v, k);
        else if (k == "p_discharge_min") s.p_discharge_min = to_double(v, k);
        else if (k == "p_discharge_max") s.p_discharge_max = to_double(v, k);
        else if (k == "delta_p") { s.delta_p = to_double(v, k); storage_delta_p_set = true; }
        else if (k == "delta_e") { s.delta_e = to_double(v, k); storage_delta_e_set = true; }
        else throw ConfigError("unknown key '" + k + "' in [storage " + sec.id + "]");
      }
      if (!storage_delta_p_set) s.delta_p = 0.10 * s.p_charge_max;
      if (!storage_delta_e_set) s.delta_e = 0.05 * (s.e_max - s.e_min);
      if (!e_initial_set) s.e_initial = 0.5 * (s.e_min + s.e_max);
      model.storage.push_back(std::move(s));
    } else if (sec.kind == "grid") {
      for (const auto& [k, v] : sec.entries) {
        if (k == "p_max") model.grid.p_max = to_double(v, k);
        else throw ConfigError("unknown key '" + k + "' in [grid]");
      }
    } else if (sec.kind == "prices") {
      inline_prices = sec.entries;
    } else if (sec.kind == "commitment") {
      inline_commitment = sec.entries;
    } else {
      throw ConfigError("unknown section [" + sec.kind + "]");
    }
  }

  // Prices: inline section wins, else resolve the referenced CSV.
  if (!inline_prices.empty()) {
    long expect = 0;
    for (const auto& [k, v] : inline_prices) {
      long idx = to_int(k, "prices interval");
      if (idx != expect)
        throw ConfigError("prices: missing interval " + std::to_string(expect));
      auto parts = split_ws(v);
      if (parts.size() != 2)
        throw ConfigError("prices: interval " + k + " needs 'buy sell'");
      model.grid.buy_price.push_back(to_double(parts[0], "buy_price"));
      model.grid.sell_price.push_back(to_double(parts[1], "sell_price"));
      ++expect;
    }
  } else if (!prices_ref.empty()) {
    if (!resolver) throw ConfigError("prices reference '" + prices_ref +
                                     "' but no series resolver is available");
    parse_prices_csv(resolver(prices_ref), model.grid);
  } else {
    throw ConfigError("missing price series: provide [prices] or 'prices = <csv>'");
  }

  if (!inline_commitment.empty()) {
    long expect = 0;
    for (const auto& [k, v] : inline_commitment) {
      long idx = to_int(k, "commitment interval");
      if (idx != expect)
        throw ConfigError("commitment: missing interval " + std::to_string(expect));
      auto parts = split_ws(v);
      if (parts.size() != model.generators.size())
        throw ConfigError("commitment: interval " + k + " has " +
                          std::to_string(parts.size()) + " statuses, expected " +
                          std::to_string(model.generators.size()));
      std::vector<int> row;
      for (const auto& p : parts) row.push_back(to_int(p, "commitment status"));
      model.commitment.push_back(std::move(row));
      ++expect;
    }
  } else if (!commitment_ref.empty()) {
    if (!resolver) throw ConfigError("commitment reference '" + commitment_ref +
                                     "' but no series resolver is available");
    parse_commitment_csv(resolver(commitment_ref), model);
  } else {
    throw ConfigError("missing commitment schedule: provide [commitment] or 'commitment = <csv>'");
  }

  validate_model(model);
  return model;
}

MicrogridModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto dir = path.parent_path();
  return load_model(ss.str(), [dir](const std::string& ref) {
    std::ifstream f(dir / ref);
    if (!f) throw ConfigError("cannot open referenced series: " + (dir / ref).string());
    std::stringstream body;
    body << f.rdbuf();
    return body.str();
  });
}

std::string serialize_model(const MicrogridModel& m) {
  std::ostringstream out;
  out << "[microgrid]\n";
  out << "reserve_fraction = " << num(m.reserve_fraction) << "\n";
  out << "dt_dispatch_s = " << m.dt_dispatch_s << "\n";
  out << "dt_control_s = " << m.dt_control_s << "\n";
  out << "window = " << m.window << "\n\n";
  out << "[grid]\n";
  out << "p_max = " << num(m.grid.p_max) << "\n\n";
  for (const auto& g : m.generators) {
    out << "[generator " << g.id << "]\n";
    out << "p_min = " << num(g.p_min) << "\n";
    out << "p_max = " << num(g.p_max) << "\n";
    out << "ramp = " << num(g.ramp) << "\n";
    out << "linear_cost = " << num(g.linear_cost) << "\n";
    out << "no_load_cost = " << num(g.no_load_cost) << "\n";
    out << "startup_cost = " << num(g.startup_cost) << "\n\n";
  }
  for (const auto& s : m.storage) {
    out << "[storage " << s.id << "]\n";
    out << "e_min = " << num(s.e_min) << "\n";
    out << "e_max = " << num(s.e_max) << "\n";
    out << "e_initial = " << num(s.e_initial) << "\n";
    out << "p_charge_min = " << num(s.p_charge_min) << "\n";
    out << "p_charge_max = " << num(s.p_charge_max) << "\n";
    out << "p_discharge_min = " << num(s.p_discharge_min) << "\n";
    out << "p_discharge_max = " << num(s.p_discharge_max) << "\n";
    out << "delta_p = " << num(s.delta_p) << "\n";
    out << "delta_e = " << num(s.delta_e) << "\n\n";
  }
  out << "[prices]\n";
  for (size_t t = 0; t < m.grid.buy_price.size(); ++t)
    out << t << " = " << num(m.grid.buy_price[t]) << " " << num(m.grid.sell_price[t]) << "\n";
  out << "\n[commitment]\n";
  for (size_t t = 0; t < m.commitment.size(); ++t) {
    out << t << " =";
    for (int st : m.commitment[t]) out << " " << st;
    out << "\n";
  }
  return out.str();
}

void replace_commitment(MicrogridModel& model, const std::string& csv_text) {
  model.commitment.clear();
  parse_commitment_csv(csv_text, model);
  validate_model(model);
}

int intervals_per_dispatch(const MicrogridModel& model) {
  return model.dt_dispatch_s / model.dt_control_s;
}

}  // namespace mgems
