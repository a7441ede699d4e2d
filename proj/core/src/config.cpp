#include "medflow/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace medflow {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_num(const std::string& v, const std::string& key, int line) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (...) {
    throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                      "' expects a number, got '" + v + "'");
  }
}

std::vector<double> parse_list(const std::string& v, const std::string& key, int line) {
  std::vector<double> out;
  std::istringstream ss(v);
  std::string tok;
  while (ss >> tok) out.push_back(parse_num(tok, key, line));
  return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  bool saw_h = false;
  int h_line = 0, r_line = 0;

  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(origin + ":" + std::to_string(line) + ": bad section");
      section = trim(s.substr(1, s.size() - 2));
      static const char* known[] = {"domain", "sampler", "kernel", "evolution",
                                    "heatflow", "output", "run"};
      bool ok = false;
      for (auto* k : known) ok |= (section == k);
      if (!ok)
        throw ConfigError(origin + ":" + std::to_string(line) + ": unknown section '" + section +
                          "'");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line) + ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    const std::string qual = section + "." + key;

    if (qual == "domain.kind") cfg.domain_kind = val;
    else if (qual == "domain.d") cfg.dim = static_cast<int>(parse_num(val, qual, line));
    else if (qual == "domain.lo") cfg.box_lo = parse_list(val, qual, line);
    else if (qual == "domain.hi") cfg.box_hi = parse_list(val, qual, line);
    else if (qual == "domain.boundary") cfg.boundary = val;
    else if (qual == "sampler.process") cfg.process = val;
    else if (qual == "sampler.n") cfg.n = parse_num(val, qual, line);
    else if (qual == "sampler.seed")
      cfg.seed = static_cast<std::uint64_t>(parse_num(val, qual, line));
    else if (qual == "kernel.kernel") cfg.kernel = val;
    else if (qual == "kernel.r") { cfg.r = parse_num(val, qual, line); r_line = line; }
    else if (qual == "kernel.h") { cfg.h = parse_num(val, qual, line); saw_h = true; h_line = line; }
    else if (qual == "evolution.mode") cfg.mode = val;
    else if (qual == "evolution.T") cfg.T = parse_num(val, qual, line);
    else if (qual == "evolution.alpha_deg") cfg.alpha_deg = parse_num(val, qual, line);
    else if (qual == "evolution.threshold") cfg.threshold = parse_num(val, qual, line);
    else if (qual == "evolution.initial") cfg.initial = val;
    else if (qual == "evolution.snapshots") cfg.snapshots = parse_list(val, qual, line);
    else if (qual == "evolution.ssl_zeta") cfg.ssl_zeta = parse_num(val, qual, line);
    else if (qual == "evolution.ssl_r0") cfg.ssl_r0 = parse_num(val, qual, line);
    else if (qual == "evolution.ssl_R") cfg.ssl_R = parse_num(val, qual, line);
    else if (qual == "evolution.ssl_exponent") cfg.ssl_exponent = parse_num(val, qual, line);
    else if (qual == "heatflow.enabled") cfg.heatflow_enabled = (val == "true" || val == "1");
    else if (qual == "heatflow.tau") cfg.heat_tau = parse_num(val, qual, line);
    else if (qual == "heatflow.T") cfg.heat_T = parse_num(val, qual, line);
    else if (qual == "output.dir") cfg.out_dir = val;
    else if (qual == "output.raster") cfg.raster = static_cast<int>(parse_num(val, qual, line));
    else if (qual == "output.energy_csv") cfg.energy_csv = (val == "true" || val == "1");
    else if (qual == "output.verbosity")
      cfg.verbosity = static_cast<int>(parse_num(val, qual, line));
    else if (qual == "run.threads") cfg.threads = static_cast<int>(parse_num(val, qual, line));
    else if (qual == "run.verify") cfg.verify = val;
    else if (qual == "run.sweep_seeds")
      cfg.sweep_seeds = static_cast<int>(parse_num(val, qual, line));
    else if (qual == "run.probe_grid")
      cfg.probe_grid = static_cast<int>(parse_num(val, qual, line));
    else
      throw ConfigError(origin + ":" + std::to_string(line) + ": unknown key '" + qual + "'");
  }

  if (saw_h && cfg.h.value() != cfg.r * cfg.r)
    throw ConfigError(origin + ": kernel.h (line " + std::to_string(h_line) +
                      ") must equal kernel.r^2 (r at line " + std::to_string(r_line) +
                      "); parabolic scaling requires h = r^2");
  validate_config(cfg);
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

void validate_config(const RunConfig& cfg) {
  if (cfg.domain_kind != "torus" && cfg.domain_kind != "box")
    throw ConfigError("domain.kind must be torus or box");
  if (cfg.dim < 2 || cfg.dim > 8) throw ConfigError("domain.d must lie in [2,8]");
  if (cfg.process != "iid" && cfg.process != "poisson")
    throw ConfigError("sampler.process must be iid or poisson");
  if (!(cfg.n >= 1.0)) throw ConfigError("sampler.n must be >= 1");
  if (!(cfg.r > 0.0)) throw ConfigError("kernel.r must be positive");
  if (cfg.mode != "levelset" && cfg.mode != "mbo" && cfg.mode != "youngangle" &&
      cfg.mode != "ssl")
    throw ConfigError("evolution.mode must be levelset, mbo, youngangle or ssl");
  if (cfg.mode == "youngangle" && cfg.domain_kind != "box")
    throw ConfigError("YoungAngle requires Box: set domain.kind = box");
  if (!(cfg.alpha_deg > 0.0 && cfg.alpha_deg < 180.0) && cfg.mode == "youngangle")
    throw ConfigError("evolution.alpha_deg must lie in (0, 180)");
  if (cfg.kernel.rfind("ball", 0) != 0 && cfg.kernel.rfind("annulus:", 0) != 0 &&
      cfg.kernel.rfind("shrinking", 0) != 0 && cfg.kernel.rfind("radial:", 0) != 0)
    throw ConfigError("kernel.kernel must be ball | annulus:<k> | shrinking | radial:<file>");
  if (cfg.raster < 16) throw ConfigError("output.raster must be >= 16");
  if (cfg.sweep_seeds < 1) throw ConfigError("run.sweep_seeds must be >= 1");
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream o;
  o.precision(17);
  o << "[domain]\n";
  o << "kind = " << cfg.domain_kind << "\n";
  o << "d = " << cfg.dim << "\n";
  o << "lo =";
  for (double v : cfg.box_lo) o << " " << v;
  o << "\nhi =";
  for (double v : cfg.box_hi) o << " " << v;
  o << "\nboundary = " << cfg.boundary << "\n";
  o << "[sampler]\n";
  o << "process = " << cfg.process << "\n";
  o << "n = " << cfg.n << "\n";
  o << "seed = " << cfg.seed << "\n";
  o << "[kernel]\n";
  o << "kernel = " << cfg.kernel << "\n";
  o << "r = " << cfg.r << "\n";
  o << "[evolution]\n";
  o << "mode = " << cfg.mode << "\n";
  o << "T = " << cfg.T << "\n";
  o << "alpha_deg = " << cfg.alpha_deg << "\n";
  o << "threshold = " << cfg.threshold << "\n";
  o << "initial = " << cfg.initial << "\n";
  if (!cfg.snapshots.empty()) {
    o << "snapshots =";
    for (double v : cfg.snapshots) o << " " << v;
    o << "\n";
  }
  o << "ssl_zeta = " << cfg.ssl_zeta << "\n";
  o << "ssl_r0 = " << cfg.ssl_r0 << "\n";
  o << "ssl_R = " << cfg.ssl_R << "\n";
  o << "ssl_exponent = " << cfg.ssl_exponent << "\n";
  o << "[heatflow]\n";
  o << "enabled = " << (cfg.heatflow_enabled ? "true" : "false") << "\n";
  o << "tau = " << cfg.heat_tau << "\n";
  o << "T = " << cfg.heat_T << "\n";
  o << "[output]\n";
  o << "dir = " << cfg.out_dir << "\n";
  o << "raster = " << cfg.raster << "\n";
  o << "energy_csv = " << (cfg.energy_csv ? "true" : "false") << "\n";
  o << "verbosity = " << cfg.verbosity << "\n";
  o << "[run]\n";
  o << "threads = " << cfg.threads << "\n";
  if (!cfg.verify.empty()) o << "verify = " << cfg.verify << "\n";
  o << "sweep_seeds = " << cfg.sweep_seeds << "\n";
  o << "probe_grid = " << cfg.probe_grid << "\n";
  return o.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
  const std::string s = serialize_config(cfg);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace medflow
