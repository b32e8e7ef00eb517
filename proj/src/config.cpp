#include "sacfem/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sacfem {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& msg) {
  throw std::invalid_argument("config key '" + key + "': " + msg);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) bad(key, "not a number: " + v);
    return x;
  } catch (const std::logic_error&) {
    bad(key, "not a number: " + v);
  }
}

long to_long(const std::string& key, const std::string& v) {
  long x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(key, "not an integer: " + v);
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  bad(key, "expected true/false: " + v);
}

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define SACFEM_DOUBLE(name) \
  { #name, { [](RunConfig& c, const std::string& v) { c.name = to_double(#name, v); }, \
             [](const RunConfig& c) { return fmt(c.name); } } }
#define SACFEM_INT(name) \
  { #name, { [](RunConfig& c, const std::string& v) { c.name = static_cast<decltype(c.name)>(to_long(#name, v)); }, \
             [](const RunConfig& c) { return std::to_string(c.name); } } }

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      SACFEM_DOUBLE(E), SACFEM_DOUBLE(nu), SACFEM_DOUBLE(rho), SACFEM_DOUBLE(alpha), SACFEM_DOUBLE(alpha_s),
      SACFEM_DOUBLE(beta),
      {"h_measure",
       {[](RunConfig& c, const std::string& v) {
          try {
            c.h_measure = parse_size_measure(v);
          } catch (const std::invalid_argument&) {
            bad("h_measure", "expected insphere or circumsphere: " + v);
          }
        },
        [](const RunConfig& c) { return std::string(to_string(c.h_measure)); }}}, SACFEM_DOUBLE(L), SACFEM_DOUBLE(W), SACFEM_DOUBLE(H), SACFEM_INT(nx), SACFEM_INT(ny),
      SACFEM_INT(nz), SACFEM_DOUBLE(fx), SACFEM_DOUBLE(fy), SACFEM_DOUBLE(fz), SACFEM_DOUBLE(t_end),
      {"discontinuous_cutoff",
       {[](RunConfig& c, const std::string& v) {
          if (v == "none") c.discontinuous_cutoff.reset();
          else c.discontinuous_cutoff = to_double("discontinuous_cutoff", v);
        },
        [](const RunConfig& c) { return c.discontinuous_cutoff ? fmt(*c.discontinuous_cutoff) : "none"; }}},
      SACFEM_DOUBLE(alpha_f_min), SACFEM_DOUBLE(alpha_f_max), SACFEM_INT(n_loads), SACFEM_INT(n_ics),
      {"dt",
       {[](RunConfig& c, const std::string& v) {
          if (v == "auto") c.dt.reset();
          else c.dt = to_double("dt", v);
        },
        [](const RunConfig& c) { return c.dt ? fmt(*c.dt) : "auto"; }}},
      SACFEM_INT(n_T),
      {"mode",
       {[](RunConfig& c, const std::string& v) {
          if (v == "pre") c.mode = AssemblyMode::PreAssembled;
          else if (v == "nopre") c.mode = AssemblyMode::PerStep;
          else bad("mode", "expected pre or nopre: " + v);
        },
        [](const RunConfig& c) { return std::string(c.mode == AssemblyMode::PreAssembled ? "pre" : "nopre"); }}},
      SACFEM_INT(cores), SACFEM_DOUBLE(latency_us), SACFEM_INT(k), SACFEM_INT(n_H), SACFEM_INT(n_p),
      SACFEM_INT(n_f), SACFEM_INT(n_s), SACFEM_DOUBLE(n_ts), SACFEM_INT(n_B), SACFEM_DOUBLE(eta0),
      SACFEM_DOUBLE(gamma), SACFEM_DOUBLE(eta_min),
      {"seed",
       {[](RunConfig& c, const std::string& v) {
          const long s = to_long("seed", v);
          if (s < 0) bad("seed", "must be non-negative");
          c.seed = static_cast<std::uint64_t>(s);
        },
        [](const RunConfig& c) { return std::to_string(c.seed); }}},
      {"conditional",
       {[](RunConfig& c, const std::string& v) { c.conditional = to_bool("conditional", v); },
        [](const RunConfig& c) { return std::string(c.conditional ? "true" : "false"); }}},
      SACFEM_INT(n_rep),
      {"n_cri",
       {[](RunConfig& c, const std::string& v) {
          if (v == "auto") c.n_cri.reset();
          else c.n_cri = to_long("n_cri", v);
        },
        [](const RunConfig& c) { return c.n_cri ? std::to_string(*c.n_cri) : "auto"; }}},
  };
  return table;
}

#undef SACFEM_DOUBLE
#undef SACFEM_INT

void require(bool ok, const std::string& key, const std::string& msg) {
  if (!ok) bad(key, msg);
}

}  // namespace

Material RunConfig::material() const { return Material::make(E, nu, rho, alpha); }

LoadSpec RunConfig::load() const {
  LoadSpec load;
  load.body_force = Eigen::Vector3d(fx, fy, fz);
  load.t_end = t_end;
  load.cutoff = discontinuous_cutoff;
  return load;
}

void validate(const RunConfig& c) {
  require(c.E > 0, "E", "must be positive");
  require(c.nu >= 0 && c.nu < 0.5, "nu", "must lie in [0, 0.5)");
  require(c.rho > 0, "rho", "must be positive");
  require(c.alpha >= 0, "alpha", "must be non-negative");
  require(c.alpha_s > 0 && c.alpha_s < 1, "alpha_s", "must lie in (0, 1)");
  require(c.beta >= 1, "beta", "must be >= 1");
  require(c.L > 0, "L", "must be positive");
  require(c.W > 0, "W", "must be positive");
  require(c.H > 0, "H", "must be positive");
  require(c.nx >= 1, "nx", "must be >= 1");
  require(c.ny >= 1, "ny", "must be >= 1");
  require(c.nz >= 1, "nz", "must be >= 1");
  require(c.t_end > 0, "t_end", "must be positive");
  require(!c.discontinuous_cutoff || *c.discontinuous_cutoff > 0, "discontinuous_cutoff", "must be positive");
  require(c.alpha_f_min <= c.alpha_f_max, "alpha_f_max", "must be >= alpha_f_min");
  require(c.n_loads >= 1, "n_loads", "must be >= 1");
  require(c.n_ics >= 0, "n_ics", "must be >= 0");
  require(!c.dt || *c.dt > 0, "dt", "must be positive");
  require(c.n_T >= 1, "n_T", "must be >= 1");
  require(c.cores >= 1, "cores", "must be >= 1");
  require(c.latency_us >= 0, "latency_us", "must be non-negative");
  require(c.k >= 1, "k", "must be >= 1");
  require(c.n_H >= 1, "n_H", "must be >= 1");
  require(c.n_p >= 1, "n_p", "must be >= 1");
  require(c.n_f >= 1, "n_f", "must be >= 1");
  require(c.n_s >= 1, "n_s", "must be >= 1");
  require(c.n_ts > 0 && c.n_ts <= 1, "n_ts", "must lie in (0, 1]");
  require(c.n_B >= 1, "n_B", "must be >= 1");
  require(c.eta0 > 0, "eta0", "must be positive");
  require(c.gamma > 0 && c.gamma < 1, "gamma", "must lie in (0, 1)");
  require(c.eta_min > 0 && c.eta_min < c.eta0, "eta_min", "must lie in (0, eta0)");
  require(c.n_rep >= 1, "n_rep", "must be >= 1");
  require(!c.n_cri || *c.n_cri >= static_cast<long>(c.n_p) * c.n_s + 1, "n_cri", "must be >= n_p*n_s+1");
}

RunConfig parse_config_string(const std::string& text) {
  std::map<std::string, const Field*> index;
  for (const auto& [name, field] : fields()) index[name] = &field;
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + " '" + line + "': expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = index.find(key);
    if (it == index.end()) bad(key, "unknown key");
    if (value.empty()) bad(key, "missing value");
    it->second->set(cfg, value);
  }
  validate(cfg);
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_string(buf.str());
}

std::string emit_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [name, field] : fields()) out += name + " = " + field.get(cfg) + "\n";
  return out;
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : emit_config(cfg)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

}  // namespace sacfem
