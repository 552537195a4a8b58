#include "experiment_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <sstream>

#include "shbuf/trace_io.hpp"

namespace shbuf::cli {
namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ValidationError("bad value for " + key + ": '" + text + "'");
  }
  return v;
}

std::uint32_t parse_u32(const std::string& key, const std::string& text) {
  return parse_number<std::uint32_t>(key, text);
}

double parse_real(const std::string& key, const std::string& text) {
  return parse_number<double>(key, text);
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  return parts;
}

template <typename T>
std::string join(const std::vector<T>& v, std::string (*fmt)(T)) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += fmt(v[i]);
  }
  return s;
}

void require_one_of(const std::string& key, const std::string& value,
                    std::initializer_list<const char*> options) {
  for (const char* o : options) {
    if (value == o) return;
  }
  std::string msg = "bad value for " + key + ": '" + value + "' (expected one of";
  for (const char* o : options) msg += std::string(" ") + o;
  throw ValidationError(msg + ")");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split_commas(text)) out.push_back(parse_real("list", part));
  return out;
}

std::vector<std::uint32_t> parse_uint_list(const std::string& text) {
  std::vector<std::uint32_t> out;
  for (const auto& part : split_commas(text)) out.push_back(parse_u32("list", part));
  return out;
}

void ExperimentConfig::set(const std::string& section, const std::string& key,
                           const std::string& raw) {
  const std::string name = section + "." + key;
  const std::string value = trim(raw);

  if (section == "switch") {
    if (key == "num_ports") { switch_config.num_ports = parse_u32(name, value); return; }
    if (key == "buffer_size") { switch_config.buffer_size = parse_u32(name, value); return; }
  } else if (section == "workload") {
    if (key == "kind") { workload.kind = parse_workload_kind(value); return; }
    if (key == "burst_size") { workload.burst_size = parse_u32(name, value); return; }
    if (key == "short_burst") { workload.short_burst = parse_u32(name, value); return; }
    if (key == "cycles") { workload.cycles = parse_u32(name, value); return; }
    if (key == "rate") { workload.rate = parse_real(name, value); return; }
    if (key == "load") { workload.load = parse_real(name, value); return; }
    if (key == "horizon") { workload.horizon = parse_u32(name, value); return; }
    if (key == "trace") { trace = value; return; }
  } else if (section == "policy") {
    if (key == "name") {
      require_one_of(name, value, {"cs", "dt", "lqd", "followlqd", "credence"});
      policy = value;
      return;
    }
    if (key == "dt_alpha") {
      try {
        dt_alpha = Rational::parse(value);
      } catch (const std::exception& e) {
        throw ValidationError("bad value for " + name + ": " + e.what());
      }
      return;
    }
    if (key == "ewma_window") { ewma_window = parse_u32(name, value); return; }
  } else if (section == "oracle") {
    if (key == "kind") {
      require_one_of(name, value,
                     {"perfect", "constant_drop", "constant_accept", "flip", "forest"});
      oracle = value;
      return;
    }
    if (key == "flip_p") { flip_p = parse_real(name, value); return; }
    if (key == "model") { model = value; return; }
    if (key == "fallback") {
      require_one_of(name, value, {"accept", "drop"});
      fallback = value;
      return;
    }
  } else if (section == "learner") {
    if (key == "trees") { trees = parse_u32(name, value); return; }
    if (key == "max_depth") { max_depth = parse_u32(name, value); return; }
    if (key == "split") { split = parse_real(name, value); return; }
  } else if (section == "sweep") {
    if (key == "p_values") { p_values = parse_double_list(value); return; }
    if (key == "seeds") { sweep_seeds = parse_u32(name, value); return; }
  } else if (section == "run") {
    if (key == "seed") { seed = parse_number<std::uint64_t>(name, value); return; }
  } else if (section == "output") {
    if (key == "dir") { out_dir = value; return; }
  }
  throw ValidationError("unknown config key " + name);
}

void ExperimentConfig::set_assignment(const std::string& assignment) {
  auto eq = assignment.find('=');
  auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ValidationError("expected section.key=value, got '" + assignment + "'");
  }
  set(trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
      assignment.substr(eq + 1));
}

void ExperimentConfig::validate() const {
  switch_config.validate();
  if (ewma_window < 1) throw ValidationError("policy.ewma_window must be >= 1");
  if (!(flip_p >= 0.0 && flip_p <= 1.0)) throw ValidationError("oracle.flip_p must be in [0, 1]");
  if (trees < 1 || trees > 16) throw ValidationError("learner.trees must be in 1..16");
  if (max_depth < 1) throw ValidationError("learner.max_depth must be >= 1");
  if (!(split >= 0.0 && split < 1.0)) throw ValidationError("learner.split must be in [0, 1)");
  if (p_values.empty()) throw ValidationError("sweep.p_values must not be empty");
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("sweep.p_values must lie in [0, 1]");
  }
  if (sweep_seeds < 1) throw ValidationError("sweep.seeds must be >= 1");
  if (dt_alpha.num <= 0 || dt_alpha.den <= 0) {
    throw ValidationError("policy.dt_alpha must be positive");
  }
  if (!(workload.rate > 0.0)) throw ValidationError("workload.rate must be > 0");
  if (!(workload.load >= 0.0 && workload.load <= 1.0)) {
    throw ValidationError("workload.load must be in [0, 1]");
  }
  if (out_dir.empty()) throw ValidationError("output.dir must not be empty");
}

std::string ExperimentConfig::to_ini() const {
  std::ostringstream s;
  s << "[switch]\n"
    << "num_ports = " << switch_config.num_ports << "\n"
    << "buffer_size = " << switch_config.buffer_size << "\n\n"
    << "[workload]\n"
    << "kind = " << to_string(workload.kind) << "\n"
    << "burst_size = " << workload.burst_size << "\n"
    << "short_burst = " << workload.short_burst << "\n"
    << "cycles = " << workload.cycles << "\n"
    << "rate = " << format_double(workload.rate) << "\n"
    << "load = " << format_double(workload.load) << "\n"
    << "horizon = " << workload.horizon << "\n"
    << "trace = " << trace << "\n\n"
    << "[policy]\n"
    << "name = " << policy << "\n"
    << "dt_alpha = " << dt_alpha.str() << "\n"
    << "ewma_window = " << ewma_window << "\n\n"
    << "[oracle]\n"
    << "kind = " << oracle << "\n"
    << "flip_p = " << format_double(flip_p) << "\n"
    << "model = " << model << "\n"
    << "fallback = " << fallback << "\n\n"
    << "[learner]\n"
    << "trees = " << trees << "\n"
    << "max_depth = " << max_depth << "\n"
    << "split = " << format_double(split) << "\n\n"
    << "[sweep]\n"
    << "p_values = " << join<double>(p_values, format_double) << "\n"
    << "seeds = " << sweep_seeds << "\n\n"
    << "[run]\n"
    << "seed = " << seed << "\n\n"
    << "[output]\n"
    << "dir = " << out_dir << "\n";
  return s.str();
}

ExperimentConfig parse_config(const std::string& text,
                              std::vector<std::string>* keys_seen) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      if (body.data().empty()) continue;  // empty section
      throw ValidationError("config key '" + section + "' is outside a section");
    }
    for (const auto& [key, value] : body) {
      cfg.set(section, key, value.data());
      if (keys_seen) keys_seen->push_back(section + "." + key);
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path,
                             std::vector<std::string>* keys_seen) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ValidationError(e.what());
  }
  return parse_config(text, keys_seen);
}

}  // namespace shbuf::cli
