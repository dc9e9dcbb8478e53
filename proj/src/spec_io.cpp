#include "pcac/spec_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

namespace pcac {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Entries {
 public:
  void set(const std::string& key, const std::string& value, int line) {
    if (!values_.emplace(key, value).second)
      throw SpecError("line " + std::to_string(line) + ": duplicate key " + key);
  }

  std::optional<std::string> take(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    std::string v = it->second;
    values_.erase(it);
    return v;
  }

  void real(const std::string& key, double& target) {
    if (auto v = take(key)) target = parse_real(key, *v);
  }
  std::optional<double> real(const std::string& key) {
    if (auto v = take(key)) return parse_real(key, *v);
    return std::nullopt;
  }
  template <typename Int>
  void integer(const std::string& key, Int& target) {
    if (auto v = take(key)) {
      std::size_t used = 0;
      long long parsed = 0;
      try {
        parsed = std::stoll(*v, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != v->size()) throw SpecError(key + ": expected an integer, got '" + *v + "'");
      target = static_cast<Int>(parsed);
    }
  }
  void boolean(const std::string& key, bool& target) {
    if (auto v = take(key)) {
      if (*v == "true" || *v == "1") target = true;
      else if (*v == "false" || *v == "0") target = false;
      else throw SpecError(key + ": expected true/false, got '" + *v + "'");
    }
  }

  void ensure_consumed() const {
    if (!values_.empty()) throw SpecError("unknown key: " + values_.begin()->first);
  }

 private:
  static double parse_real(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double parsed = 0.0;
    try {
      parsed = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size()) throw SpecError(key + ": expected a number, got '" + v + "'");
    return parsed;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace

ExperimentSpec parse_spec(const std::string& text) {
  Entries e;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw SpecError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.find('.') == std::string::npos)
      throw SpecError("line " + std::to_string(line_no) + ": key needs a section prefix");
    e.set(key, trim(line.substr(eq + 1)), line_no);
  }

  ExperimentSpec spec;
  EmulatorParams& p = spec.plant;
  if (auto f = e.real("plant.freq_hz")) p.omega = 2.0 * std::numbers::pi * *f;
  e.real("plant.omega", p.omega);
  if (auto f = e.real("plant.mu_factor")) p.mu = *f * 0.01 * p.omega;
  e.real("plant.mu", p.mu);
  e.real("plant.kappa", p.kappa);
  e.real("plant.amp_scale", p.amp_scale);
  e.real("plant.noise_std", p.noise_std);
  e.integer("plant.seed", p.seed);
  e.integer("plant.substeps", p.substeps);
  e.real("plant.q0", spec.q0);
  e.real("plant.qdot0", spec.qdot0);
  e.real("plant.change_time", spec.change_time);
  e.real("plant.change_omega_factor", spec.change_omega_factor);

  int n_hat = spec.controller.dims.n_hat;
  e.integer("controller.n_hat", n_hat);
  PcacConfig c = PcacConfig::defaults({n_hat, 1, 1});
  if (auto v = e.real("controller.theta0"))
    c.theta0 = ArxParameters<double>::Constant(c.dims, *v);
  e.real("controller.psi0", c.psi0_scale);
  e.integer("controller.tau_n", c.forgetting.tau_n);
  e.integer("controller.tau_d", c.forgetting.tau_d);
  e.real("controller.eta", c.forgetting.eta);
  e.real("controller.alpha", c.forgetting.alpha);
  e.integer("controller.ell", c.weights.ell);
  if (auto v = e.real("controller.r2")) c.weights.R2(0, 0) = *v;
  e.real("controller.u_min", c.bounds.u_min(0));
  e.real("controller.u_max", c.bounds.u_max(0));
  e.real("controller.u0", c.u0(0));
  spec.controller = c;

  e.real("sim.sample_time", spec.sample_time);
  e.real("sim.t_open", spec.t_open);
  e.real("sim.t_total", spec.t_total);
  if (auto v = e.take("output.path")) spec.output_path = *v;
  e.boolean("output.full_theta", spec.record_full_theta);

  e.ensure_consumed();
  try {
    spec.validate();
  } catch (const std::invalid_argument& ex) {
    throw SpecError(ex.what());
  }
  return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

std::string format_spec(const ExperimentSpec& s) {
  const auto& p = s.plant;
  const auto& c = s.controller;
  std::ostringstream out;
  out << "plant.omega = " << num(p.omega) << '\n'
      << "plant.mu = " << num(p.mu) << '\n'
      << "plant.kappa = " << num(p.kappa) << '\n'
      << "plant.amp_scale = " << num(p.amp_scale) << '\n'
      << "plant.noise_std = " << num(p.noise_std) << '\n'
      << "plant.seed = " << p.seed << '\n'
      << "plant.substeps = " << p.substeps << '\n'
      << "plant.q0 = " << num(s.q0) << '\n'
      << "plant.qdot0 = " << num(s.qdot0) << '\n'
      << "plant.change_time = " << num(s.change_time) << '\n'
      << "plant.change_omega_factor = " << num(s.change_omega_factor) << '\n'
      << "controller.n_hat = " << c.dims.n_hat << '\n'
      << "controller.theta0 = " << num(c.theta0.vector()(0)) << '\n'
      << "controller.psi0 = " << num(c.psi0_scale) << '\n'
      << "controller.tau_n = " << c.forgetting.tau_n << '\n'
      << "controller.tau_d = " << c.forgetting.tau_d << '\n'
      << "controller.eta = " << num(c.forgetting.eta) << '\n'
      << "controller.alpha = " << num(c.forgetting.alpha) << '\n'
      << "controller.ell = " << c.weights.ell << '\n'
      << "controller.r2 = " << num(c.weights.R2(0, 0)) << '\n'
      << "controller.u_min = " << num(c.bounds.u_min(0)) << '\n'
      << "controller.u_max = " << num(c.bounds.u_max(0)) << '\n'
      << "controller.u0 = " << num(c.u0(0)) << '\n'
      << "sim.sample_time = " << num(s.sample_time) << '\n'
      << "sim.t_open = " << num(s.t_open) << '\n'
      << "sim.t_total = " << num(s.t_total) << '\n'
      << "output.full_theta = " << (s.record_full_theta ? "true" : "false") << '\n';
  if (!s.output_path.empty()) out << "output.path = " << s.output_path << '\n';
  return out.str();
}

}  // namespace pcac
