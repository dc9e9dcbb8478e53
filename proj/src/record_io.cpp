#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "pcac/experiment.hpp"

namespace pcac {
namespace {

// Shortest round-trippable text for a double.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::string optional_num(const std::optional<double>& v) {
  return v ? num(*v) : std::string("none");
}

}  // namespace

void write_record_csv(const ExperimentRecord& record,
                      const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "# sample_time=" << num(record.sample_time)
      << " t_open=" << num(record.t_open)
      << " change_time=" << num(record.change_time)
      << " failures=" << record.failure_count << '\n';
  out << "t,y,u_req,u,theta_f_norm,theta_g_norm,beta,closed_loop,held";
  const std::size_t n_theta = record.rows.empty() ? 0 : record.rows.front().theta.size();
  for (std::size_t i = 0; i < n_theta; ++i) out << ",theta_" << i;
  out << '\n';
  for (const auto& r : record.rows) {
    out << num(r.t) << ',' << num(r.y) << ',' << num(r.u_requested) << ','
        << num(r.u) << ',' << num(r.theta_f_norm) << ',' << num(r.theta_g_norm)
        << ',' << num(r.beta) << ',' << (r.closed_loop ? 1 : 0) << ','
        << (r.held ? 1 : 0);
    for (double v : r.theta) out << ',' << num(v);
    out << '\n';
  }
  check_written(out, path);
}

ExperimentRecord read_record_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  ExperimentRecord rec;
  std::string line;
  std::vector<std::string> header;
  bool have_t_open = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::stringstream ss(line.substr(1));
      std::string kv;
      while (ss >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        if (key == "sample_time") rec.sample_time = std::stod(value);
        if (key == "t_open") { rec.t_open = std::stod(value); have_t_open = true; }
        if (key == "change_time") rec.change_time = std::stod(value);
        if (key == "failures") rec.failure_count = std::stoll(value);
      }
      continue;
    }
    if (header.empty()) {
      header = split_csv(line);
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw std::runtime_error("record row width mismatch in " + path.string());
    RecordRow r{};
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const double v = std::stod(cells[i]);
      const std::string& h = header[i];
      if (h == "t") r.t = v;
      else if (h == "y") r.y = v;
      else if (h == "u_req") r.u_requested = v;
      else if (h == "u") r.u = v;
      else if (h == "theta_f_norm") r.theta_f_norm = v;
      else if (h == "theta_g_norm") r.theta_g_norm = v;
      else if (h == "beta") r.beta = v;
      else if (h == "closed_loop") r.closed_loop = v != 0.0;
      else if (h == "held") r.held = v != 0.0;
      else if (h.rfind("theta_", 0) == 0) r.theta.push_back(v);
    }
    rec.rows.push_back(std::move(r));
  }
  if (header.empty()) throw std::runtime_error("record has no header: " + path.string());
  if (rec.sample_time <= 0.0 && rec.rows.size() >= 2)
    rec.sample_time = rec.rows[1].t - rec.rows[0].t;
  if (!have_t_open) {
    rec.t_open = rec.rows.empty() ? 0.0 : rec.rows.back().t + rec.sample_time;
    for (const auto& r : rec.rows)
      if (r.closed_loop) { rec.t_open = r.t; break; }
  }
  return rec;
}

void write_spectrum_csv(const std::vector<SpectrumBin>& spectrum,
                        const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "frequency_hz,amplitude\n";
  for (const auto& b : spectrum) out << num(b.frequency_hz) << ',' << num(b.amplitude) << '\n';
  check_written(out, path);
}

void persist_experiment(const ExperimentRecord& record,
                        const ExperimentMetrics& m,
                        const std::filesystem::path& dir) {
  write_record_csv(record, dir / "record.csv");

  auto timing = open_out(dir / "timing.csv");
  timing << "# budget_violations=" << m.budget_violations << '\n' << "t,wall_us\n";
  for (const auto& r : record.rows)
    if (r.closed_loop) timing << num(r.t) << ',' << num(r.wall_us) << '\n';
  check_written(timing, dir / "timing.csv");

  auto out = open_out(dir / "metrics.txt");
  out << "# suppression_time: first time after the switch at which the trailing "
         "100 ms RMS of y drops below 1% of the pre-switch RMS (last 0.5 s of open loop)\n";
  out << "pre_rms=" << num(m.pre_rms) << '\n'
      << "final_rms=" << num(m.final_rms) << '\n'
      << "attenuation_db=" << num(m.attenuation_db) << '\n'
      << "suppression_time=" << optional_num(m.suppression_time) << '\n'
      << "resuppression_time=" << optional_num(m.resuppression_time) << '\n'
      << "open_peak_hz=" << num(m.open_peak_hz) << '\n'
      << "open_peak_amplitude=" << num(m.open_peak_amplitude) << '\n'
      << "closed_peak_amplitude=" << num(m.closed_peak_amplitude) << '\n'
      << "peak_attenuation_db=" << num(m.peak_attenuation_db) << '\n'
      << "max_abs_u=" << num(m.max_abs_u) << '\n'
      << "failures=" << m.failure_count << '\n';
  check_written(out, dir / "metrics.txt");
}

void write_grid_summary(const std::vector<GridCell>& cells,
                        const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "# suppression_time: first time after the switch at which the trailing "
         "100 ms RMS of y drops below 1% of the pre-switch RMS (last 0.5 s of open loop)\n";
  out << "cell,freq_hz,mu,status,suppression_time_s,attenuation_db,peak_hz,"
         "peak_attenuation_db,max_abs_u,failures,error\n";
  for (const auto& c : cells) {
    const auto& m = c.metrics;
    out << c.index << ',' << num(c.plant.omega / (2.0 * std::numbers::pi)) << ',' << num(c.plant.mu)
        << ',' << (c.ok ? "ok" : "failed") << ',' << optional_num(m.suppression_time)
        << ',' << num(m.attenuation_db) << ',' << num(m.open_peak_hz) << ','
        << num(m.peak_attenuation_db) << ',' << num(m.max_abs_u) << ','
        << m.failure_count << ',' << c.error << '\n';
  }
  check_written(out, path);
}

void write_ablation_summary(const std::vector<AblationCell>& cells,
                            const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "# resuppression_time: time after the plant change from which the trailing "
         "100 ms RMS stays below 1% of the pre-switch RMS\n";
  out << "cell,freq_hz,mu,status,suppression_eta,suppression_eta0,"
         "resuppression_eta,resuppression_eta0,forgetting_not_slower,error\n";
  for (const auto& c : cells) {
    const auto& a = c.with_forgetting;
    const auto& b = c.without_forgetting;
    bool not_slower = false;
    if (a.resuppression_time)
      not_slower = !b.resuppression_time || *a.resuppression_time <= *b.resuppression_time;
    out << c.index << ',' << num(c.plant.omega / (2.0 * std::numbers::pi)) << ',' << num(c.plant.mu)
        << ',' << (c.ok ? "ok" : "failed") << ',' << optional_num(a.suppression_time)
        << ',' << optional_num(b.suppression_time) << ','
        << optional_num(a.resuppression_time) << ','
        << optional_num(b.resuppression_time) << ',' << (not_slower ? 1 : 0) << ','
        << c.error << '\n';
  }
  check_written(out, path);
}

}  // namespace pcac
