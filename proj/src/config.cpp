#include "rpd/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rpd {

void PipelineConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (delta_pt < 0) fail("delta_pt must be >= 0");
  if (delta_dt <= 0) fail("delta_dt must be > 0");
  if (delta_pd <= 0) fail("delta_pd must be > 0");
  if (d_max < 1 || d_max_pt < 1) fail("d_max must be >= 1");
  if (!(lambda1 > 0 && lambda1 <= lambda2)) fail("need 0 < lambda1 <= lambda2");
  if (census_window != 3 && census_window != 5 && census_window != 7) fail("census_window must be 3, 5 or 7");
  if (superpixels < 4) fail("superpixels must be >= 4");
  if (compactness <= 0) fail("compactness must be > 0");
  if (connectivity != 4 && connectivity != 8) fail("connectivity must be 4 or 8");
  if (roll_bracket <= 0 || roll_tol <= 0) fail("roll bracket/tol must be > 0");
  if (focal <= 0 || baseline <= 0) fail("focal and baseline must be > 0");
}

void apply_key_value(PipelineConfig& c, const std::string& key, const std::string& value) {
  auto d = [&] { return std::stod(value); };
  auto i = [&] { return std::stoi(value); };
  if (key == "delta_pt") c.delta_pt = d();
  else if (key == "delta_dt") c.delta_dt = d();
  else if (key == "delta_pd") c.delta_pd = d();
  else if (key == "d_max") c.d_max = i();
  else if (key == "d_max_pt") c.d_max_pt = i();
  else if (key == "lambda1") c.lambda1 = d();
  else if (key == "lambda2") c.lambda2 = d();
  else if (key == "census_window") c.census_window = i();
  else if (key == "lr_threshold") c.lr_threshold = d();
  else if (key == "superpixels") c.superpixels = i();
  else if (key == "compactness") c.compactness = d();
  else if (key == "slic_iterations") c.slic_iterations = i();
  else if (key == "hist_bin_width") c.hist_bin_width = d();
  else if (key == "tau_diag") c.tau_diag = d();
  else if (key == "border_margin") c.border_margin = i();
  else if (key == "min_superpixels") c.min_superpixels = i();
  else if (key == "connectivity") c.connectivity = i();
  else if (key == "roll_bracket") c.roll_bracket = d();
  else if (key == "roll_tol") c.roll_tol = d();
  else if (key == "focal") c.focal = d();
  else if (key == "baseline") c.baseline = d();
  else if (key == "cu") c.cu = d();
  else if (key == "cv") c.cv = d();
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config file not found: " + path);
  PipelineConfig c;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const char* ws = " \t\r";
      s.erase(0, s.find_first_not_of(ws));
      auto e = s.find_last_not_of(ws);
      s.erase(e == std::string::npos ? 0 : e + 1);
      return s;
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    apply_key_value(c, key, value);
  }
  c.validate();
  return c;
}

void save_config(const PipelineConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config: " + path);
  out << "delta_pt=" << c.delta_pt << "\n"
      << "delta_dt=" << c.delta_dt << "\n"
      << "delta_pd=" << c.delta_pd << "\n"
      << "d_max=" << c.d_max << "\n"
      << "d_max_pt=" << c.d_max_pt << "\n"
      << "lambda1=" << c.lambda1 << "\n"
      << "lambda2=" << c.lambda2 << "\n"
      << "census_window=" << c.census_window << "\n"
      << "lr_threshold=" << c.lr_threshold << "\n"
      << "superpixels=" << c.superpixels << "\n"
      << "compactness=" << c.compactness << "\n"
      << "slic_iterations=" << c.slic_iterations << "\n"
      << "hist_bin_width=" << c.hist_bin_width << "\n"
      << "tau_diag=" << c.tau_diag << "\n"
      << "border_margin=" << c.border_margin << "\n"
      << "min_superpixels=" << c.min_superpixels << "\n"
      << "connectivity=" << c.connectivity << "\n"
      << "roll_bracket=" << c.roll_bracket << "\n"
      << "roll_tol=" << c.roll_tol << "\n"
      << "focal=" << c.focal << "\n"
      << "baseline=" << c.baseline << "\n"
      << "cu=" << c.cu << "\n"
      << "cv=" << c.cv << "\n";
}

}  // namespace rpd
