#ifndef RPD_CONFIG_HPP
#define RPD_CONFIG_HPP

#include <string>

namespace rpd {

// All pipeline constants. Loaded from a flat key=value file; keys match the
// field names below.
struct PipelineConfig {
  double delta_pt = 5.0;    // perspective-transform margin, px
  double delta_dt = 30.0;   // disparity-transform offset, px
  double delta_pd = 2.36;   // pothole threshold tolerance below road mean, px
  int d_max = 64;           // disparity search range for the bootstrap pass
  int d_max_pt = 16;        // search range after perspective transformation
  double lambda1 = 8.0;     // SGM penalty, |disparity step| = 1
  double lambda2 = 32.0;    // SGM penalty, |disparity step| > 1
  int census_window = 5;    // odd, in {3,5,7}
  double lr_threshold = 1.0;  // left-right consistency, px
  int superpixels = 1365;   // requested SLIC cluster count p
  double compactness = 8.0; // SLIC compactness m
  int slic_iterations = 10;
  double hist_bin_width = 0.25;  // 2D-histogram bin width, px
  double tau_diag = 3.0;    // off-diagonal exclusion band, px
  int border_margin = 5;    // px; components touching this band are discarded
  int min_superpixels = 2;  // components with fewer superpixels are fake
  int connectivity = 8;     // 4 or 8
  double roll_bracket = 0.261799;  // +-15 deg, rad
  double roll_tol = 1e-4;          // golden-section tolerance, rad
  double focal = 700.0;     // px
  double baseline = 0.12;   // m
  double cu = -1.0;         // principal point; <0 means image centre
  double cv = -1.0;

  void validate() const;  // throws std::invalid_argument on bad values
};

PipelineConfig load_config(const std::string& path);
void save_config(const PipelineConfig& c, const std::string& path);

// Parses "key=value" lines from text (used by load_config and CLI overrides).
void apply_key_value(PipelineConfig& c, const std::string& key, const std::string& value);

}  // namespace rpd

#endif
