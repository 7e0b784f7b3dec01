#pragma once

// Named verification campaigns: each one runs a family of checks at pinned
// tolerances and returns machine-readable verdicts.  The CLI wraps these
// into report.json + CSV files; the acceptance suite prints one line per
// criterion.

#include <cstdint>
#include <string>
#include <vector>

namespace sl2c {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;     // measured quantity (slope, residual, ...)
  double expected = 0.0;  // target
  double tol = 0.0;       // tolerance used
  std::string detail;     // free-form context
};

struct CsvTable {
  std::string name;                      // file stem
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct CampaignOutput {
  std::vector<CheckResult> checks;
  std::vector<CsvTable> tables;
};

struct CampaignConfig {
  std::string field = "real";     // real | complex
  std::string campaign = "all";   // decompose charts haar spherical convolve average intertwine decay all
  std::string out_dir;
  std::uint64_t seed = 20260809;
  int level_lo = 6;
  int level_hi = 20;
  int angular = 64;
  int n_axis = 128;
  double tolerance = 1e-8;        // quadrature self-consistency gate

  void validate() const;
};

/// Run one campaign; aggregates the per-check verdicts.
CampaignOutput run_campaign(const CampaignConfig& cfg);

/// Individual campaign bodies (field-dispatching where applicable).
CampaignOutput campaign_decompose(const CampaignConfig&);
CampaignOutput campaign_charts(const CampaignConfig&);
CampaignOutput campaign_haar(const CampaignConfig&);
CampaignOutput campaign_spherical(const CampaignConfig&);
CampaignOutput campaign_convolve(const CampaignConfig&);
CampaignOutput campaign_average(const CampaignConfig&);
CampaignOutput campaign_intertwine(const CampaignConfig&);
CampaignOutput campaign_decay(const CampaignConfig&);

}  // namespace sl2c
