#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cogcap {

enum class Scheme { dpl, tpl };

std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view name);

/// Index into the secondary transmitter's three power levels.
enum class PowerLevel : int { p0 = 0, p1 = 1, p2 = 2 };

/// Physical and protocol constants for one primary/secondary link pair.
///
/// Powers are stored as spectral densities (W/Hz), so every SNR is formed
/// directly from these fields without multiplying by the bandwidth.
struct SystemParams {
  double frame_duration_s = 0.0;    // T
  double sensing_duration_s = 0.0;  // N
  double bandwidth_hz = 0.0;        // B
  double pu_prior = 0.0;            // probability the primary starts a new packet
  double detector_threshold = 0.0;  // energy detector threshold
  double noise_psd = 0.0;           // N0 = sigma_n^2
  double pu_signal_var = 1.0;       // primary interference power seen by the SU
  std::array<double, 3> su_power_psd{};  // P0/B, P1/B, P2/B
  double pu_power_psd = 0.0;             // P/B
  std::array<double, 3> su_rates_bps{};  // r0, r1, r2
  double pu_rate_bps = 0.0;
  double fading_pp = 0.0;       // exponential rate of |h_pp|^2
  double fading_sp = 0.0;       // exponential rate of |h_sp|^2
  double fading_ss_mean = 1.0;  // mean of the secondary link gain z
  double qos_exponent = 0.0;    // theta, 1/bits
  double feedback_miss_prob = 0.0;

  double su_power(PowerLevel level) const { return su_power_psd[static_cast<int>(level)]; }
  double su_rate(PowerLevel level) const { return su_rates_bps[static_cast<int>(level)]; }

  bool operator==(const SystemParams&) const = default;
};

/// Nominal operating point with P0/B = 0.1, r0 = 500 bps, sigma_sp^2 = 1,
/// sigma^2 = 1 and theta = 0.01.
SystemParams default_params();

struct ValidationOptions {
  /// Admit P0 == P1, the endpoint of a P0 sweep where TPL collapses to DPL.
  bool allow_p0_equal_p1 = false;
};

class ParamError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parameter set that has passed validate(). Downstream modules only
/// accept this type.
class ValidatedParams {
 public:
  const SystemParams& get() const { return params_; }
  const SystemParams* operator->() const { return &params_; }
  const SystemParams& operator*() const { return params_; }

 private:
  explicit ValidatedParams(const SystemParams& p) : params_(p) {}
  friend ValidatedParams validate(const SystemParams&, ValidationOptions);

  SystemParams params_;
};

/// Throws ParamError listing every violated invariant.
ValidatedParams validate(const SystemParams& params, ValidationOptions options = {});

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat JSON object, one key per SystemParams field. pu_signal_var and
// fading_ss_mean are optional and default to 1.
SystemParams params_from_json(std::string_view text, std::string_view source = "<string>");
std::string params_to_json(const SystemParams& params);

SystemParams load_config(const std::filesystem::path& path);
void save_config(const SystemParams& params, const std::filesystem::path& path);

}  // namespace cogcap
