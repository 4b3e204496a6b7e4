#include "cogcap/params.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace cogcap {

namespace {

using ordered_json = nlohmann::ordered_json;

bool finite(double v) { return std::isfinite(v); }

void require(std::vector<std::string>& out, bool ok, const std::string& what) {
  if (!ok) out.push_back(what);
}

const std::set<std::string, std::less<>>& known_keys() {
  static const std::set<std::string, std::less<>> keys = {
      "frame_duration_s", "sensing_duration_s", "bandwidth_hz", "pu_prior",
      "detector_threshold", "noise_psd", "pu_signal_var", "su_power_psd",
      "pu_power_psd", "su_rates_bps", "pu_rate_bps", "fading_pp", "fading_sp",
      "fading_ss_mean", "qos_exponent", "feedback_miss_prob"};
  return keys;
}

double read_number(const ordered_json& obj, const std::string& key, std::string_view source) {
  const auto it = obj.find(key);
  if (it == obj.end())
    throw ConfigError(std::string(source) + ": missing required key '" + key + "'");
  if (!it->is_number())
    throw ConfigError(std::string(source) + ": key '" + key + "' must be a number, got " +
                      it->type_name());
  return it->get<double>();
}

double read_number_or(const ordered_json& obj, const std::string& key, double fallback,
                      std::string_view source) {
  return obj.contains(key) ? read_number(obj, key, source) : fallback;
}

std::array<double, 3> read_triple(const ordered_json& obj, const std::string& key,
                                  std::string_view source) {
  const auto it = obj.find(key);
  if (it == obj.end())
    throw ConfigError(std::string(source) + ": missing required key '" + key + "'");
  if (!it->is_array() || it->size() != 3)
    throw ConfigError(std::string(source) + ": key '" + key +
                      "' must be an array of three numbers [level0, level1, level2]");
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(*it)[i].is_number())
      throw ConfigError(std::string(source) + ": key '" + key + "[" + std::to_string(i) +
                        "]' must be a number");
    out[i] = (*it)[i].get<double>();
  }
  return out;
}

}  // namespace

std::string_view to_string(Scheme scheme) {
  return scheme == Scheme::dpl ? "DPL" : "TPL";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "DPL" || name == "dpl") return Scheme::dpl;
  if (name == "TPL" || name == "tpl") return Scheme::tpl;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "' (expected DPL or TPL)");
}

SystemParams default_params() {
  SystemParams p;
  p.frame_duration_s = 0.01;
  p.sensing_duration_s = 0.003;
  p.bandwidth_hz = 1e5;
  p.pu_prior = 0.1;
  p.detector_threshold = 1.85;
  p.noise_psd = 1.0;
  p.pu_signal_var = 1.0;
  p.su_power_psd = {0.1, 0.25, 1.0};
  p.pu_power_psd = 100.0;
  p.su_rates_bps = {500.0, 1000.0, 2000.0};
  p.pu_rate_bps = 1e5;
  p.fading_pp = 0.1;
  p.fading_sp = 0.1;
  p.fading_ss_mean = 1.0;
  p.qos_exponent = 0.01;
  p.feedback_miss_prob = 0.3;
  return p;
}

ValidatedParams validate(const SystemParams& p, ValidationOptions options) {
  std::vector<std::string> bad;

  const double values[] = {p.frame_duration_s, p.sensing_duration_s, p.bandwidth_hz,
                           p.pu_prior, p.detector_threshold, p.noise_psd, p.pu_signal_var,
                           p.su_power_psd[0], p.su_power_psd[1], p.su_power_psd[2],
                           p.pu_power_psd, p.su_rates_bps[0], p.su_rates_bps[1],
                           p.su_rates_bps[2], p.pu_rate_bps, p.fading_pp, p.fading_sp,
                           p.fading_ss_mean, p.qos_exponent, p.feedback_miss_prob};
  bool all_finite = true;
  for (double v : values) all_finite = all_finite && finite(v);
  require(bad, all_finite, "all parameters must be finite numbers");

  require(bad, p.sensing_duration_s > 0.0, "sensing_duration_s > 0");
  require(bad, p.sensing_duration_s < p.frame_duration_s,
          "sensing_duration_s < frame_duration_s");
  require(bad, p.bandwidth_hz > 0.0, "bandwidth_hz > 0");
  require(bad, p.pu_prior >= 0.0 && p.pu_prior <= 1.0, "0 <= pu_prior <= 1");
  require(bad, p.feedback_miss_prob >= 0.0 && p.feedback_miss_prob <= 1.0,
          "0 <= feedback_miss_prob <= 1");
  require(bad, p.qos_exponent >= 0.0, "qos_exponent >= 0");
  require(bad, p.detector_threshold >= 0.0, "detector_threshold >= 0");
  require(bad, p.noise_psd > 0.0, "noise_psd > 0");
  require(bad, p.pu_signal_var >= 0.0, "pu_signal_var >= 0");
  require(bad, p.pu_power_psd > 0.0, "pu_power_psd > 0");
  require(bad, p.pu_rate_bps > 0.0, "pu_rate_bps > 0");
  require(bad, p.fading_pp > 0.0, "fading_pp > 0");
  require(bad, p.fading_sp > 0.0, "fading_sp > 0");
  require(bad, p.fading_ss_mean > 0.0, "fading_ss_mean > 0");
  for (int i = 0; i < 3; ++i)
    require(bad, p.su_rates_bps[i] > 0.0, "su_rates_bps[" + std::to_string(i) + "] > 0");

  const auto& pw = p.su_power_psd;
  require(bad, pw[0] >= 0.0, "su_power_psd[0] >= 0");
  if (options.allow_p0_equal_p1)
    require(bad, pw[0] <= pw[1], "su_power_psd[0] <= su_power_psd[1]");
  else
    require(bad, pw[0] < pw[1], "su_power_psd[0] < su_power_psd[1]");
  require(bad, pw[1] < pw[2], "su_power_psd[1] < su_power_psd[2]");

  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "invalid parameters: violated ";
    for (std::size_t i = 0; i < bad.size(); ++i) msg << (i ? "; " : "") << bad[i];
    throw ParamError(msg.str());
  }
  return ValidatedParams(p);
}

SystemParams params_from_json(std::string_view text, std::string_view source) {
  ordered_json obj;
  try {
    obj = ordered_json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string(source) + ": " + e.what());
  }
  if (!obj.is_object())
    throw ConfigError(std::string(source) + ": top-level value must be an object");
  for (const auto& item : obj.items()) {
    if (!known_keys().contains(item.key()))
      throw ConfigError(std::string(source) + ": unknown key '" + item.key() + "'");
  }

  SystemParams p;
  p.frame_duration_s = read_number(obj, "frame_duration_s", source);
  p.sensing_duration_s = read_number(obj, "sensing_duration_s", source);
  p.bandwidth_hz = read_number(obj, "bandwidth_hz", source);
  p.pu_prior = read_number(obj, "pu_prior", source);
  p.detector_threshold = read_number(obj, "detector_threshold", source);
  p.noise_psd = read_number(obj, "noise_psd", source);
  p.pu_signal_var = read_number_or(obj, "pu_signal_var", 1.0, source);
  p.su_power_psd = read_triple(obj, "su_power_psd", source);
  p.pu_power_psd = read_number(obj, "pu_power_psd", source);
  p.su_rates_bps = read_triple(obj, "su_rates_bps", source);
  p.pu_rate_bps = read_number(obj, "pu_rate_bps", source);
  p.fading_pp = read_number(obj, "fading_pp", source);
  p.fading_sp = read_number(obj, "fading_sp", source);
  p.fading_ss_mean = read_number_or(obj, "fading_ss_mean", 1.0, source);
  p.qos_exponent = read_number(obj, "qos_exponent", source);
  p.feedback_miss_prob = read_number(obj, "feedback_miss_prob", source);
  return p;
}

std::string params_to_json(const SystemParams& p) {
  ordered_json obj;
  obj["frame_duration_s"] = p.frame_duration_s;
  obj["sensing_duration_s"] = p.sensing_duration_s;
  obj["bandwidth_hz"] = p.bandwidth_hz;
  obj["pu_prior"] = p.pu_prior;
  obj["detector_threshold"] = p.detector_threshold;
  obj["noise_psd"] = p.noise_psd;
  obj["pu_signal_var"] = p.pu_signal_var;
  obj["su_power_psd"] = p.su_power_psd;
  obj["pu_power_psd"] = p.pu_power_psd;
  obj["su_rates_bps"] = p.su_rates_bps;
  obj["pu_rate_bps"] = p.pu_rate_bps;
  obj["fading_pp"] = p.fading_pp;
  obj["fading_sp"] = p.fading_sp;
  obj["fading_ss_mean"] = p.fading_ss_mean;
  obj["qos_exponent"] = p.qos_exponent;
  obj["feedback_miss_prob"] = p.feedback_miss_prob;
  return obj.dump(2) + "\n";
}

SystemParams load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return params_from_json(buf.str(), path.string());
}

void save_config(const SystemParams& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path.string() + ": cannot open for writing");
  out << params_to_json(params);
  if (!out) throw ConfigError(path.string() + ": write failed");
}

}  // namespace cogcap
