#include "cyclesync/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "cyclesync/errors.hpp"

namespace cyclesync {

namespace {

constexpr const char* kFormatTag = "cyclesync-checkpoint-v1";

nlohmann::json channel_to_json(const std::vector<double>& v) {
  return nlohmann::json(v);
}

std::vector<double> channel_from_json(const nlohmann::json& j,
                                      const char* name) {
  if (!j.is_array()) {
    fail(errc::bad_checkpoint, std::string("field '") + name + "' is not an array");
  }
  return j.get<std::vector<double>>();
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  const ModelSizes sizes = ckpt.model.sizes();
  const Vector theta = ckpt.model.flatten();

  nlohmann::ordered_json j;
  j["format"] = kFormatTag;
  j["sizes"] = {{"input", sizes.input},
                {"hidden1", sizes.hidden1},
                {"hidden2", sizes.hidden2},
                {"dense", sizes.dense}};
  j["parameters"] = std::vector<double>(theta.data(), theta.data() + theta.size());
  j["sync"] = {
      {"battery_id", ckpt.meta.battery_id},
      {"reference_cycle_id", ckpt.meta.reference_cycle_id},
      {"rows", ckpt.meta.rows},
      {"scale_features", ckpt.meta.scale_features},
      {"radius", ckpt.meta.radius},
      {"reference_temperature_c", channel_to_json(ckpt.meta.reference_temperature_c)},
      {"reference_current_a", channel_to_json(ckpt.meta.reference_current_a)},
      {"reference_voltage_v", channel_to_json(ckpt.meta.reference_voltage_v)},
  };

  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(errc::io_error, "cannot open '" + path + "' for writing");
  }
  out << j.dump() << '\n';
  if (!out) {
    fail(errc::io_error, "write to '" + path + "' failed");
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(errc::io_error, "cannot open '" + path + "'");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::bad_checkpoint, "'" + path + "' is not valid JSON: " + e.what());
  }

  try {
    if (j.at("format").get<std::string>() != kFormatTag) {
      fail(errc::bad_checkpoint,
           "'" + path + "' has unsupported format tag '" +
               j.at("format").get<std::string>() + "'");
    }
    ModelSizes sizes;
    sizes.input = j.at("sizes").at("input").get<int>();
    sizes.hidden1 = j.at("sizes").at("hidden1").get<int>();
    sizes.hidden2 = j.at("sizes").at("hidden2").get<int>();
    sizes.dense = j.at("sizes").at("dense").get<int>();
    if (sizes.input <= 0 || sizes.hidden1 <= 0 || sizes.hidden2 <= 0 ||
        sizes.dense <= 0) {
      fail(errc::bad_checkpoint, "'" + path + "' has non-positive layer sizes");
    }

    Checkpoint ckpt;
    ckpt.model = make_model(sizes, 0);
    const auto& params = j.at("parameters");
    if (!params.is_array() ||
        static_cast<Eigen::Index>(params.size()) != ckpt.model.parameter_count()) {
      fail(errc::bad_checkpoint,
           "'" + path + "' holds " + std::to_string(params.size()) +
               " parameters, expected " +
               std::to_string(ckpt.model.parameter_count()));
    }
    Vector theta(ckpt.model.parameter_count());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      theta[i] = params[static_cast<std::size_t>(i)].get<double>();
    }
    ckpt.model.unflatten(theta);

    const auto& s = j.at("sync");
    ckpt.meta.battery_id = s.at("battery_id").get<std::string>();
    ckpt.meta.reference_cycle_id = s.at("reference_cycle_id").get<int>();
    ckpt.meta.rows = s.at("rows").get<int>();
    ckpt.meta.scale_features = s.at("scale_features").get<bool>();
    ckpt.meta.radius = s.at("radius").get<int>();
    ckpt.meta.reference_temperature_c =
        channel_from_json(s.at("reference_temperature_c"), "reference_temperature_c");
    ckpt.meta.reference_current_a =
        channel_from_json(s.at("reference_current_a"), "reference_current_a");
    ckpt.meta.reference_voltage_v =
        channel_from_json(s.at("reference_voltage_v"), "reference_voltage_v");

    if (ckpt.meta.rows < 2) {
      fail(errc::bad_checkpoint, "'" + path + "' has an aligned length below 2");
    }
    const std::size_t rows = static_cast<std::size_t>(ckpt.meta.rows);
    if (ckpt.meta.reference_temperature_c.size() != rows ||
        ckpt.meta.reference_current_a.size() != rows ||
        ckpt.meta.reference_voltage_v.size() != rows) {
      fail(errc::bad_checkpoint,
           "'" + path + "' reference channels do not match the aligned length");
    }
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::bad_checkpoint, "'" + path + "' is missing fields: " + e.what());
  }
}

}  // namespace cyclesync
