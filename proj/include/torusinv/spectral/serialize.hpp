#pragma once

#include <json.hpp>

#include "torusinv/spectral/field.hpp"

namespace torusinv::spectral {

/// {dim, resolution, components, coeffs: [[re, im], ...]} with coefficients in
/// mode-enumeration order, components interleaved per mode. Doubles are
/// written in shortest round-trip form, so the round trip is bit-exact.
inline nlohmann::json to_json(const SpectralField& u) {
  nlohmann::json j;
  j["dim"] = u.dim();
  j["resolution"] = u.resolution();
  j["components"] = u.components();
  auto coeffs = nlohmann::json::array();
  for (const auto& m : mode_table(u.dim(), u.resolution())) {
    for (int c = 0; c < u.components(); ++c) {
      const Complex z = u(m.k, c);
      coeffs.push_back({z.real(), z.imag()});
    }
  }
  j["coeffs"] = std::move(coeffs);
  return j;
}

inline SpectralField field_from_json(const nlohmann::json& j) {
  SpectralField u(j.at("dim").get<int>(), j.at("resolution").get<int>(),
                  j.at("components").get<int>());
  const auto& coeffs = j.at("coeffs");
  const auto& modes = mode_table(u.dim(), u.resolution());
  if (coeffs.size() != modes.size() * static_cast<std::size_t>(u.components()))
    throw ConfigError("field JSON: expected " +
                      std::to_string(modes.size() * u.components()) + " coefficients, got " +
                      std::to_string(coeffs.size()));
  std::size_t i = 0;
  for (const auto& m : modes) {
    for (int c = 0; c < u.components(); ++c, ++i)
      u(m.k, c) = Complex{coeffs[i].at(0).get<double>(), coeffs[i].at(1).get<double>()};
  }
  return u;
}

}  // namespace torusinv::spectral
