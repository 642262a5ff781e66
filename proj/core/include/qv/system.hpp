#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "qv/fields.hpp"

namespace qv {

struct ThetaInterval {
  double alpha = 0.0;
  double beta = 0.0;
  std::optional<double> truth;  // theta_0, when known (simulation / oracles)
};

/// Full description of the partially observed pair
///   dY = -a(t) Y dt + b(t) dV,          Y_0 = 0
///   dX =  f(t) Y dt + eps sigma(t) dW,  X_0 = 0
/// on [0, T], with any of a, b, f, sigma optionally theta-parameterized.
class SystemSpec {
 public:
  SystemSpec(Coefficient a, Coefficient b, Coefficient f, Coefficient sigma, double T,
             double eps, std::optional<ThetaInterval> theta = std::nullopt);

  const Coefficient& a() const { return a_; }
  const Coefficient& b() const { return b_; }
  const Coefficient& f() const { return f_; }
  const Coefficient& sigma() const { return sigma_; }
  double T() const { return T_; }
  double eps() const { return eps_; }

  bool parametric() const;
  const std::optional<ThetaInterval>& theta() const { return theta_; }
  /// True theta for simulation/oracles; throws if the spec does not carry one.
  double theta0() const;
  /// theta0() for parametric specs, NaN otherwise (plain fields ignore it).
  double theta_for_eval() const;

  /// Copy with a different observation noise scale (Monte Carlo sweeps).
  SystemSpec with_eps(double eps) const;

 private:
  Coefficient a_, b_, f_, sigma_;
  double T_;
  double eps_;
  std::optional<ThetaInterval> theta_;
};

// ---- JSON (document schema used by config files and the CLI) ----

nlohmann::json to_json(const ScalarField& f);
nlohmann::json to_json(const ParamField& f);
nlohmann::json to_json(const Coefficient& c);
nlohmann::json to_json(const SystemSpec& s);

ScalarField scalar_field_from_json(const nlohmann::json& j);
Coefficient coefficient_from_json(const nlohmann::json& j);
SystemSpec system_from_json(const nlohmann::json& j);

}  // namespace qv
