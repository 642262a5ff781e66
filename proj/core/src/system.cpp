#include "qv/system.hpp"

#include <cmath>
#include <limits>

namespace qv {

namespace {

using nlohmann::json;

const char* smoothness_name(Smoothness s) {
  switch (s) {
    case Smoothness::C0: return "C0";
    case Smoothness::C1: return "C1";
    case Smoothness::C2: return "C2";
  }
  return "C2";
}

Smoothness smoothness_from_name(const std::string& s) {
  if (s == "C0") return Smoothness::C0;
  if (s == "C1") return Smoothness::C1;
  if (s == "C2") return Smoothness::C2;
  throw ConfigError("unknown smoothness class: " + s);
}

}  // namespace

SystemSpec::SystemSpec(Coefficient a, Coefficient b, Coefficient f, Coefficient sigma, double T,
                       double eps, std::optional<ThetaInterval> theta)
    : a_(std::move(a)),
      b_(std::move(b)),
      f_(std::move(f)),
      sigma_(std::move(sigma)),
      T_(T),
      eps_(eps),
      theta_(theta) {
  if (!(T_ > 0.0)) throw ConfigError("SystemSpec: horizon T must be positive");
  if (!(eps_ > 0.0) || eps_ > 1.0) throw ConfigError("SystemSpec: eps must lie in (0,1]");
  if (parametric()) {
    if (!theta_) throw ConfigError("SystemSpec: parametric coefficients need a theta interval");
    if (!(theta_->alpha < theta_->beta))
      throw ConfigError("SystemSpec: theta interval needs alpha < beta");
    if (theta_->truth && !(theta_->alpha < *theta_->truth && *theta_->truth < theta_->beta))
      throw ConfigError("SystemSpec: true theta must lie strictly inside (alpha, beta)");
  }
  // observation noise must be nondegenerate on the whole horizon
  const double th = theta_for_eval();
  const int probes = 200;
  for (int i = 0; i <= probes; ++i) {
    const double t = T_ * static_cast<double>(i) / probes;
    if (!(sigma_.at(th, t) > 0.0))
      throw ConfigError("SystemSpec: sigma(t) must be positive on [0, T]");
  }
}

bool SystemSpec::parametric() const {
  return a_.parametric() || b_.parametric() || f_.parametric() || sigma_.parametric();
}

double SystemSpec::theta0() const {
  if (!theta_ || !theta_->truth)
    throw PreconditionError("SystemSpec: operation requires the true theta to be set");
  return *theta_->truth;
}

double SystemSpec::theta_for_eval() const {
  if (!parametric()) return std::numeric_limits<double>::quiet_NaN();
  if (theta_ && theta_->truth) return *theta_->truth;
  // parametric without a truth value: midpoint keeps validation meaningful
  return theta_ ? 0.5 * (theta_->alpha + theta_->beta)
                : std::numeric_limits<double>::quiet_NaN();
}

SystemSpec SystemSpec::with_eps(double eps) const {
  return SystemSpec(a_, b_, f_, sigma_, T_, eps, theta_);
}

// ------------------------------ JSON ------------------------------

nlohmann::json to_json(const ScalarField& f) {
  json j;
  switch (f.family()) {
    case ScalarField::Family::Constant:
      j["family"] = "constant";
      j["value"] = f.params()[0];
      break;
    case ScalarField::Family::Linear:
      j["family"] = "linear";
      j["coeffs"] = f.params();
      break;
    case ScalarField::Family::Polynomial:
      j["family"] = "polynomial";
      j["coeffs"] = f.params();
      break;
    case ScalarField::Family::Sinusoid:
      j["family"] = "sinusoid";
      j["offset"] = f.params()[0];
      j["amplitude"] = f.params()[1];
      j["frequency"] = f.params()[2];
      j["phase"] = f.params()[3];
      break;
    case ScalarField::Family::Tabulated:
      j["family"] = "tabulated";
      j["knots"] = f.knots();
      j["values"] = f.values();
      j["smoothness"] = smoothness_name(f.smoothness());
      break;
  }
  return j;
}

nlohmann::json to_json(const ParamField& f) {
  json j;
  switch (f.family()) {
    case ParamField::Family::Scale:
      j["family"] = "scale";
      j["base"] = to_json(f.bases()[0]);
      break;
    case ParamField::Family::ShiftRoot:
      j["family"] = "shift_root";
      j["h"] = to_json(f.bases()[0]);
      j["g"] = to_json(f.bases()[1]);
      break;
    case ParamField::Family::ThetaPoly: {
      j["family"] = "theta_poly";
      json arr = json::array();
      for (const auto& c : f.bases()) arr.push_back(to_json(c));
      j["coeffs"] = arr;
      break;
    }
  }
  return j;
}

nlohmann::json to_json(const Coefficient& c) {
  return c.parametric() ? to_json(c.param()) : to_json(c.plain());
}

ScalarField scalar_field_from_json(const nlohmann::json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "constant") return ScalarField::constant(j.at("value").get<double>());
  if (family == "linear") {
    auto c = j.at("coeffs").get<std::vector<double>>();
    if (c.size() != 2) throw ConfigError("linear field needs exactly 2 coefficients");
    return ScalarField::linear(c[0], c[1]);
  }
  if (family == "polynomial")
    return ScalarField::polynomial(j.at("coeffs").get<std::vector<double>>());
  if (family == "sinusoid")
    return ScalarField::sinusoid(j.at("offset").get<double>(), j.at("amplitude").get<double>(),
                                 j.at("frequency").get<double>(), j.at("phase").get<double>());
  if (family == "tabulated") {
    Smoothness s = Smoothness::C2;
    if (j.contains("smoothness")) s = smoothness_from_name(j.at("smoothness").get<std::string>());
    return ScalarField::tabulated(j.at("knots").get<std::vector<double>>(),
                                  j.at("values").get<std::vector<double>>(), s);
  }
  throw ConfigError("unknown scalar field family: " + family);
}

Coefficient coefficient_from_json(const nlohmann::json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "scale") return ParamField::scale(scalar_field_from_json(j.at("base")));
  if (family == "shift_root")
    return ParamField::shift_root(scalar_field_from_json(j.at("h")),
                                  scalar_field_from_json(j.at("g")));
  if (family == "theta_poly") {
    std::vector<ScalarField> cs;
    for (const auto& c : j.at("coeffs")) cs.push_back(scalar_field_from_json(c));
    return ParamField::theta_poly(std::move(cs));
  }
  return scalar_field_from_json(j);
}

nlohmann::json to_json(const SystemSpec& s) {
  json j;
  j["a"] = to_json(s.a());
  j["b"] = to_json(s.b());
  j["f"] = to_json(s.f());
  j["sigma"] = to_json(s.sigma());
  j["T"] = s.T();
  j["eps"] = s.eps();
  if (s.theta()) {
    json t;
    t["alpha"] = s.theta()->alpha;
    t["beta"] = s.theta()->beta;
    if (s.theta()->truth) t["true"] = *s.theta()->truth;
    j["theta"] = t;
  }
  return j;
}

SystemSpec system_from_json(const nlohmann::json& j) {
  std::optional<ThetaInterval> theta;
  if (j.contains("theta")) {
    ThetaInterval t;
    t.alpha = j.at("theta").at("alpha").get<double>();
    t.beta = j.at("theta").at("beta").get<double>();
    if (j.at("theta").contains("true")) t.truth = j.at("theta").at("true").get<double>();
    theta = t;
  }
  return SystemSpec(coefficient_from_json(j.at("a")), coefficient_from_json(j.at("b")),
                    coefficient_from_json(j.at("f")), coefficient_from_json(j.at("sigma")),
                    j.at("T").get<double>(), j.at("eps").get<double>(), theta);
}

}  // namespace qv
