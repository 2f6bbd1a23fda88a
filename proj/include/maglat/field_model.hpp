#pragma once

// Runtime choice between the analytic and magnetostatic field models.

#include <string>
#include <string_view>
#include <variant>

#include "maglat/analytic_field.hpp"
#include "maglat/magnetostatics.hpp"

namespace maglat {

enum class FieldModelKind { analytic_corrected, analytic_verbatim, magnetostatic };

inline std::string to_string(FieldModelKind k) {
  switch (k) {
    case FieldModelKind::analytic_corrected: return "analytic-corrected";
    case FieldModelKind::analytic_verbatim: return "analytic-verbatim";
    case FieldModelKind::magnetostatic: return "magnetostatic";
  }
  return "unknown";
}

inline FieldModelKind parse_field_model(std::string_view s) {
  if (s == "analytic-corrected") return FieldModelKind::analytic_corrected;
  if (s == "analytic-verbatim") return FieldModelKind::analytic_verbatim;
  if (s == "magnetostatic") return FieldModelKind::magnetostatic;
  throw ConfigError("unknown field model '" + std::string(s) + "'");
}

class AnyField {
 public:
  AnyField(FieldModelKind kind, const LatticeSpec& spec, const BiasField& bias)
      : impl_(make(kind, spec, bias)) {}

  double length_scale() const {
    return std::visit([](const auto& f) { return f.length_scale(); }, impl_);
  }
  BVector field(const Vec3& p) const {
    return std::visit([&](const auto& f) { return BVector(f.field(p)); }, impl_);
  }
  Mat3 jacobian(const Vec3& p) const {
    return std::visit([&](const auto& f) { return Mat3(f.jacobian(p)); }, impl_);
  }
  bool has_second_derivatives() const {
    const auto* a = std::get_if<AnalyticField>(&impl_);
    return a && a->has_second_derivatives();
  }
  std::array<Mat3, 3> second_derivatives(const Vec3& p) const {
    const auto* a = std::get_if<AnalyticField>(&impl_);
    if (!a) throw DomainError("second derivatives are not available for this model");
    return a->second_derivatives(p);
  }

 private:
  using Impl = std::variant<AnalyticField, PerforatedFilmField>;
  static Impl make(FieldModelKind kind, const LatticeSpec& spec, const BiasField& bias) {
    switch (kind) {
      case FieldModelKind::analytic_corrected:
        return AnalyticField(spec, bias, EquationMode::corrected);
      case FieldModelKind::analytic_verbatim:
        return AnalyticField(spec, bias, EquationMode::verbatim);
      case FieldModelKind::magnetostatic:
        return PerforatedFilmField(spec, bias);
    }
    throw ConfigError("unknown field model");
  }
  Impl impl_;
};

}  // namespace maglat
