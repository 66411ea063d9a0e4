#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bicons {

enum class Errc {
  NoSignChange,
  NoConvergence,
  ToleranceNotMet,
  DivergentIntegrand,
  OutOfRange,
  StencilOutOfDomain,
  DenominatorUnderflow,
  NonPositiveHeight,
  NonPositiveXi,
  NonPositiveKappa,
  OutOfDomain,
  TableNotFrozen,
  NegativeRadicand,
  RadicandNonPositive,
  ZeroCaseHasNoR,
  WrongCase,
  HyperboloidConstraintViolated,
  GlueMismatch,
  SelfIntersection,
  DegenerateSegment,
  DegenerateMetric,
  NormalUndefined,
  GradientTooSmall,
  CertificateFailed,
  IoError,
  NonFiniteVertex,
  BadConfig,
};

constexpr std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::NoSignChange: return "NoSignChange";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::ToleranceNotMet: return "ToleranceNotMet";
    case Errc::DivergentIntegrand: return "DivergentIntegrand";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::StencilOutOfDomain: return "StencilOutOfDomain";
    case Errc::DenominatorUnderflow: return "DenominatorUnderflow";
    case Errc::NonPositiveHeight: return "NonPositiveHeight";
    case Errc::NonPositiveXi: return "NonPositiveXi";
    case Errc::NonPositiveKappa: return "NonPositiveKappa";
    case Errc::OutOfDomain: return "OutOfDomain";
    case Errc::TableNotFrozen: return "TableNotFrozen";
    case Errc::NegativeRadicand: return "NegativeRadicand";
    case Errc::RadicandNonPositive: return "RadicandNonPositive";
    case Errc::ZeroCaseHasNoR: return "ZeroCaseHasNoR";
    case Errc::WrongCase: return "WrongCase";
    case Errc::HyperboloidConstraintViolated: return "HyperboloidConstraintViolated";
    case Errc::GlueMismatch: return "GlueMismatch";
    case Errc::SelfIntersection: return "SelfIntersection";
    case Errc::DegenerateSegment: return "DegenerateSegment";
    case Errc::DegenerateMetric: return "DegenerateMetric";
    case Errc::NormalUndefined: return "NormalUndefined";
    case Errc::GradientTooSmall: return "GradientTooSmall";
    case Errc::CertificateFailed: return "CertificateFailed";
    case Errc::IoError: return "IoError";
    case Errc::NonFiniteVertex: return "NonFiniteVertex";
    case Errc::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace bicons
