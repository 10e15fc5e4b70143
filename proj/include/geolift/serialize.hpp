#pragma once

#include <string>

#include "geolift/probe.hpp"
#include "json.hpp"

namespace geolift {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Doubles are written as numbers when finite and as "inf", "-inf" or "nan"
/// otherwise, so every report re-parses exactly.
json number(double x);
double number_from(const json& j);

json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j);
json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

void to_json(json& j, const TangentVector& v);
void from_json(const json& j, TangentVector& v);
void to_json(json& j, const CausalCharacter& c);
void from_json(const json& j, CausalCharacter& c);
void to_json(json& j, const GeodesicPath& p);
void from_json(const json& j, GeodesicPath& p);
void to_json(json& j, const MaximalInterval& m);
void from_json(const json& j, MaximalInterval& m);
void to_json(json& j, const DexpMatrix& d);
void from_json(const json& j, DexpMatrix& d);
void to_json(json& j, const ConjugateReport& r);
void from_json(const json& j, ConjugateReport& r);
void to_json(json& j, const CausalConjugateReport& r);
void from_json(const json& j, CausalConjugateReport& r);
void to_json(json& j, const LiftResult& r);
void from_json(const json& j, LiftResult& r);
void to_json(json& j, const ConnectionResult& r);
void from_json(const json& j, ConnectionResult& r);
void to_json(json& j, const HomotopyGrid& g);
void from_json(const json& j, HomotopyGrid& g);
void to_json(json& j, const ProbeReport& r);
void from_json(const json& j, ProbeReport& r);
void to_json(json& j, const ConsistencyReport& r);
void from_json(const json& j, ConsistencyReport& r);

/// Drops all but the first and last lift samples (reports without --trace).
LiftResult without_trace(LiftResult r);

/// CSV projections of a task report. `kind` is one of geodesic, det, lift,
/// homotopy, connection. Throws ConfigError for incompatible reports.
std::string plot_csv(const json& report, const std::string& kind);

}  // namespace geolift
