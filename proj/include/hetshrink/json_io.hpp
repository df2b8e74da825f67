#ifndef HETSHRINK_JSON_IO_HPP
#define HETSHRINK_JSON_IO_HPP

#include "hetshrink/bounds.hpp"
#include "hetshrink/direction_solver.hpp"
#include "hetshrink/risk_eval.hpp"

#include <json.hpp>

// JSON forms of the domain types. Vectors are arrays, matrices are arrays of
// rows. from_json validates through the same factories as the C++ API.

namespace hetshrink {

using nlohmann::json;

inline json vector_to_json(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidArgument, "expected a JSON array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(vector_to_json(m.row(i).transpose()));
  return rows;
}

inline Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::InvalidArgument, "expected an array of rows");
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Vector r = vector_from_json(j[static_cast<std::size_t>(i)]);
    if (r.size() != cols) throw Error(ErrorCode::DimensionMismatch, "ragged matrix rows");
    m.row(i) = r.transpose();
  }
  return m;
}

inline void to_json(json& j, const ProblemSpec& s) {
  if (s.mode == ProblemSpec::Mode::Canonical) {
    j = json{{"mode", "Canonical"}, {"d", vector_to_json(s.d)}};
  } else {
    j = json{{"mode", "General"}, {"sigma", matrix_to_json(s.sigma)}, {"q", matrix_to_json(s.q)}};
  }
}

inline void from_json(const json& j, ProblemSpec& s) {
  const std::string mode = j.value("mode", std::string("Canonical"));
  if (mode == "Canonical") {
    s = ProblemSpec::canonical(vector_from_json(j.at("d")));
  } else if (mode == "General") {
    s = ProblemSpec::general(matrix_from_json(j.at("sigma")), matrix_from_json(j.at("q")));
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown problem mode '" + mode + "'");
  }
}

inline void to_json(json& j, const PriorSpec& p) {
  switch (p.tag) {
    case PriorSpec::Tag::Zero: j = json{{"tag", "Zero"}}; break;
    case PriorSpec::Tag::HomoscedasticInfinity: j = json{{"tag", "HomoscedasticInfinity"}}; break;
    case PriorSpec::Tag::Explicit: j = json{{"gamma", vector_to_json(p.gamma)}}; break;
  }
}

/// Accepts {"gamma": [...]}, {"tag": "Zero"|"HomoscedasticInfinity"} or the
/// bare tag string.
inline void from_json(const json& j, PriorSpec& p) {
  std::string tag;
  if (j.is_string()) {
    tag = j.get<std::string>();
  } else if (j.contains("gamma")) {
    p = PriorSpec::diagonal(vector_from_json(j.at("gamma")));
    return;
  } else {
    tag = j.at("tag").get<std::string>();
  }
  if (tag == "Zero") {
    p = PriorSpec::zero();
  } else if (tag == "HomoscedasticInfinity") {
    p = PriorSpec::homoscedastic_infinity();
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown prior tag '" + tag + "'");
  }
}

inline void to_json(json& j, const Direction& a) {
  if (a.is_diagonal()) {
    j = json{{"diag_a", vector_to_json(a.diag_a)}};
  } else {
    j = json{{"general_a", matrix_to_json(a.general_a)}};
  }
}

inline void from_json(const json& j, Direction& a) {
  if (j.contains("diag_a")) {
    a = Direction::diagonal(vector_from_json(j.at("diag_a")));
  } else {
    a = Direction::general(matrix_from_json(j.at("general_a")));
  }
}

inline const char* to_string(FactorVersion v) { return v == FactorVersion::Usual ? "Usual" : "Alternative"; }

inline FactorVersion factor_version_from_string(const std::string& s) {
  if (s == "Usual") return FactorVersion::Usual;
  if (s == "Alternative") return FactorVersion::Alternative;
  throw Error(ErrorCode::InvalidArgument, "unknown factor_version '" + s + "'");
}

inline void to_json(json& j, const EstimatorSpec& e) {
  j = json{{"kind", e.name()},
           {"parameters", e.parameters},
           {"prior", e.prior},
           {"factor_version", to_string(e.factor_version)}};
}

/// Accepts a full object or a bare registry name.
inline void from_json(const json& j, EstimatorSpec& e) {
  if (j.is_string()) {
    e = EstimatorSpec::make(kind_from_name(j.get<std::string>()));
    return;
  }
  std::map<std::string, double> params;
  if (j.contains("parameters")) params = j.at("parameters").get<std::map<std::string, double>>();
  PriorSpec prior = PriorSpec::zero();
  if (j.contains("prior")) prior = j.at("prior").get<PriorSpec>();
  e = EstimatorSpec::make(kind_from_name(j.at("kind").get<std::string>()),
                          factor_version_from_string(j.value("factor_version", std::string("Usual"))),
                          std::move(prior), std::move(params));
}

inline json to_json_value(const Estimate& e) {
  json j{{"value", vector_to_json(e.value)}};
  if (e.shrink_factors) j["shrink_factors"] = vector_to_json(*e.shrink_factors);
  json meta = json::object();
  for (const auto& [k, v] : e.meta) {
    if (std::isfinite(v)) {
      meta[k] = v;
    } else {
      meta[k] = v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    }
  }
  j["meta"] = meta;
  return j;
}

inline json to_json_value(const DirectionSolution& s) {
  std::vector<Index> perm(s.perm.begin(), s.perm.end());
  return json{{"a_dag", vector_to_json(s.a_dag)}, {"nu", s.nu},
              {"m_seq", vector_to_json(s.m_seq)}, {"c_star", s.c_star},
              {"perm", perm}, {"d_star", vector_to_json(s.d_star)}};
}

inline json to_json_value(const BoundReport& b) {
  return json{{"name", b.name}, {"value", b.value}, {"assumptions", b.assumptions}};
}

}  // namespace hetshrink

#endif  // HETSHRINK_JSON_IO_HPP
