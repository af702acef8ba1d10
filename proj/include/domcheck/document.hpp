#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "domcheck/certificate.hpp"
#include "domcheck/superoperator.hpp"

namespace domcheck {

using Json = nlohmann::ordered_json;

enum class DocumentKind { matrix, map, symbol, spectrum };

inline std::string to_string(DocumentKind k) {
  switch (k) {
    case DocumentKind::matrix: return "matrix";
    case DocumentKind::map: return "map";
    case DocumentKind::symbol: return "symbol";
    case DocumentKind::spectrum: return "spectrum";
  }
  return "matrix";
}

/// How a map document describes its map.
struct MapRepr {
  enum class Form { kraus, choi, builtin };
  Form form = Form::builtin;
  Eigen::Index dim_in = 0, dim_out = 0;
  std::vector<ComplexMatrix> kraus;
  ComplexMatrix choi;
  std::string builtin;
  std::map<std::string, ComplexMatrix> params;  // u, x or symbol
};

/// A validated input file: the payload fields that matter for `kind` are set.
struct DocumentEnvelope {
  DocumentKind kind = DocumentKind::matrix;
  ComplexMatrix matrix;  // matrix payload, or the symbol grid
  MapRepr map;
  RealVector spectrum;
  std::map<std::string, std::string> meta;

  SuperOperator to_map(const ToleranceConfig& tol = {}) const;
};

namespace doc_detail {

[[noreturn]] inline void schema(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::SchemaError, "field '" + field + "': " + what);
}

inline const Json& field(const Json& obj, const std::string& name, const std::string& path) {
  const auto it = obj.find(name);
  if (it == obj.end()) schema(path + name, "missing");
  return *it;
}

inline Eigen::Index dimension(const Json& obj, const std::string& name, const std::string& path) {
  const Json& v = field(obj, name, path);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 1) schema(path + name, "expected a positive integer");
  return v.get<Eigen::Index>();
}

inline Complex entry(const Json& e, const std::string& where) {
  if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
    schema(where, "complex entries are [re, im] pairs of numbers");
  return {e[0].get<double>(), e[1].get<double>()};
}

inline ComplexMatrix entries(const Json& data, Eigen::Index rows, Eigen::Index cols, const std::string& path) {
  if (!data.is_array()) schema(path, "expected an array of [re, im] pairs");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    schema(path, "expected " + std::to_string(rows * cols) + " entries, got " + std::to_string(data.size()));
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const auto k = static_cast<std::size_t>(i * cols + j);
      m(i, j) = entry(data[k], path + "[" + std::to_string(k) + "]");
    }
  return m;
}

/// {"rows", "cols", "data"}; "kind" may be present and must then be "matrix".
inline ComplexMatrix matrix_object(const Json& obj, const std::string& path) {
  if (!obj.is_object()) schema(path, "expected a matrix object");
  if (const auto it = obj.find("kind"); it != obj.end() && *it != "matrix") schema(path + "kind", "expected \"matrix\"");
  const auto rows = dimension(obj, "rows", path);
  const auto cols = dimension(obj, "cols", path);
  return entries(field(obj, "data", path), rows, cols, path + "data");
}

inline Json entries_json(const ComplexMatrix& m) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back({m(i, j).real(), m(i, j).imag()});
  return data;
}

inline std::optional<BuiltinKind> builtin_kind(const std::string& name) {
  for (auto k : {BuiltinKind::identity, BuiltinKind::transpose, BuiltinKind::trace_times_identity,
                 BuiltinKind::conjugation, BuiltinKind::multiplication, BuiltinKind::stormer_U,
                 BuiltinKind::stormer_V, BuiltinKind::stormer_W, BuiltinKind::symmetrization, BuiltinKind::schur})
    if (builtin_name(k) == name) return k;
  return std::nullopt;
}

inline const char* builtin_param(BuiltinKind k) {
  switch (k) {
    case BuiltinKind::conjugation: return "u";
    case BuiltinKind::multiplication: return "x";
    case BuiltinKind::schur: return "symbol";
    default: return nullptr;
  }
}

inline MapRepr map_payload(const Json& root) {
  MapRepr r;
  r.dim_in = dimension(root, "dim_in", "");
  r.dim_out = dimension(root, "dim_out", "");
  const Json& repr = field(root, "repr", "");
  if (!repr.is_object()) schema("repr", "expected an object");
  const int forms = static_cast<int>(repr.contains("kraus")) + repr.contains("choi") + repr.contains("builtin");
  if (forms != 1) schema("repr", "expected exactly one of kraus, choi, builtin");
  for (const auto& [key, _] : repr.items())
    if (key != "kraus" && key != "choi" && key != "builtin" && !(key == "params" && repr.contains("builtin")))
      schema("repr." + key, "unexpected field");
  if (repr.contains("kraus")) {
    r.form = MapRepr::Form::kraus;
    const Json& list = repr["kraus"];
    if (!list.is_array() || list.empty()) schema("repr.kraus", "expected a non-empty array of matrices");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string path = "repr.kraus[" + std::to_string(k) + "].";
      ComplexMatrix m = matrix_object(list[k], path);
      if (m.rows() != r.dim_out || m.cols() != r.dim_in) schema(path + "rows", "Kraus operators are dim_out x dim_in");
      r.kraus.push_back(std::move(m));
    }
  } else if (repr.contains("choi")) {
    r.form = MapRepr::Form::choi;
    r.choi = matrix_object(repr["choi"], "repr.choi.");
    const Eigen::Index d = r.dim_in * r.dim_out;
    if (r.choi.rows() != d || r.choi.cols() != d)
      schema("repr.choi.rows", "Choi matrix must be " + std::to_string(d) + " x " + std::to_string(d));
  } else if (repr.contains("builtin")) {
    r.form = MapRepr::Form::builtin;
    if (!repr["builtin"].is_string()) schema("repr.builtin", "expected a builtin name");
    r.builtin = repr["builtin"].get<std::string>();
    const auto kind = builtin_kind(r.builtin);
    if (!kind) schema("repr.builtin", "unknown builtin '" + r.builtin + "'");
    const Json params = repr.value("params", Json::object());
    if (!params.is_object()) schema("repr.params", "expected an object");
    for (const auto& [key, value] : params.items())
      r.params[key] = matrix_object(value, "repr.params." + key + ".");
    const char* needed = builtin_param(*kind);
    for (const auto& [key, _] : r.params)
      if (!needed || key != needed) schema("repr.params." + key, "not a parameter of " + r.builtin);
    if (needed && !r.params.count(needed)) schema(std::string("repr.params.") + needed, "missing");
  } else {
    schema("repr", "expected one of kraus, choi, builtin");
  }
  return r;
}

inline std::pair<std::size_t, std::size_t> line_and_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace doc_detail

/// Parses and validates a JSON document; the result is ready for computation.
inline DocumentEnvelope parse_document(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = doc_detail::line_and_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line) + ", position " + std::to_string(col) + ": " + e.what());
  }
  using doc_detail::schema;
  if (!root.is_object()) schema("(root)", "expected an object");
  const Json& kind = doc_detail::field(root, "kind", "");
  DocumentEnvelope d;
  if (kind == "matrix") {
    d.kind = DocumentKind::matrix;
    d.matrix = doc_detail::matrix_object(root, "");
  } else if (kind == "symbol") {
    d.kind = DocumentKind::symbol;
    const auto n = doc_detail::dimension(root, "n", "");
    d.matrix = doc_detail::entries(doc_detail::field(root, "data", ""), n, n, "data");
  } else if (kind == "spectrum") {
    d.kind = DocumentKind::spectrum;
    const Json& values = doc_detail::field(root, "values", "");
    if (!values.is_array()) schema("values", "expected an array of non-negative numbers");
    d.spectrum.resize(static_cast<Eigen::Index>(values.size()));
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (!values[k].is_number() || values[k].get<double>() < 0)
        schema("values[" + std::to_string(k) + "]", "expected a non-negative number");
      d.spectrum(static_cast<Eigen::Index>(k)) = values[k].get<double>();
    }
  } else if (kind == "map") {
    d.kind = DocumentKind::map;
    d.map = doc_detail::map_payload(root);
  } else {
    schema("kind", "expected matrix, map, symbol or spectrum");
  }
  if (const auto it = root.find("meta"); it != root.end()) {
    if (!it->is_object()) schema("meta", "expected an object of strings");
    for (const auto& [key, value] : it->items()) {
      if (!value.is_string()) schema("meta." + key, "expected a string");
      d.meta[key] = value.get<std::string>();
    }
  }
  return d;
}

inline Json matrix_json(const ComplexMatrix& m) {
  Json j;
  j["kind"] = "matrix";
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = doc_detail::entries_json(m);
  return j;
}

inline Json to_json(const DocumentEnvelope& d) {
  Json j;
  switch (d.kind) {
    case DocumentKind::matrix:
      j = matrix_json(d.matrix);
      break;
    case DocumentKind::symbol:
      j["kind"] = "symbol";
      j["n"] = d.matrix.rows();
      j["data"] = doc_detail::entries_json(d.matrix);
      break;
    case DocumentKind::spectrum:
      j["kind"] = "spectrum";
      j["values"] = std::vector<double>(d.spectrum.data(), d.spectrum.data() + d.spectrum.size());
      break;
    case DocumentKind::map: {
      j["kind"] = "map";
      j["dim_in"] = d.map.dim_in;
      j["dim_out"] = d.map.dim_out;
      Json repr;
      if (d.map.form == MapRepr::Form::kraus) {
        repr["kraus"] = Json::array();
        for (const auto& k : d.map.kraus) repr["kraus"].push_back(matrix_json(k));
      } else if (d.map.form == MapRepr::Form::choi) {
        repr["choi"] = matrix_json(d.map.choi);
      } else {
        repr["builtin"] = d.map.builtin;
        if (!d.map.params.empty()) {
          Json params = Json::object();
          for (const auto& [key, m] : d.map.params) params[key] = matrix_json(m);
          repr["params"] = params;
        }
      }
      j["repr"] = repr;
      break;
    }
  }
  if (!d.meta.empty()) j["meta"] = d.meta;
  return j;
}

/// Canonical text; parse_document(serialize(d)) reproduces d entry for entry.
inline std::string serialize(const DocumentEnvelope& d) { return to_json(d).dump(2) + "\n"; }

inline DocumentEnvelope matrix_document(const ComplexMatrix& m) {
  DocumentEnvelope d;
  d.kind = DocumentKind::matrix;
  d.matrix = m;
  return d;
}

inline DocumentEnvelope symbol_document(const ComplexMatrix& m) {
  DocumentEnvelope d = matrix_document(m);
  d.kind = DocumentKind::symbol;
  return d;
}

inline DocumentEnvelope choi_document(const SuperOperator& t) {
  DocumentEnvelope d;
  d.kind = DocumentKind::map;
  d.map.form = MapRepr::Form::choi;
  d.map.dim_in = t.dim_in();
  d.map.dim_out = t.dim_out();
  d.map.choi = t.choi();
  return d;
}

inline SuperOperator DocumentEnvelope::to_map(const ToleranceConfig& tol) const {
  if (kind != DocumentKind::map) doc_detail::schema("kind", "expected a map document, got " + to_string(kind));
  switch (map.form) {
    case MapRepr::Form::kraus:
      return SuperOperator::from_kraus(map.kraus, tol);
    case MapRepr::Form::choi:
      return SuperOperator::from_choi(map.choi, map.dim_in, map.dim_out, tol);
    case MapRepr::Form::builtin: break;
  }
  const BuiltinKind k = *doc_detail::builtin_kind(map.builtin);
  const char* p = doc_detail::builtin_param(k);
  const ComplexMatrix param = p ? map.params.at(p) : ComplexMatrix();
  if (p && (param.rows() != param.cols()))
    doc_detail::schema(std::string("repr.params.") + p, "expected a square matrix");
  SuperOperator t = SuperOperator::builtin(k, map.dim_in, param);
  if (t.dim_in() != map.dim_in) doc_detail::schema("dim_in", map.builtin + " acts on M_" + std::to_string(t.dim_in()));
  if (t.dim_out() != map.dim_out)
    doc_detail::schema("dim_out", map.builtin + " acts on M_" + std::to_string(t.dim_out()));
  return t;
}

inline Json certificate_json(const Certificate& c) {
  Json j;
  j["kind"] = std::string(to_string(c.kind));
  j["value"] = c.value;
  j["budget"] = c.budget;
  j["note"] = c.note;
  j["vectors"] = Json::array();
  for (const auto& v : c.vectors) j["vectors"].push_back(doc_detail::entries_json(v));
  j["matrices"] = Json::array();
  for (const auto& m : c.matrices) j["matrices"].push_back(matrix_json(m));
  return j;
}

}  // namespace domcheck
