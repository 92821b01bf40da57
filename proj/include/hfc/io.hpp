#pragma once

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "hfc/contour_calculus.hpp"
#include "hfc/dilation.hpp"
#include "hfc/quadrature.hpp"

namespace hfc::io {

using json = nlohmann::json;

/// Sorted keys, doubles with 17 significant digits, no whitespace beyond a
/// trailing newline. Parsing and re-emitting is byte-identical.
std::string canonical_dump(const json& j);

/// 64-bit FNV-1a of the canonical form, as 16 hex digits.
std::string digest(const json& j);

/// Throws SchemaError unless `j` is an object whose keys are all listed and
/// which contains every required key.
void expect_keys(const json& j, std::initializer_list<const char*> required,
                 std::initializer_list<const char*> optional, const std::string& context);

double get_double(const json& j, const char* key, const std::string& context);
int get_int(const json& j, const char* key, const std::string& context);

Complex complex_from_json(const json& j, const std::string& context);
json to_json(Complex z);

/// Row-major array of rows; entries are [re, im] pairs or plain reals.
Matrix matrix_from_json(const json& j, const std::string& context = "matrix");
json to_json(const Matrix& A);
Vector vector_from_json(const json& j, const std::string& context = "vector");
json to_json(const Vector& x);

SpaceModel space_from_json(const json& j);
json to_json(const SpaceModel& s);

CommutingTuple tuple_from_json(const json& j);
json to_json(const CommutingTuple& t);

DecayCertificate certificate_from_json(const json& j, int d);
json to_json(const DecayCertificate& c);

/// Function AST (coordinates 1-based, as in certificates).
SectorFunction ast_from_json(const json& j, const std::string& context = "function");
json ast_to_json(const ast::Node& node);

/// {"ast": ..., "arity"?, "domain"?, "certificate"?} or a preset
/// {"preset": "phi_m" | "phi_m_tensor" | "power_exp" | "power_exp_tensor" | "sigma_k", ...}.
/// AST functions without a certificate are certified by sampling with
/// exponent 1/4 on the coordinates they use; given certificates are
/// verified.
SectorFunction function_from_json(const json& j, int d);
json to_json(const SectorFunction& f);

/// {"constant": [re, im], "components": [function, ...]} or a single function.
H01Form h01_from_json(const json& j, int d);

LogGrid log_grid_from_json(const json& j);
json to_json(const LogGrid& g);
LineGrid line_grid_from_json(const json& j, int d);
SampledKernel kernel_from_json(const json& j);
json to_json(const SampledKernel& k);
GroupTuple group_from_json(const json& j);
EnsembleOptions ensemble_from_json(const json& j, std::uint64_t seed);

}  // namespace hfc::io
