#include "qmarkov/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qmarkov::io {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ModelParseError(path + ": " + message);
}

double require_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

Index require_positive_int(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long>() < 1) fail(path, "expected a positive integer");
  return static_cast<Index>(j.get<long>());
}

const json& require_field(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) fail(path.empty() ? key : path + "." + key, "missing field");
  return j.at(key);
}

Matrix parse_matrix(const json& j, Index rows, Index cols, const std::string& path) {
  const json& re = require_field(j, "re", path);
  const json& im = require_field(j, "im", path);
  auto parse_part = [&](const json& part, const std::string& name) {
    if (!part.is_array() || static_cast<Index>(part.size()) != rows)
      fail(path + "." + name, "expected " + std::to_string(rows) + " rows");
    Eigen::MatrixXd out(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      const json& row = part.at(r);
      if (!row.is_array() || static_cast<Index>(row.size()) != cols)
        fail(path + "." + name + "[" + std::to_string(r) + "]",
             "expected " + std::to_string(cols) + " entries");
      for (Index c = 0; c < cols; ++c) {
        const json& entry = row.at(c);
        if (!entry.is_number())
          fail(path + "." + name + "[" + std::to_string(r) + "][" + std::to_string(c) + "]",
               "expected a number");
        out(r, c) = entry.get<double>();
      }
    }
    return out;
  };
  const Eigen::MatrixXd real = parse_part(re, "re");
  const Eigen::MatrixXd imag = parse_part(im, "im");
  Matrix m = real.cast<Complex>() + Complex(0.0, 1.0) * imag.cast<Complex>();
  if (!m.allFinite()) fail(path, "non-finite entries");
  return m;
}

Vector parse_vector(const json& j, Index dim, const std::string& path) {
  const json& re = require_field(j, "re", path);
  const json& im = require_field(j, "im", path);
  auto parse_part = [&](const json& part, const std::string& name) {
    if (!part.is_array() || static_cast<Index>(part.size()) != dim)
      fail(path + "." + name, "expected " + std::to_string(dim) + " entries");
    Eigen::VectorXd out(dim);
    for (Index i = 0; i < dim; ++i) {
      const json& entry = part.at(i);
      if (!entry.is_number()) fail(path + "." + name + "[" + std::to_string(i) + "]", "expected a number");
      out(i) = entry.get<double>();
    }
    return out;
  };
  return parse_part(re, "re").cast<Complex>() +
         Complex(0.0, 1.0) * parse_part(im, "im").cast<Complex>();
}

ChainModel model_from_json(const json& j) {
  if (!j.is_object()) fail("(root)", "expected a JSON object");

  if (j.contains("builtin")) {
    const json& builtin = j.at("builtin");
    if (!builtin.is_string() || builtin.get<std::string>() != "xy")
      fail("builtin", "unknown builtin model (supported: \"xy\")");
    const double a = require_number(require_field(j, "a", ""), "a");
    const double b = require_number(require_field(j, "b", ""), "b");
    const double f = j.contains("f") ? require_number(j.at("f"), "f") : 0.0;
    const double theta0 = require_number(require_field(j, "theta0", ""), "theta0");
    if (std::abs(a * a + b * b - 1.0) > tol::validation)
      fail("a", "input state requires a^2 + b^2 = 1, got " + std::to_string(a * a + b * b));
    return make_xy_model(a, b, f, theta0);
  }

  const Index d = require_positive_int(require_field(j, "d", ""), "d");
  const Index k = require_positive_int(require_field(j, "k", ""), "k");
  const double theta0 = require_number(require_field(j, "theta0", ""), "theta0");

  Matrix h = parse_matrix(require_field(j, "hamiltonian", ""), d * k, d * k, "hamiltonian");
  if (!is_hermitian(h, tol::validation))
    fail("hamiltonian", "not Hermitian within " + std::to_string(tol::validation));
  h = hermitize(h);  // repair sub-tolerance asymmetry

  Vector amps = parse_vector(require_field(j, "input_state", ""), d, "input_state");
  const double norm = amps.norm();
  if (std::abs(norm - 1.0) > tol::validation)
    fail("input_state", "norm deviates from 1 by " + std::to_string(norm - 1.0));
  // Repair sub-tolerance drift only; already-normalized vectors round-trip
  // bit-identically.
  PureState psi = std::abs(norm - 1.0) <= tol::algebraic ? PureState(std::move(amps))
                                                         : PureState::normalized(std::move(amps));

  return ChainModel(d, k, std::move(h), std::move(psi), theta0);
}

json model_to_json(const ChainModel& model) {
  const Index n = model.d * model.k;
  json re = json::array(), im = json::array();
  for (Index r = 0; r < n; ++r) {
    json re_row = json::array(), im_row = json::array();
    for (Index c = 0; c < n; ++c) {
      re_row.push_back(model.hamiltonian(r, c).real());
      im_row.push_back(model.hamiltonian(r, c).imag());
    }
    re.push_back(std::move(re_row));
    im.push_back(std::move(im_row));
  }
  json state_re = json::array(), state_im = json::array();
  for (Index i = 0; i < model.d; ++i) {
    state_re.push_back(model.input_state.amplitudes(i).real());
    state_im.push_back(model.input_state.amplitudes(i).imag());
  }
  return json{{"d", model.d},
              {"k", model.k},
              {"hamiltonian", {{"re", std::move(re)}, {"im", std::move(im)}}},
              {"input_state", {{"re", std::move(state_re)}, {"im", std::move(state_im)}}},
              {"theta0", model.theta0}};
}

}  // namespace

ChainModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelParseError(path + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return model_from_json_string(buffer.str());
}

ChainModel model_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelParseError(std::string("JSON parse error: ") + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const std::invalid_argument& e) {
    throw ModelParseError(e.what());
  }
}

std::string model_to_json_string(const ChainModel& model) {
  return model_to_json(model).dump(2);
}

std::uint64_t model_digest(const ChainModel& model) {
  const std::string canonical = model_to_json(model).dump();
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

}  // namespace qmarkov::io
