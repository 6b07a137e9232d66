#include "anosov/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "anosov/error.hpp"

namespace anosov {

namespace {

[[noreturn]] void schema_error(const std::string& msg) { throw Error(ErrorCode::SchemaError, msg); }

const Json& field(const Json& j, const std::string& key, const std::string& context) {
  if (!j.is_object() || !j.contains(key)) schema_error(context + ": missing '" + key + "'");
  return j.at(key);
}

double number(const Json& j, const std::string& context) {
  if (!j.is_number()) schema_error(context + ": expected a number");
  return j.get<double>();
}

int integer(const Json& j, const std::string& context) {
  if (!j.is_number_integer()) schema_error(context + ": expected an integer");
  return j.get<int>();
}

std::vector<double> numbers(const Json& j, std::size_t size, const std::string& context) {
  if (!j.is_array() || j.size() != size) {
    schema_error(context + ": expected an array of " + std::to_string(size) + " numbers");
  }
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number(x, context));
  return out;
}

Eigen::Vector4d vec4(const Json& j, const std::string& context) {
  const auto v = numbers(j, 4, context);
  return {v[0], v[1], v[2], v[3]};
}

Eigen::Vector2d vec2(const Json& j, const std::string& context) {
  const auto v = numbers(j, 2, context);
  return {v[0], v[1]};
}

Eigen::Matrix4d mat4(const Json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 4) schema_error(context + ": expected a 4x4 array");
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r) m.row(r) = vec4(j[static_cast<std::size_t>(r)], context).transpose();
  return m;
}

std::array<int, 4> exponents(const Json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 4) schema_error(context + ": expected 4 exponents");
  std::array<int, 4> e{};
  for (std::size_t i = 0; i < 4; ++i) e[i] = integer(j[i], context);
  return e;
}

Freq frequency(const Json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    schema_error(context + ": expected an integer frequency pair");
  }
  return {j[0].get<std::int64_t>(), j[1].get<std::int64_t>()};
}

// Negative zero prints as "-0.0"; reports use +0.
double clean(double x) { return x == 0.0 ? 0.0 : x; }

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    schema_error("'" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) schema_error("'" + path + "' must hold a JSON object");
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
      j["schema_version"].get<int>() != kSchemaVersion) {
    schema_error("'" + path + "' must declare schema_version " + std::to_string(kSchemaVersion));
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) throw Error(ErrorCode::IoError, "CSV row width mismatch");
  rows.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::ostringstream out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out.str();
}

void expect_keys(const Json& j, const std::vector<std::string>& allowed, const std::string& context) {
  if (!j.is_object()) schema_error(context + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      schema_error(context + ": unknown key '" + key + "'");
    }
  }
}

IntMat2 int_matrix_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) schema_error("matrix: expected a 2x2 integer array");
  IntMat2 m;
  for (std::size_t r = 0; r < 2; ++r) {
    if (!j[r].is_array() || j[r].size() != 2) schema_error("matrix: expected a 2x2 integer array");
    for (std::size_t c = 0; c < 2; ++c) {
      if (!j[r][c].is_number_integer()) schema_error("matrix: entries must be integers");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<std::int64_t>();
    }
  }
  return m;
}

Json to_json(const IntMat2& m) {
  return Json::array({Json::array({m(0, 0), m(0, 1)}), Json::array({m(1, 0), m(1, 1)})});
}

Json to_json(const Eigen::Vector2d& v) { return Json::array({clean(v(0)), clean(v(1))}); }

Json to_json(const Eigen::Vector4d& v) {
  return Json::array({clean(v(0)), clean(v(1)), clean(v(2)), clean(v(3))});
}

Json to_json(const Eigen::Matrix4d& m) {
  Json out = Json::array();
  for (int r = 0; r < 4; ++r) out.push_back(to_json(Eigen::Vector4d(m.row(r).transpose())));
  return out;
}

TrigMap trigmap_from_json(const Json& j) {
  expect_keys(j, {"basis", "truncation_eps", "terms", "modes"}, "trig map");
  TrigMap f;
  if (j.contains("basis")) {
    if (!j["basis"].is_string()) schema_error("trig map: basis must be a string");
    f.basis = j["basis"].get<std::string>();
    if (f.basis != "standard" && f.basis != "B_eigen") schema_error("trig map: unknown basis " + f.basis);
  }
  if (j.contains("truncation_eps")) f.truncation_eps = number(j["truncation_eps"], "truncation_eps");
  if (j.contains("terms")) {
    // raw coefficients are given for every stored frequency, conjugates included
    for (const auto& t : j["terms"]) {
      expect_keys(t, {"k", "re", "im"}, "trig term");
      const Freq k = frequency(field(t, "k", "trig term"), "trig term k");
      const Eigen::Vector2d re = vec2(field(t, "re", "trig term"), "trig term re");
      const Eigen::Vector2d im = vec2(field(t, "im", "trig term"), "trig term im");
      f.terms[k] = {std::complex<double>(re(0), im(0)), std::complex<double>(re(1), im(1))};
    }
  }
  if (j.contains("modes")) {
    for (const auto& t : j["modes"]) {
      expect_keys(t, {"k", "cos", "sin"}, "trig mode");
      const Freq k = frequency(field(t, "k", "trig mode"), "trig mode k");
      if (t.contains("cos")) f.add_cosine(k, vec2(t["cos"], "trig mode cos"));
      if (t.contains("sin")) f.add_sine(k, vec2(t["sin"], "trig mode sin"));
    }
  }
  f.check_reality();
  return f;
}

Json to_json(const TrigMap& f) {
  Json terms = Json::array();
  for (const auto& [k, c] : f.terms) {
    terms.push_back({{"k", Json::array({k[0], k[1]})},
                     {"re", Json::array({clean(c[0].real()), clean(c[1].real())})},
                     {"im", Json::array({clean(c[0].imag()), clean(c[1].imag())})}});
  }
  return {{"basis", f.basis}, {"truncation_eps", f.truncation_eps}, {"terms", terms}};
}

Json modes_json(const TrigMap& f) {
  Json out = Json::array();
  for (const auto& [k, c] : f.terms) {
    if (negate(k) > k) continue;
    const ModeAmplitude m = mode_amplitude(f, k);
    out.push_back({{"k", Json::array({k[0], k[1]})}, {"cos", to_json(m.cos_amp)}, {"sin", to_json(m.sin_amp)}});
  }
  return out;
}

Bump bump_from_json(const Json& j) {
  expect_keys(j, {"center", "radius", "coefficients"}, "bump");
  Bump b;
  b.center = vec4(field(j, "center", "bump"), "bump center");
  b.radius = number(field(j, "radius", "bump"), "bump radius");
  const auto c = numbers(field(j, "coefficients", "bump"), 4, "bump coefficients");
  std::copy(c.begin(), c.end(), b.coefficients.begin());
  return b;
}

Json to_json(const Bump& b) {
  return {{"center", to_json(b.center)},
          {"radius", b.radius},
          {"coefficients", Json::array({b.coefficients[0], b.coefficients[1], b.coefficients[2],
                                        b.coefficients[3]})}};
}

SystemSpec system_from_json(const Json& j) {
  expect_keys(j, {"schema_version", "description", "A", "B", "phi", "phi1", "g", "bumps"}, "system");
  SystemSpec s;
  s.a = int_matrix_from_json(field(j, "A", "system"));
  s.b = int_matrix_from_json(field(j, "B", "system"));
  if (j.contains("phi")) s.phi = trigmap_from_json(j["phi"]);
  if (j.contains("phi1")) s.phi1 = trigmap_from_json(j["phi1"]);
  if (j.contains("g")) s.g = trigmap_from_json(j["g"]);
  if (j.contains("bumps")) {
    if (!j["bumps"].is_array()) schema_error("system: bumps must be an array");
    for (const auto& b : j["bumps"]) s.bumps.push_back(bump_from_json(b));
  }
  return s;
}

LocalModel local_model_from_json(const Json& j) {
  expect_keys(j, {"schema_version", "description", "eig", "T", "tau_terms", "gluing"}, "local model");
  LocalModel m;
  const auto e = numbers(field(j, "eig", "local model"), 4, "eig");
  m.eig = EigenQuadruple::make(e[0], e[1], e[2], e[3]);
  m.tau.T = number(field(j, "T", "local model"), "T");
  if (j.contains("tau_terms")) {
    for (const auto& t : j["tau_terms"]) {
      expect_keys(t, {"exponents", "coefficient"}, "tau term");
      m.tau.mixed_terms.push_back({exponents(field(t, "exponents", "tau term"), "tau term"),
                                   number(field(t, "coefficient", "tau term"), "tau term")});
    }
  }
  const Json& g = field(j, "gluing", "local model");
  expect_keys(g, {"q", "q_prime", "T_prime", "linear", "quadratic", "taubar_linear", "taubar_quadratic"},
              "gluing");
  m.gluing.q = vec4(field(g, "q", "gluing"), "q");
  m.gluing.q_prime = vec4(field(g, "q_prime", "gluing"), "q_prime");
  m.gluing.T_prime = number(field(g, "T_prime", "gluing"), "T_prime");
  if (g.contains("linear")) m.gluing.linear = mat4(g["linear"], "gluing linear");
  if (g.contains("quadratic")) {
    for (const auto& t : g["quadratic"]) {
      expect_keys(t, {"out", "i", "j", "coefficient"}, "quadratic term");
      m.gluing.quadratic.push_back({integer(field(t, "out", "quadratic term"), "out"),
                                    integer(field(t, "i", "quadratic term"), "i"),
                                    integer(field(t, "j", "quadratic term"), "j"),
                                    number(field(t, "coefficient", "quadratic term"), "coefficient")});
    }
  }
  if (g.contains("taubar_linear")) m.gluing.taubar_linear = vec4(g["taubar_linear"], "taubar_linear");
  if (g.contains("taubar_quadratic")) {
    for (const auto& t : g["taubar_quadratic"]) {
      expect_keys(t, {"i", "j", "coefficient"}, "excursion term");
      m.gluing.taubar_quadratic.push_back({0, integer(field(t, "i", "excursion term"), "i"),
                                           integer(field(t, "j", "excursion term"), "j"),
                                           number(field(t, "coefficient", "excursion term"), "coefficient")});
    }
  }
  m.validate();
  return m;
}

Json to_json(const LocalModel& m) {
  Json terms = Json::array();
  for (const auto& t : m.tau.mixed_terms) terms.push_back({{"exponents", t.exponents}, {"coefficient", t.coefficient}});
  Json quad = Json::array();
  for (const auto& t : m.gluing.quadratic) {
    quad.push_back({{"out", t.out}, {"i", t.i}, {"j", t.j}, {"coefficient", t.coefficient}});
  }
  Json tquad = Json::array();
  for (const auto& t : m.gluing.taubar_quadratic) {
    tquad.push_back({{"i", t.i}, {"j", t.j}, {"coefficient", t.coefficient}});
  }
  return {{"eig", m.eig.as_array()},
          {"T", m.tau.T},
          {"tau_terms", terms},
          {"gluing",
           {{"q", to_json(m.gluing.q)},
            {"q_prime", to_json(m.gluing.q_prime)},
            {"T_prime", m.gluing.T_prime},
            {"linear", to_json(m.gluing.linear)},
            {"quadratic", quad},
            {"taubar_linear", to_json(m.gluing.taubar_linear)},
            {"taubar_quadratic", tquad}}}};
}

ModelFamily family_from_json(const Json& j) {
  expect_keys(j, {"schema_version", "description", "start", "end", "grid"}, "family");
  ModelFamily f{local_model_from_json(field(j, "start", "family")),
                local_model_from_json(field(j, "end", "family"))};
  f.at(0.5);  // structure check
  return f;
}

Shear shear_from_json(const Json& j) {
  expect_keys(j, {"name", "linear", "terms"}, "shear");
  Shear s;
  if (j.contains("name")) s.name = j["name"].get<std::string>();
  if (j.contains("linear")) s.linear = mat4(j["linear"], "shear linear");
  if (j.contains("terms")) {
    for (const auto& t : j["terms"]) {
      expect_keys(t, {"out", "exponents", "coefficient"}, "shear term");
      ShearTerm st{integer(field(t, "out", "shear term"), "out"),
                   exponents(field(t, "exponents", "shear term"), "shear term"),
                   number(field(t, "coefficient", "shear term"), "coefficient")};
      if (st.out < 0 || st.out > 3) schema_error("shear term: out must be in 0..3");
      for (int e : st.exponents) {
        if (e < 0) schema_error("shear term: negative exponent");
      }
      s.terms.push_back(st);
    }
  }
  return s;
}

Json to_json(const Shear& s) {
  Json terms = Json::array();
  for (const auto& t : s.terms) {
    terms.push_back({{"out", t.out}, {"exponents", t.exponents}, {"coefficient", t.coefficient}});
  }
  return {{"name", s.name}, {"linear", to_json(s.linear)}, {"terms", terms}};
}

}  // namespace anosov
