#include "brw/law_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "brw/error.hpp"

namespace brw {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& message) {
  throw Error(ErrorCode::parse, message);
}

double require_number(const json& node, const std::string& where) {
  if (!node.is_number()) fail(where + " must be a number");
  return node.get<double>();
}

}  // namespace

LawSpec parse_law_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("model is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("model must be a JSON object");
  if (!doc.contains("type") || !doc["type"].is_string()) {
    fail("model needs a string field \"type\"");
  }
  const std::string type = doc["type"].get<std::string>();

  if (type == "finite") {
    if (!doc.contains("atoms") || !doc["atoms"].is_array()) {
      fail("finite model needs an array field \"atoms\"");
    }
    FiniteLaw law;
    const json& atoms = doc["atoms"];
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      const json& a = atoms[j];
      const std::string where = "atom " + std::to_string(j);
      if (!a.is_object()) fail(where + " must be an object");
      if (!a.contains("p")) fail(where + " is missing \"p\"");
      if (!a.contains("x") || !a["x"].is_array()) {
        fail(where + " needs an array field \"x\"");
      }
      Atom atom;
      atom.probability = require_number(a["p"], where + " field \"p\"");
      for (std::size_t i = 0; i < a["x"].size(); ++i) {
        atom.displacements.push_back(
            require_number(a["x"][i], where + " displacement " + std::to_string(i)));
      }
      law.atoms.push_back(std::move(atom));
    }
    return law;
  }
  if (type == "log_divergent") {
    LogDivergentLaw law;
    if (!doc.contains("a")) fail("log_divergent model is missing \"a\"");
    law.tail_exponent = require_number(doc["a"], "field \"a\"");
    if (doc.contains("n_max")) {
      if (!doc["n_max"].is_number_integer()) fail("field \"n_max\" must be an integer");
      law.n_max = doc["n_max"].get<std::int64_t>();
    }
    return law;
  }
  fail("unknown model type \"" + type + "\"");
}

LawSpec load_law_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_law_json(buf.str());
}

std::string law_to_json(const LawSpec& spec) {
  json doc;
  if (const auto* f = std::get_if<FiniteLaw>(&spec)) {
    doc["type"] = "finite";
    doc["atoms"] = json::array();
    for (const Atom& atom : f->atoms) {
      doc["atoms"].push_back({{"p", atom.probability}, {"x", atom.displacements}});
    }
  } else {
    const auto& ld = std::get<LogDivergentLaw>(spec);
    doc["type"] = "log_divergent";
    doc["a"] = ld.tail_exponent;
    doc["n_max"] = ld.n_max;
  }
  return doc.dump();
}

}  // namespace brw
