#include "gelfand/constants.hpp"

#include <fstream>

#include <json.hpp>

#include "gelfand/errors.hpp"

namespace gelfand {

using nlohmann::json;

void save_constants(const CalibratedConstants& c, const std::string& path) {
  json j;
  j["schema"] = 1;
  j["c1"] = c.c1;
  j["c3"] = c.c3;
  j["c5"] = c.c5;
  j["c6"] = c.c6;
  j["c9"] = c.c9;
  j["r_star"] = c.r_star;
  j["l2"] = {{"A", c.A}, {"B", c.B}, {"alpha", c.alpha}, {"beta", c.beta}};
  j["linf"] = {{"A", c.A_t}, {"B", c.B_t}, {"alpha", c.alpha_t}, {"beta", c.beta_t}};
  j["provenance"] = {{"config_digest", c.provenance.config_digest},
                     {"seed", c.provenance.seed},
                     {"training_rows", c.provenance.training_rows},
                     {"training_fixtures", c.provenance.training_fixtures},
                     {"training_energies", c.provenance.training_energies}};
  std::ofstream os(path);
  if (!os) throw ConfigError("save_constants: cannot open " + path);
  os << j.dump(2) << "\n";
}

CalibratedConstants load_constants(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("load_constants: cannot open " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("load_constants: parse error in " + path + ": " + e.what());
  }
  if (!j.contains("schema") || j["schema"].get<int>() != 1)
    throw ConfigError("load_constants: unsupported schema in " + path);
  CalibratedConstants c;
  c.c1 = j.at("c1").get<double>();
  c.c3 = j.at("c3").get<double>();
  c.c5 = j.at("c5").get<double>();
  c.c6 = j.at("c6").get<double>();
  c.c9 = j.at("c9").get<double>();
  c.r_star = j.at("r_star").get<double>();
  c.A = j.at("l2").at("A").get<double>();
  c.B = j.at("l2").at("B").get<double>();
  c.alpha = j.at("l2").at("alpha").get<double>();
  c.beta = j.at("l2").at("beta").get<double>();
  c.A_t = j.at("linf").at("A").get<double>();
  c.B_t = j.at("linf").at("B").get<double>();
  c.alpha_t = j.at("linf").at("alpha").get<double>();
  c.beta_t = j.at("linf").at("beta").get<double>();
  if (j.contains("provenance")) {
    const auto& p = j["provenance"];
    c.provenance.config_digest = p.value("config_digest", "");
    c.provenance.seed = p.value("seed", std::uint64_t{0});
    c.provenance.training_rows = p.value("training_rows", 0);
    c.provenance.training_fixtures = p.value("training_fixtures", 0);
    c.provenance.training_energies = p.value("training_energies", 0);
  }
  return c;
}

}  // namespace gelfand
