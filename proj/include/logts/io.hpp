#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "logts/envsim.hpp"
#include "logts/error.hpp"
#include "logts/model.hpp"
#include "logts/problems.hpp"

namespace logts {

using json = nlohmann::json;

inline json problem_to_json(const ProblemSpec& p) {
  switch (p.kind) {
    case ProblemKind::bai: return {{"kind", "bai"}};
    case ProblemKind::tbp: return {{"kind", "tbp"}, {"rho", p.rho}};
    case ProblemKind::topm: return {{"kind", "topm"}, {"m", p.m}};
  }
  return {};
}

inline ProblemSpec problem_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "bai") return ProblemSpec::bai();
  if (kind == "tbp") return ProblemSpec::tbp(j.at("rho").get<double>());
  if (kind == "topm") return ProblemSpec::topm(j.at("m").get<int>());
  fail(ErrorKind::config, "unknown problem kind '" + kind + "'");
}

/// {"label", "d", "arms", "theta_star", "S", "problem"}
inline json instance_to_json(const Instance& inst) {
  std::vector<double> theta(inst.theta_star.data(), inst.theta_star.data() + inst.dim());
  return {{"label", inst.label},           {"d", inst.dim()},
          {"arms", inst.arms.to_rows()},   {"theta_star", theta},
          {"S", inst.S},                   {"problem", problem_to_json(inst.spec)}};
}

inline Instance instance_from_json(const json& j) {
  try {
    const int d = j.at("d").get<int>();
    const ArmSet arms(j.at("arms").get<std::vector<std::vector<double>>>());
    require(arms.dim() == d, ErrorKind::config, "\"d\" does not match the arm dimension");
    const auto theta = j.at("theta_star").get<std::vector<double>>();
    require(static_cast<int>(theta.size()) == d, ErrorKind::config,
            "\"theta_star\" does not match the arm dimension");
    Vec t(d);
    for (int i = 0; i < d; ++i) t(i) = theta[static_cast<std::size_t>(i)];
    return {arms, t, j.at("S").get<double>(), problem_from_json(j.at("problem")),
            j.value("label", std::string("instance"))};
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("malformed instance JSON: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::structural) fail(ErrorKind::config, e.what());
    throw;
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::config, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config, "'" + path + "' is not valid JSON: " + e.what());
  }
}

inline Instance load_instance(const std::string& path) {
  return instance_from_json(read_json_file(path));
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::config, "cannot write '" + path + "'");
  out << text;
}

}  // namespace logts
