#include "freegeom/formula.hpp"

#include <json.hpp>

namespace freegeom {

using nlohmann::json;

namespace {

json cplx_json(cplx c) { return json::array({c.real(), c.imag()}); }

cplx cplx_from(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw DomainError("complex value must be [re, im]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

const char* part_name(Part p) { return p == Part::Re ? "Re" : "Im"; }

Part part_from(const std::string& s) {
  if (s == "Re") return Part::Re;
  if (s == "Im") return Part::Im;
  throw DomainError("unknown part: " + s);
}

json node_json(const Formula& f) {
  json out;
  out["kind"] = f.kind();
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ResolventTraceNode>) {
          json terms = json::array();
          for (const auto& m : p.terms) {
            json letters = json::array();
            for (const auto& l : m.letters)
              letters.push_back({{"var", l.var}, {"part", part_name(l.part)}, {"adjoint", l.adjoint}});
            terms.push_back({{"coeff", cplx_json(m.coeff)}, {"letters", letters}});
          }
          out["terms"] = terms;
        } else if constexpr (std::is_same_v<T, PolynomialTraceNode>) {
          json terms = json::array();
          for (const auto& m : p.terms) {
            json letters = json::array();
            for (const auto& l : m.letters) letters.push_back({{"var", l.var}, {"adjoint", l.adjoint}});
            terms.push_back({{"coeff", cplx_json(m.coeff)}, {"letters", letters}});
          }
          out["terms"] = terms;
          out["unbounded"] = true;
        } else if constexpr (std::is_same_v<T, ConnectiveNode>) {
          out["fn"] = to_string(p.fn);
          out["params"] = p.params;
          out["lipschitz"] = p.lipschitz;
          json args = json::array();
          for (const auto& a : p.args) args.push_back(node_json(a));
          out["args"] = args;
        } else if constexpr (std::is_same_v<T, BallNode>) {
          out["radius"] = p.radius;
          out["var"] = p.var;
          out["selfadjoint"] = p.selfadjoint;
          out["body"] = node_json(p.body);
        } else if constexpr (std::is_same_v<T, HeatSubNode>) {
          out["time"] = p.time;
          out["vars"] = p.vars;
          out["body"] = node_json(p.body);
        } else if constexpr (std::is_same_v<T, ShiftNode>) {
          out["target"] = p.target;
          out["source"] = p.source;
          out["coeff"] = p.coeff;
          out["body"] = node_json(p.body);
        }
      },
      f.node().payload);
  return out;
}

Formula node_from(const json& j) {
  if (!j.is_object()) throw DomainError("formula node must be an object");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "BasicResolventTrace") {
    std::vector<ResolventMonomial> terms;
    for (const auto& t : j.at("terms")) {
      ResolventMonomial m;
      m.coeff = cplx_from(t.at("coeff"));
      for (const auto& l : t.at("letters"))
        m.letters.push_back({l.at("var").get<int>(), part_from(l.at("part").get<std::string>()),
                             l.value("adjoint", false)});
      terms.push_back(std::move(m));
    }
    return Formula::resolvent_trace(std::move(terms));
  }
  if (kind == "BasicPolynomialTrace") {
    std::vector<PolyMonomial> terms;
    for (const auto& t : j.at("terms")) {
      PolyMonomial m;
      m.coeff = cplx_from(t.at("coeff"));
      for (const auto& l : t.at("letters")) m.letters.push_back({l.at("var").get<int>(), l.value("adjoint", false)});
      terms.push_back(std::move(m));
    }
    return Formula::polynomial_trace(std::move(terms));
  }
  if (kind == "Connective") {
    std::vector<Formula> args;
    if (j.contains("args"))
      for (const auto& a : j.at("args")) args.push_back(node_from(a));
    std::vector<double> params = j.value("params", std::vector<double>{});
    return Formula::connective(connective_from_string(j.at("fn").get<std::string>()), std::move(params),
                               std::move(args), j.value("lipschitz", -1.0));
  }
  if (kind == "SupBall" || kind == "InfBall") {
    double r = j.at("radius").get<double>();
    int v = j.at("var").get<int>();
    bool sa = j.value("selfadjoint", false);
    Formula body = node_from(j.at("body"));
    return kind == "SupBall" ? Formula::sup_ball(r, v, body, sa) : Formula::inf_ball(r, v, body, sa);
  }
  if (kind == "HeatSub")
    return Formula::heat(j.at("time").get<double>(), j.at("vars").get<std::vector<int>>(), node_from(j.at("body")));
  if (kind == "Shift")
    return Formula::shift(j.at("target").get<int>(), j.at("source").get<int>(), j.at("coeff").get<double>(),
                          node_from(j.at("body")));
  throw DomainError("unknown formula node kind: " + kind);
}

}  // namespace

std::string to_json(const Formula& phi, int indent) { return node_json(phi).dump(indent); }

Formula formula_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DomainError(std::string("formula JSON: ") + e.what());
  }
  try {
    return node_from(j);
  } catch (const json::exception& e) {
    throw DomainError(std::string("formula JSON: ") + e.what());
  }
}

}  // namespace freegeom
