#include <fstream>
#include <sstream>
#include <stdexcept>

#include "barter/io.hpp"
#include "json.hpp"

namespace barter {
namespace {

using nlohmann::json;

Rational rational_from(const json& v) {
  if (v.is_string()) return Rational::parse(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  throw std::invalid_argument("expected rational as \"num/den\" string or integer");
}

std::vector<Rational> rationals_from(const json& arr) {
  std::vector<Rational> out;
  for (const auto& v : arr) out.push_back(rational_from(v));
  return out;
}

json rationals_to(const std::vector<Rational>& v) {
  json arr = json::array();
  for (const auto& r : v) arr.push_back(r.to_string());
  return arr;
}

IntMatrix matrix_from(const json& arr) {
  return IntMatrix::from_rows(arr.get<std::vector<std::vector<std::int64_t>>>());
}

json matrix_to(const IntMatrix& m) {
  json arr = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    arr.push_back(std::vector<std::int64_t>(row.begin(), row.end()));
  }
  return arr;
}

}  // namespace

std::string instance_to_json(const EconomyInstance& inst, int indent) {
  json j;
  j["n"] = inst.n_agents;
  j["m"] = inst.n_commodities;
  j["prices"] = rationals_to(inst.prices);
  j["weights"] = rationals_to(inst.weights);
  j["endowments"] = matrix_to(inst.endowments);
  json us = json::array();
  for (const auto& u : inst.utilities) {
    if (u.is_linear()) {
      us.push_back({{"kind", "linear"}, {"c", rationals_to(u.linear)}});
    } else {
      us.push_back({{"kind", "cara"}, {"a", u.cara}, {"offset", u.offset}});
    }
  }
  j["utilities"] = us;
  if (inst.rationing) j["rationing"] = {{"lower", inst.rationing->lower}, {"upper", inst.rationing->upper}};
  if (inst.capacities) j["capacities"] = matrix_to(*inst.capacities);
  if (inst.network) {
    json net;
    json edges = json::array();
    for (auto [a, b] : inst.network->edges) edges.push_back({a, b});
    net["edges"] = edges;
    if (inst.network->capacities) net["capacities"] = matrix_to(*inst.network->capacities);
    j["network"] = net;
  }
  return j.dump(indent);
}

EconomyInstance instance_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("instance JSON parse error: ") + e.what());
  }
  try {
    EconomyInstance inst;
    inst.n_agents = j.at("n").get<int>();
    inst.n_commodities = j.at("m").get<int>();
    inst.prices = rationals_from(j.at("prices"));
    inst.weights = rationals_from(j.at("weights"));
    inst.endowments = matrix_from(j.at("endowments"));
    for (const auto& u : j.at("utilities")) {
      const auto kind = u.at("kind").get<std::string>();
      if (kind == "linear") {
        inst.utilities.push_back(UtilitySpec::Linear(rationals_from(u.at("c"))));
      } else if (kind == "cara") {
        inst.utilities.push_back(
            UtilitySpec::Cara(u.at("a").get<std::vector<double>>(), u.value("offset", 0.0)));
      } else {
        throw std::invalid_argument("unknown utility kind '" + kind + "'");
      }
    }
    if (j.contains("rationing")) {
      Rationing r;
      r.lower = j["rationing"].at("lower").get<std::vector<std::int64_t>>();
      r.upper = j["rationing"].at("upper").get<std::vector<std::int64_t>>();
      inst.rationing = r;
    }
    if (j.contains("capacities")) inst.capacities = matrix_from(j["capacities"]);
    if (j.contains("network")) {
      NetworkBlock nb;
      for (const auto& e : j["network"].at("edges")) nb.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
      if (j["network"].contains("capacities")) nb.capacities = matrix_from(j["network"]["capacities"]);
      inst.network = nb;
    }
    return inst;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("instance JSON schema error: ") + e.what());
  }
}

EconomyInstance read_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open instance file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return instance_from_json(ss.str());
}

void write_instance(const EconomyInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << instance_to_json(inst) << '\n';
}

std::string allocation_to_string(const Allocation& x) {
  std::ostringstream os;
  for (std::size_t h = 0; h < x.rows(); ++h) {
    if (h) os << " | ";
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (j) os << ',';
      os << x(h, j);
    }
  }
  return os.str();
}

}  // namespace barter
