#include "bamlab/json_io.hpp"

#include <fstream>

namespace bamlab {

namespace {

Vec to_vec(const Json& j) {
  if (!j.is_array()) fail("JsonShape", "expected an array of numbers");
  Vec v;
  v.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) fail("JsonShape", "expected a number");
    v.push_back(x.get<double>());
  }
  return v;
}

std::vector<Vec> to_vecs(const Json& j) {
  if (!j.is_array()) fail("JsonShape", "expected an array of arrays");
  std::vector<Vec> out;
  out.reserve(j.size());
  for (const auto& row : j) out.push_back(to_vec(row));
  return out;
}

const Json& field(const Json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) fail("JsonShape", std::string("missing field \"") + name + "\"");
  return *it;
}

}  // namespace

Json instance_to_json(const Instance& inst) {
  Json stages = Json::array();
  for (const auto& st : inst.stages) {
    Json s;
    if (st.is_discrete()) {
      s["kind"] = "discrete";
      s["support"] = st.support;
      s["probs"] = st.probs;
    } else {
      s["kind"] = "equal_revenue";
      s["v_max"] = st.v_max;
    }
    stages.push_back(std::move(s));
  }
  Json j;
  j["stages"] = std::move(stages);
  return j;
}

Instance instance_from_json(const Json& j) {
  Instance inst;
  const Json& stages = field(j, "stages");
  if (!stages.is_array()) fail("JsonShape", "\"stages\" must be an array");
  for (const auto& s : stages) {
    std::string kind = field(s, "kind").get<std::string>();
    if (kind == "discrete") {
      inst.stages.push_back(
          StageDistribution::discrete(to_vecs(field(s, "support")), to_vec(field(s, "probs"))));
    } else if (kind == "equal_revenue") {
      inst.stages.push_back(StageDistribution::equal_revenue(field(s, "v_max").get<double>()));
    } else {
      fail("JsonShape", "unknown stage kind \"" + kind + "\"");
    }
  }
  validate_instance(inst);
  return inst;
}

Json mechanism_to_json(const DirectMechanism& m) {
  Json nodes = Json::array();
  for (const auto& [h, out] : m.nodes) {
    Json n;
    n["history"] = h;
    n["alloc"] = out.alloc;
    n["pay"] = out.pay;
    nodes.push_back(std::move(n));
  }
  Json j;
  j["nodes"] = std::move(nodes);
  return j;
}

DirectMechanism mechanism_from_json(const Json& j) {
  DirectMechanism m;
  const Json& nodes = field(j, "nodes");
  if (!nodes.is_array()) fail("JsonShape", "\"nodes\" must be an array");
  for (const auto& n : nodes) {
    IndexPath h;
    for (const auto& i : field(n, "history")) h.push_back(i.get<int>());
    StageOutcome out{to_vec(field(n, "alloc")), field(n, "pay").get<double>()};
    if (!m.nodes.emplace(std::move(h), std::move(out)).second)
      fail("JsonShape", "duplicate history in mechanism");
  }
  return m;
}

Json tabular_to_json(const TabularBam& bam) {
  Json stages = Json::array();
  for (const auto& pol : bam.policy) {
    Json rows = Json::array();
    for (std::size_t b = 0; b < pol.balances.size(); ++b) {
      Json row;
      row["bal"] = pol.balances[b];
      row["s"] = pol.spends[b];
      row["z"] = pol.z[b];
      row["q"] = pol.q[b];
      row["d"] = pol.d[b];
      rows.push_back(std::move(row));
    }
    Json s;
    s["support"] = pol.support;
    s["rows"] = std::move(rows);
    stages.push_back(std::move(s));
  }
  Json j;
  j["promised_utility"] = bam.promised_utility;
  j["stages"] = std::move(stages);
  return j;
}

TabularBam tabular_from_json(const Json& j) {
  TabularBam bam;
  bam.promised_utility = field(j, "promised_utility").get<double>();
  const Json& stages = field(j, "stages");
  if (!stages.is_array()) fail("JsonShape", "\"stages\" must be an array");
  for (const auto& s : stages) {
    StagePolicy pol;
    pol.support = to_vecs(field(s, "support"));
    for (const auto& row : field(s, "rows")) {
      pol.balances.push_back(field(row, "bal").get<double>());
      pol.spends.push_back(field(row, "s").get<double>());
      pol.z.push_back(to_vecs(field(row, "z")));
      pol.q.push_back(to_vec(field(row, "q")));
      pol.d.push_back(to_vec(field(row, "d")));
      if (pol.z.back().size() != pol.support.size() || pol.q.back().size() != pol.support.size() ||
          pol.d.back().size() != pol.support.size())
        fail("JsonShape", "policy row size does not match the support");
    }
    for (std::size_t b = 1; b < pol.balances.size(); ++b)
      if (!(pol.balances[b] > pol.balances[b - 1]))
        fail("JsonShape", "balances must be strictly ascending");
    bam.policy.push_back(std::move(pol));
  }
  return bam;
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("JsonRead", "cannot open " + path);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) fail("JsonRead", "invalid JSON in " + path);
  return j;
}

void save_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) fail("JsonWrite", "cannot open " + path);
  out << j.dump(2) << '\n';
  if (!out) fail("JsonWrite", "write failed for " + path);
}

Instance load_instance(const std::string& path) { return instance_from_json(load_json(path)); }

}  // namespace bamlab
