#include <fstream>

#include "mmrrw/model.hpp"

namespace mmrrw {

using nlohmann::json;

json model_to_json(const MmrrwModel& m) {
  json j;
  j["d"] = m.d;
  json faces = json::object();
  for (auto& [F, s] : m.bg_sizes) faces[F.key()] = s;
  j["faces"] = faces;
  json blocks = json::array();
  for (auto& [k, P] : m.blocks) {
    json b;
    b["from"] = k.from.key();
    b["z"] = decode_step(k.z, m.d);
    b["to"] = k.to.key();
    json rows = json::array();
    for (Eigen::Index r = 0; r < P.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < P.cols(); ++c) row.push_back(P(r, c));
      rows.push_back(row);
    }
    b["p"] = rows;
    blocks.push_back(b);
  }
  j["blocks"] = blocks;
  if (!m.labels.empty()) {
    json labels = json::object();
    for (auto& [F, names] : m.labels) labels[F.key()] = names;
    j["labels"] = labels;
  }
  return j;
}

MmrrwModel model_from_json(const json& j) {
  try {
    MmrrwModel m;
    m.d = j.at("d").get<int>();
    if (m.d < 0 || m.d > kMaxDim) throw ModelError("dimension out of range");
    for (auto& [key, s] : j.at("faces").items()) m.bg_sizes[Face::parse(key, m.d)] = s.get<int>();
    for (auto& b : j.at("blocks")) {
      Face from = Face::parse(b.at("from").get<std::string>(), m.d);
      Face to = Face::parse(b.at("to").get<std::string>(), m.d);
      auto z = b.at("z").get<std::vector<int>>();
      if (static_cast<int>(z.size()) != m.d) throw ModelError("step length differs from d");
      auto& rows = b.at("p");
      Eigen::MatrixXd P;
      if (rows.empty()) {
        P.resize(0, 0);
      } else {
        P.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
          if (rows[r].size() != rows[0].size()) throw ModelError("ragged probability block");
          for (std::size_t c = 0; c < rows[r].size(); ++c) P(r, c) = rows[r][c].get<double>();
        }
      }
      BlockKey k{from, encode_step(z), to};
      if (m.blocks.count(k)) throw ModelError("duplicate block {" + from.key() + "} -> {" + to.key() + "}");
      m.blocks.emplace(k, std::move(P));
    }
    if (j.contains("labels"))
      for (auto& [key, names] : j.at("labels").items())
        m.labels[Face::parse(key, m.d)] = names.get<std::vector<std::string>>();
    return m;
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed model JSON: ") + e.what());
  }
}

MmrrwModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ModelError("model file " + path + " is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

void save_model(const MmrrwModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << model_to_json(m).dump(2) << "\n";
}

}  // namespace mmrrw
