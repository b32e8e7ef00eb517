#include "sacfem/nn/model_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sacfem::nn {

namespace {

using nlohmann::ordered_json;

constexpr const char* kGateNames[kGates] = {"forget", "input1", "input2", "output"};
constexpr int kFormatVersion = 1;

std::vector<double> row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

void read_row_major(const ordered_json& j, const std::string& key, Eigen::Ref<Eigen::MatrixXd> m) {
  if (!j.contains(key)) throw std::invalid_argument("model file: missing tensor " + key);
  const auto v = j.at(key).get<std::vector<double>>();
  if (static_cast<Eigen::Index>(v.size()) != m.size())
    throw std::invalid_argument("model file: tensor " + key + " has " + std::to_string(v.size()) +
                                " entries, expected " + std::to_string(m.size()));
  std::size_t at = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(i, c) = v[at++];
}

// Splits a cell into per-gate tensors.
template <class Visit>
void visit_cell(const std::string& base, LstmCellParams& cell, Visit&& visit) {
  const Eigen::Index H = cell.n_hidden();
  for (int g = 0; g < kGates; ++g) {
    const std::string prefix = base + "." + kGateNames[g];
    visit(prefix + ".W_d", cell.Wd.middleRows(g * H, H));
    visit(prefix + ".W_h", cell.Wh.middleRows(g * H, H));
    visit(prefix + ".b", cell.b.segment(g * H, H));
  }
}

template <class Visit>
void visit_all(EncDecParams& p, Visit&& visit) {
  for (std::size_t l = 0; l < p.encoder.size(); ++l) {
    visit_cell("encoder." + std::to_string(l) + ".fwd", p.encoder[l][kForward], visit);
    visit_cell("encoder." + std::to_string(l) + ".bwd", p.encoder[l][kBackward], visit);
  }
  visit_cell("decoder", p.decoder, visit);
  visit("dense.W", p.dense_W);
  visit("dense.b", p.dense_b);
}

}  // namespace

std::string model_to_json(const EncDecParams& params) {
  params.check();
  ordered_json j;
  j["format"] = "sacfem-encdec";
  j["version"] = kFormatVersion;
  const auto& d = params.dims;
  j["dims"] = {{"k", d.k},           {"n_H", d.n_H},
               {"n_p", d.n_p},       {"n_f", d.n_f},
               {"n_dof", d.n_dof},   {"conditional", d.conditional},
               {"n_rep", d.n_rep}};
  j["norm"] = {{"shift", std::vector<double>(params.norm.shift.data(), params.norm.shift.data() + d.n_dof)},
               {"scale", std::vector<double>(params.norm.scale.data(), params.norm.scale.data() + d.n_dof)}};
  ordered_json weights = ordered_json::object();
  EncDecParams copy = params;
  visit_all(copy, [&](const std::string& key, const auto& t) { weights[key] = row_major(t); });
  j["weights"] = std::move(weights);
  return j.dump();
}

EncDecParams model_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("model file: ") + e.what());
  }
  try {
    if (j.value("format", "") != "sacfem-encdec") throw std::invalid_argument("model file: unknown format");
    const auto& jd = j.at("dims");
    ModelDims d;
    d.k = jd.at("k").get<int>();
    d.n_H = jd.at("n_H").get<int>();
    d.n_p = jd.at("n_p").get<int>();
    d.n_f = jd.at("n_f").get<int>();
    d.n_dof = jd.at("n_dof").get<int>();
    d.conditional = jd.at("conditional").get<bool>();
    d.n_rep = jd.at("n_rep").get<int>();
    EncDecParams p = EncDecParams::zeros(d);
    const auto shift = j.at("norm").at("shift").get<std::vector<double>>();
    const auto scale = j.at("norm").at("scale").get<std::vector<double>>();
    if (static_cast<int>(shift.size()) != d.n_dof || static_cast<int>(scale.size()) != d.n_dof)
      throw std::invalid_argument("model file: normalization size mismatch");
    p.norm.shift = Eigen::Map<const Eigen::VectorXd>(shift.data(), d.n_dof);
    p.norm.scale = Eigen::Map<const Eigen::VectorXd>(scale.data(), d.n_dof);
    const auto& w = j.at("weights");
    visit_all(p, [&](const std::string& key, auto&& t) { read_row_major(w, key, t); });
    p.check();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("model file: ") + e.what());
  }
}

void save_model(const EncDecParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << model_to_json(params) << '\n';
  if (!out) throw std::runtime_error("failed writing model file: " + path);
}

EncDecParams load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace sacfem::nn
