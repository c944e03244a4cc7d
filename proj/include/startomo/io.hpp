#ifndef STARTOMO_IO_HPP
#define STARTOMO_IO_HPP

// JSON and CSV persistence for structures, states, parameter matrices,
// transfer matrices, measurement vectors and design results.

#include "startomo/design_optimizer.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace startomo::io {

using nlohmann::json;

inline json to_json(const BlockStructure& s) {
  json sectors = json::array();
  for (const auto& sec : s.sectors())
    sectors.push_back({{"j2", sec.j2}, {"multiplicity", sec.multiplicity}, {"block_dim", sec.block_dim}});
  return {{"n", s.n_total()}, {"sectors", sectors}};
}

/// Rebuilds the structure from "n" and checks the sector table against it.
inline BlockStructure structure_from_json(const json& j, double coupling = 1.0) {
  BlockStructure s{RegisterSpec{j.at("n").get<int>(), coupling}};
  if (j.contains("sectors")) {
    const auto& arr = j.at("sectors");
    if (arr.size() != s.sector_count()) throw std::runtime_error("structure JSON: sector count mismatch");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const auto& sec = s.sector(k);
      if (arr[k].at("j2").get<int>() != sec.j2 || arr[k].at("multiplicity").get<std::int64_t>() != sec.multiplicity ||
          arr[k].at("block_dim").get<int>() != sec.block_dim)
        throw std::runtime_error("structure JSON: sector table inconsistent with n");
    }
  }
  return s;
}

inline json matrix_to_json(const RMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline RMatrix matrix_from_json(const json& rows) {
  const Eigen::Index n_rows = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index n_cols = n_rows ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  RMatrix m(n_rows, n_cols);
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    if (static_cast<Eigen::Index>(rows[r].size()) != n_cols) throw std::runtime_error("matrix JSON: ragged rows");
    for (Eigen::Index c = 0; c < n_cols; ++c) m(r, c) = rows[r][c].get<double>();
  }
  return m;
}

inline json to_json(const BlockState& st) {
  json blocks = json::array();
  for (std::size_t k = 0; k < st.matrix().size(); ++k)
    blocks.push_back({{"re", matrix_to_json(st.block(k).real())}, {"im", matrix_to_json(st.block(k).imag())}});
  return {{"structure", to_json(st.structure())},
          {"lambda", std::vector<double>(st.trace_weights().begin(), st.trace_weights().end())},
          {"blocks", blocks}};
}

inline BlockState state_from_json(const json& j, double coupling = 1.0) {
  const BlockStructure s = structure_from_json(j.at("structure"), coupling);
  std::vector<CMatrix> blocks;
  const auto& arr = j.at("blocks");
  if (arr.size() != s.sector_count()) throw std::runtime_error("state JSON: block count mismatch");
  for (const auto& b : arr) {
    const RMatrix re = matrix_from_json(b.at("re")), im = matrix_from_json(b.at("im"));
    if (re.rows() != im.rows() || re.cols() != im.cols()) throw std::runtime_error("state JSON: re/im shape mismatch");
    CMatrix c(re.rows(), re.cols());
    c.real() = re;
    c.imag() = im;
    blocks.push_back(std::move(c));
  }
  return BlockState(BlockMatrix(s, std::move(blocks), true));
}

inline json to_json(const ParamMatrix& p) {
  json j = {{"n", p.n_total}, {"layers", p.layers}, {"readouts", p.readouts()}, {"theta", matrix_to_json(p.theta)}};
  if (p.mixed()) j["row_layers"] = p.row_layers;
  return j;
}

inline ParamMatrix params_from_json(const json& j) {
  ParamMatrix p;
  p.n_total = j.at("n").get<int>();
  p.layers = j.at("layers").get<int>();
  p.theta = matrix_from_json(j.at("theta"));
  if (p.theta.rows() == 0) p.theta.resize(0, kParamsPerLayer * p.layers);
  if (j.contains("row_layers")) p.row_layers = j.at("row_layers").get<std::vector<int>>();
  if (j.at("readouts").get<int>() != p.readouts()) throw std::runtime_error("theta JSON: readouts does not match row count");
  p.validate();
  return p;
}

inline json to_json(const ReconstructionResult& r) {
  json j = to_json(r.state);
  j["residual"] = r.residual_norm;
  j["rank"] = r.rank;
  return j;
}

inline json to_json(const DesignResult& r) {
  json j = to_json(r.theta_star);
  j["f_initial"] = r.f_initial;
  j["f_final"] = r.f_final;
  j["trajectory"] = r.trajectory;
  j["best_restart"] = r.best_restart;
  json restarts = json::array();
  for (const auto& s : r.restart_stats)
    restarts.push_back({{"seed", s.seed},
                        {"f_initial", s.f_initial},
                        {"f_final", s.f_final},
                        {"iterations", s.iterations},
                        {"trajectory", s.trajectory}});
  j["restarts"] = restarts;
  j["theta_initial"] = matrix_to_json(r.theta_initial.theta);
  return j;
}

inline json transfer_to_json(const TransferMatrix& f) {
  json labels = json::array();
  for (const auto& l : f.rows) {
    if (l.prior)
      labels.push_back({{"prior", true}, {"sector", l.sector}});
    else
      labels.push_back({{"prior", false}, {"readout", l.readout}, {"observable", l.observable}});
  }
  return {{"rows", f.total_rows()},
          {"cols", f.cols()},
          {"measurement_rows", f.measurement_rows},
          {"row_labels", labels},
          {"entries", matrix_to_json(f.entries)}};
}

inline std::string row_label(const RowLabel& l) {
  if (l.prior) return "prior:" + std::to_string(l.sector);
  return "r" + std::to_string(l.readout) + ":o" + std::to_string(l.observable);
}

/// Sparse triplet CSV (row_label, col, value); zero entries omitted.
inline void write_transfer_csv(std::ostream& os, const TransferMatrix& f) {
  os << "row_label,col,value\n" << std::setprecision(17);
  for (Eigen::Index r = 0; r < f.entries.rows(); ++r)
    for (Eigen::Index c = 0; c < f.entries.cols(); ++c)
      if (f.entries(r, c) != 0.0) os << row_label(f.rows[static_cast<std::size_t>(r)]) << ',' << c << ',' << f.entries(r, c) << '\n';
}

/// CSV (readout_index, channel_label, axis, value) of measurement rows.
inline void write_measurements_csv(std::ostream& os, const RVector& o, const ObservableSet& obs) {
  os << "readout_index,channel_label,axis,value\n" << std::setprecision(17);
  const Eigen::Index n_o = static_cast<Eigen::Index>(obs.size());
  for (Eigen::Index k = 0; k < o.size(); ++k) {
    const auto& l = obs.labels[static_cast<std::size_t>(k % n_o)];
    os << k / n_o << ',' << l.channel_label() << ',' << l.axis_label() << ',' << o(k) << '\n';
  }
}

inline RVector read_measurements_csv(std::istream& is) {
  std::string line;
  std::getline(is, line);
  std::vector<double> v;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto pos = line.find_last_of(',');
    v.push_back(std::stod(line.substr(pos + 1)));
  }
  return Eigen::Map<RVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline void write_fid_csv(std::ostream& os, std::span<const double> t, const CVector& s) {
  os << "t,re,im\n" << std::setprecision(17);
  for (std::size_t k = 0; k < t.size(); ++k)
    os << t[k] << ',' << s(static_cast<Eigen::Index>(k)).real() << ',' << s(static_cast<Eigen::Index>(k)).imag() << '\n';
}

inline void write_trajectory_csv(std::ostream& os, std::span<const double> trajectory) {
  os << "iteration,f\n" << std::setprecision(17);
  for (std::size_t k = 0; k < trajectory.size(); ++k) os << k << ',' << trajectory[k] << '\n';
}

inline json read_json_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return json::parse(in);
}

inline void write_text_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

inline void write_json_file(const std::filesystem::path& p, const json& j) { write_text_file(p, j.dump(2) + "\n"); }

/// FNV-1a 64-bit hash as 16 hex digits.
inline std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace startomo::io

#endif  // STARTOMO_IO_HPP
