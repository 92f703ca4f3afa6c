#include "mfh/io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <regex>
#include <sstream>

namespace mfh::io {

namespace {

const Json& require(const Json& obj, const std::string& key, const std::string& path) {
  const std::string where = path.empty() ? key : path + "." + key;
  if (!obj.is_object()) throw ParseError(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where, "missing field");
  return *it;
}

int read_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ParseError(path, "expected an integer");
  return j.get<int>();
}

double read_number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path, "expected a number");
  return j.get<double>();
}

Vector vector_from_json(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = read_number(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

Json vector_to_json(const Vector& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Json seq_to_json(const MatrixSeq& seq) {
  Json j = Json::array();
  for (const auto& m : seq) j.push_back(matrix_to_json(m));
  return j;
}

MatrixSeq seq_from_json(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "expected an array of matrices");
  MatrixSeq seq;
  for (std::size_t k = 0; k < j.size(); ++k) seq.push_back(matrix_from_json(j[k], path + "[" + std::to_string(k) + "]"));
  return seq;
}

void check_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& path) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(path + ": dimension mismatch: expected " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
}

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(std::numeric_limits<double>::max_digits10) << x;
  return s.str();
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json j = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(std::move(row));
  }
  return j;
}

Matrix matrix_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ParseError(path, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array()) throw ParseError(path + "[0]", "expected an array of numbers");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array()) throw ParseError(row_path, "expected an array of numbers");
    if (j[r].size() != cols) throw ParseError(row_path, "ragged row: expected " + std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          read_number(j[r][c], row_path + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

SystemDocument parse_system(const Json& doc) {
  if (!doc.is_object()) throw ParseError("", "system document must be a JSON object");
  SystemDocument out;
  auto& sys = out.system;
  const Json& dims = require(doc, "dims", "");
  sys.dims.n = read_int(require(dims, "n", "dims"), "dims.n");
  sys.dims.l = read_int(require(dims, "l", "dims"), "dims.l");
  sys.dims.q = read_int(require(dims, "q", "dims"), "dims.q");
  sys.dims.m_phi = read_int(require(dims, "m_phi", "dims"), "dims.m_phi");
  sys.dims.horizon = read_int(require(doc, "horizon", ""), "horizon");
  if (sys.dims.n < 1 || sys.dims.l < 1 || sys.dims.q < 1 || sys.dims.m_phi < 1) {
    throw ParseError("dims", "all dimensions must be >= 1");
  }
  if (sys.dims.horizon < 0) throw ParseError("horizon", "must be >= 0");
  if (doc.contains("gamma")) {
    const double g = read_number(doc["gamma"], "gamma");
    if (!(g > 0)) throw ParseError("gamma", "must be positive");
    out.gamma = g;
  }

  sys.x0 = vector_from_json(require(doc, "x0", ""), "x0");
  if (sys.x0.size() != sys.dims.n) {
    throw DimensionError("x0: dimension mismatch: expected length " + std::to_string(sys.dims.n) + ", got " +
                         std::to_string(sys.x0.size()));
  }

  const Json& stages = require(doc, "stages", "");
  if (!stages.is_array()) throw ParseError("stages", "expected an array");
  if (static_cast<int>(stages.size()) != sys.dims.stage_count()) {
    throw DimensionError("stages: expected " + std::to_string(sys.dims.stage_count()) + " entries (horizon + 1), got " +
                         std::to_string(stages.size()));
  }
  const auto& d = sys.dims;
  for (std::size_t k = 0; k < stages.size(); ++k) {
    const std::string sp = "stages[" + std::to_string(k) + "]";
    const Json& sj = stages[k];
    if (!sj.is_object()) throw ParseError(sp, "expected an object");
    StageParams s;
    struct Field {
      const char* name;
      Matrix* target;
      int rows, cols;
    };
    const Field fields[] = {{"A", &s.A, d.n, d.n},   {"At", &s.At, d.n, d.n},      {"B", &s.B, d.n, d.l},
                            {"Bt", &s.Bt, d.n, d.l}, {"C", &s.C, d.n, d.n},        {"Ct", &s.Ct, d.n, d.n},
                            {"D", &s.D, d.n, d.l},   {"Dt", &s.Dt, d.n, d.l},      {"F1", &s.F1, d.n, d.q},
                            {"Phi", &s.Phi, d.m_phi, d.n}, {"Psi", &s.Psi, d.q, d.q}};
    for (const auto& f : fields) {
      const std::string fp = sp + "." + f.name;
      *f.target = matrix_from_json(require(sj, f.name, sp), fp);
      check_shape(*f.target, f.rows, f.cols, fp);
    }
    sys.stages.push_back(std::move(s));
  }
  return out;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("", "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError("", path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

SystemDocument load_system(const std::string& path) { return parse_system(read_json_file(path)); }

Json to_json(const SystemDocument& doc) {
  const auto& sys = doc.system;
  Json j;
  j["horizon"] = sys.dims.horizon;
  if (doc.gamma) j["gamma"] = *doc.gamma;
  j["dims"] = {{"n", sys.dims.n}, {"l", sys.dims.l}, {"q", sys.dims.q}, {"m_phi", sys.dims.m_phi}};
  j["x0"] = vector_to_json(sys.x0);
  j["stages"] = Json::array();
  for (const auto& s : sys.stages) {
    j["stages"].push_back({{"A", matrix_to_json(s.A)},
                           {"At", matrix_to_json(s.At)},
                           {"B", matrix_to_json(s.B)},
                           {"Bt", matrix_to_json(s.Bt)},
                           {"C", matrix_to_json(s.C)},
                           {"Ct", matrix_to_json(s.Ct)},
                           {"D", matrix_to_json(s.D)},
                           {"Dt", matrix_to_json(s.Dt)},
                           {"F1", matrix_to_json(s.F1)},
                           {"Phi", matrix_to_json(s.Phi)},
                           {"Psi", matrix_to_json(s.Psi)}});
  }
  return j;
}

std::string pretty(const Json& j) {
  // Keep every innermost numeric array (a matrix row) on one line.
  static const std::regex row(R"(\[\s*(-?[0-9][^\[\]{}]*?)\s*\])");
  const std::string text = j.dump(2);
  std::string out;
  auto begin = std::sregex_iterator(text.begin(), text.end(), row);
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    out.append(text, last, static_cast<std::size_t>(it->position()) - last);
    std::string body = (*it)[1].str();
    body = std::regex_replace(body, std::regex(R"(,\s+)"), ", ");
    out += "[" + body + "]";
    last = static_cast<std::size_t>(it->position() + it->length());
  }
  out.append(text, last);
  return out;
}

void save_system(const SystemDocument& doc, const std::string& path) { write_text_file(path, pretty(to_json(doc)) + "\n"); }

Json to_json(const H2HinfSolution& sol) {
  Json j;
  j["gamma"] = sol.gamma;
  j["h2_state_weight"] = sol.h2_state_weight;
  j["h2_value"] = sol.h2_value;
  j["hinf_value"] = sol.hinf_value;
  for (const char* name : {"P1", "Q1", "Pt1", "Qt1", "U", "Ut", "V", "Vt"}) j[name] = seq_to_json(sol.sequence(name));
  j["H_ops"] = {{"H", seq_to_json(sol.H)}, {"Ht", seq_to_json(sol.Ht)}, {"H1", seq_to_json(sol.H1)},
                {"Ht1", seq_to_json(sol.Ht1)}};
  return j;
}

H2HinfSolution h2hinf_from_json(const Json& j) {
  H2HinfSolution sol;
  sol.gamma = read_number(require(j, "gamma", ""), "gamma");
  if (j.contains("h2_state_weight")) sol.h2_state_weight = read_number(j["h2_state_weight"], "h2_state_weight");
  sol.h2_value = read_number(require(j, "h2_value", ""), "h2_value");
  sol.hinf_value = read_number(require(j, "hinf_value", ""), "hinf_value");
  sol.P1 = seq_from_json(require(j, "P1", ""), "P1");
  sol.Q1 = seq_from_json(require(j, "Q1", ""), "Q1");
  sol.Pt1 = seq_from_json(require(j, "Pt1", ""), "Pt1");
  sol.Qt1 = seq_from_json(require(j, "Qt1", ""), "Qt1");
  sol.U = seq_from_json(require(j, "U", ""), "U");
  sol.Ut = seq_from_json(require(j, "Ut", ""), "Ut");
  sol.V = seq_from_json(require(j, "V", ""), "V");
  sol.Vt = seq_from_json(require(j, "Vt", ""), "Vt");
  const Json& ops = require(j, "H_ops", "");
  sol.H = seq_from_json(require(ops, "H", "H_ops"), "H_ops.H");
  sol.Ht = seq_from_json(require(ops, "Ht", "H_ops"), "H_ops.Ht");
  sol.H1 = seq_from_json(require(ops, "H1", "H_ops"), "H_ops.H1");
  sol.Ht1 = seq_from_json(require(ops, "Ht1", "H_ops"), "H_ops.Ht1");
  return sol;
}

Json to_json(const SbrlSolution& sol) {
  Json j;
  j["gamma"] = sol.gamma;
  j["P"] = seq_to_json(sol.P);
  j["Q"] = seq_to_json(sol.Q);
  j["V"] = seq_to_json(sol.V);
  MatrixSeq Vt;
  for (std::size_t k = 0; k < sol.V.size(); ++k) Vt.push_back(sol.Vbb[k] - sol.V[k]);
  j["Vt"] = seq_to_json(Vt);
  j["H_ops"] = {{"H", seq_to_json(sol.H)}, {"Ht", seq_to_json(sol.Ht)}};
  return j;
}

Json to_json(const LqSolution& sol) {
  Json j;
  j["optimal_value"] = sol.optimal_value;
  j["Pt"] = seq_to_json(sol.Pt);
  j["Qt"] = seq_to_json(sol.Qt);
  j["U"] = seq_to_json(sol.U);
  j["Ut"] = seq_to_json(sol.Ut);
  j["H_ops"] = {{"H1", seq_to_json(sol.H1)}, {"Ht1", seq_to_json(sol.Ht1)}};
  return j;
}

Json to_json(const FeasibilityFailure& failure) {
  return {{"step", failure.step}, {"operator", to_string(failure.which)}, {"min_eigenvalue", failure.min_eigenvalue},
          {"message", failure.describe()}};
}

Json to_json(const GammaSearchResult& r) {
  Json j;
  j["gamma_star"] = r.gamma_star;
  j["certified_gamma"] = r.certified_gamma;
  j["iterations"] = r.iterations;
  j["non_monotone_detected"] = r.non_monotone_detected;
  j["warnings"] = r.warnings;
  j["scan"] = Json::array();
  for (std::size_t i = 0; i < r.scan_gammas.size(); ++i) {
    j["scan"].push_back({{"gamma", r.scan_gammas[i]}, {"feasible", static_cast<bool>(r.scan_feasible[i])}});
  }
  j["certificate"] = to_json(r.certificate);
  return j;
}

Json to_json(const McEstimate& e) {
  Json j;
  j["n_paths"] = e.n_paths;
  j["seed"] = e.seed;
  j["noise"] = to_string(e.noise);
  auto stat = [](const ScalarStat& s) { return Json{{"mean", s.mean}, {"se", s.se}}; };
  j["jk"] = stat(e.jk);
  j["j2"] = stat(e.j2);
  j["state_energy"] = stat(e.state_energy);
  j["h2_criterion"] = stat(e.h2_criterion);
  j["mean_hat"] = Json::array();
  j["mean_se"] = Json::array();
  for (std::size_t k = 0; k < e.mean_hat.size(); ++k) {
    j["mean_hat"].push_back(vector_to_json(e.mean_hat[k]));
    j["mean_se"].push_back(vector_to_json(e.mean_se[k]));
  }
  j["cov_hat"] = seq_to_json(e.cov_hat);
  j["cov_se"] = seq_to_json(e.cov_se);
  return j;
}

Json to_json(const ParticleReport& r) {
  Json j;
  j["median_decreasing"] = r.median_decreasing;
  j["levels"] = Json::array();
  for (const auto& level : r.levels) {
    j["levels"].push_back({{"particles", level.particles},
                           {"median", level.median},
                           {"mean", level.mean},
                           {"deviations", level.deviations}});
  }
  return j;
}

void write_sequence_csv(std::ostream& out, const MatrixSeq& seq) {
  out << "k,row,col,value\n";
  for (std::size_t k = 0; k < seq.size(); ++k) {
    for (Eigen::Index r = 0; r < seq[k].rows(); ++r) {
      for (Eigen::Index c = 0; c < seq[k].cols(); ++c) out << k << ',' << r << ',' << c << ',' << fmt(seq[k](r, c)) << '\n';
    }
  }
}

MatrixSeq read_sequence_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "k,row,col,value") throw ParseError("header", "expected k,row,col,value");
  std::map<std::size_t, std::map<std::pair<Eigen::Index, Eigen::Index>, double>> cells;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream s(line);
    std::size_t k = 0;
    Eigen::Index r = 0, c = 0;
    double v = 0;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(s >> k >> c1 >> r >> c2 >> c >> c3 >> v) || c1 != ',' || c2 != ',' || c3 != ',') {
      throw ParseError("line " + std::to_string(lineno), "malformed row");
    }
    cells[k][{r, c}] = v;
  }
  MatrixSeq seq;
  for (const auto& [k, entries] : cells) {
    if (k != seq.size()) throw ParseError("k", "steps must be contiguous from 0");
    Eigen::Index rows = 0, cols = 0;
    for (const auto& [rc, v] : entries) {
      rows = std::max(rows, rc.first + 1);
      cols = std::max(cols, rc.second + 1);
    }
    if (static_cast<std::size_t>(rows * cols) != entries.size()) throw ParseError("k=" + std::to_string(k), "missing entries");
    Matrix m(rows, cols);
    for (const auto& [rc, v] : entries) m(rc.first, rc.second) = v;
    seq.push_back(std::move(m));
  }
  return seq;
}

void write_moments_csv(std::ostream& out, const MomentTrajectory& t) {
  out << "k,quantity,value\n";
  for (std::size_t k = 0; k < t.mean.size(); ++k) {
    for (Eigen::Index i = 0; i < t.mean[k].size(); ++i) out << k << ",mean[" << i << "]," << fmt(t.mean[k](i)) << '\n';
    for (Eigen::Index r = 0; r < t.cov[k].rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cov[k].cols(); ++c) {
        out << k << ",cov[" << r << "][" << c << "]," << fmt(t.cov[k](r, c)) << '\n';
      }
    }
    if (k < t.output_energy.size()) {
      out << k << ",output_energy," << fmt(t.output_energy[k]) << '\n';
      out << k << ",disturbance_energy," << fmt(t.disturbance_energy[k]) << '\n';
      out << k << ",control_energy," << fmt(t.control_energy[k]) << '\n';
      out << k << ",state_energy," << fmt(t.state_energy[k]) << '\n';
    }
  }
}

void write_costs_csv(std::ostream& out, const CostBreakdown& c) {
  out << "k,quantity,value\n";
  for (const auto& s : c.per_step) {
    out << s.k << ",disturbance_energy," << fmt(s.disturbance_energy) << '\n';
    out << s.k << ",output_energy," << fmt(s.output_energy) << '\n';
    out << s.k << ",state_energy," << fmt(s.state_energy) << '\n';
  }
  out << "all,jk," << fmt(c.jk) << '\n';
  out << "all,j2," << fmt(c.j2) << '\n';
  out << "all,state_energy," << fmt(c.state_energy) << '\n';
}

void write_estimate_csv(std::ostream& out, const McEstimate& e) {
  out << "k,quantity,value\n";
  for (std::size_t k = 0; k < e.mean_hat.size(); ++k) {
    for (Eigen::Index i = 0; i < e.mean_hat[k].size(); ++i) {
      out << k << ",mean_hat[" << i << "]," << fmt(e.mean_hat[k](i)) << '\n';
      out << k << ",mean_se[" << i << "]," << fmt(e.mean_se[k](i)) << '\n';
    }
    for (Eigen::Index r = 0; r < e.cov_hat[k].rows(); ++r) {
      for (Eigen::Index c = 0; c < e.cov_hat[k].cols(); ++c) {
        out << k << ",cov_hat[" << r << "][" << c << "]," << fmt(e.cov_hat[k](r, c)) << '\n';
        out << k << ",cov_se[" << r << "][" << c << "]," << fmt(e.cov_se[k](r, c)) << '\n';
      }
    }
  }
  const std::pair<const char*, ScalarStat> scalars[] = {
      {"jk", e.jk}, {"j2", e.j2}, {"state_energy", e.state_energy}, {"h2_criterion", e.h2_criterion}};
  for (const auto& [name, s] : scalars) {
    out << "all," << name << "," << fmt(s.mean) << '\n';
    out << "all," << name << "_se," << fmt(s.se) << '\n';
  }
}

}  // namespace mfh::io
