// SPDX-License-Identifier: Apache-2.0

#include "specmin/problems_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace specmin {

namespace {

std::string kind_to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::LinearSof: return "linear-sof";
    case ProblemKind::Affine: return "affine";
    case ProblemKind::Delay: return "delay";
  }
  return "?";
}

ProblemKind kind_from_string(const std::string& s, const std::string& origin) {
  if (s == "linear-sof") return ProblemKind::LinearSof;
  if (s == "affine") return ProblemKind::Affine;
  if (s == "delay") return ProblemKind::Delay;
  throw ParseError(origin + ": unknown kind '" + s + "'");
}

// Applies fixed entries to an affine parameterization: pinned directions are
// folded into the base, free ones keep their relative order.
MatrixFamily reduce_family(const Eigen::MatrixXd& base,
                           const std::vector<Eigen::MatrixXd>& dirs,
                           const std::map<int, double>& fixed) {
  Eigen::MatrixXd b = base;
  std::vector<Eigen::MatrixXd> free_dirs;
  for (int k = 0; k < static_cast<int>(dirs.size()); ++k) {
    auto it = fixed.find(k);
    if (it != fixed.end())
      b += it->second * dirs[k];
    else
      free_dirs.push_back(dirs[k]);
  }
  return MatrixFamily(b, std::move(free_dirs));
}

}  // namespace

int ProblemSpec::raw_params() const {
  switch (kind) {
    case ProblemKind::LinearSof:
      return static_cast<int>(B.cols() * C.rows());
    case ProblemKind::Affine:
      return static_cast<int>(directions.size());
    case ProblemKind::Delay:
      return delay_terms.empty() ? 0
                                 : static_cast<int>(delay_terms.front().directions.size());
  }
  return 0;
}

MatrixFamily ProblemSpec::build_family() const {
  if (kind == ProblemKind::Delay)
    throw InvalidInputError("ProblemSpec: delay problem has no single matrix family");
  if (kind == ProblemKind::LinearSof) {
    const MatrixFamily full = sof_family(A, B, C);
    return reduce_family(full.base, full.directions, fixed);
  }
  return reduce_family(A0, directions, fixed);
}

DelayFamily ProblemSpec::build_delay_family() const {
  if (kind != ProblemKind::Delay)
    throw InvalidInputError("ProblemSpec: not a delay problem");
  std::vector<DelayFamily::Term> terms;
  terms.reserve(delay_terms.size());
  for (const auto& t : delay_terms)
    terms.push_back({reduce_family(t.base, t.directions, fixed), t.tau});
  return DelayFamily(std::move(terms));
}

std::unique_ptr<SpectralProblem> ProblemSpec::make_problem() const {
  if (is_delay())
    return std::make_unique<DelaySpectralProblem>(build_delay_family());
  return std::make_unique<LinearSpectralProblem>(build_family());
}

bool ProblemSpec::operator==(const ProblemSpec& other) const {
  auto mat_eq = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  if (kind != other.kind || name != other.name || fixed != other.fixed) return false;
  if (!mat_eq(A, other.A) || !mat_eq(B, other.B) || !mat_eq(C, other.C) ||
      !mat_eq(A0, other.A0))
    return false;
  if (directions.size() != other.directions.size()) return false;
  for (std::size_t i = 0; i < directions.size(); ++i)
    if (!mat_eq(directions[i], other.directions[i])) return false;
  if (delay_terms.size() != other.delay_terms.size()) return false;
  for (std::size_t i = 0; i < delay_terms.size(); ++i) {
    const auto& a = delay_terms[i];
    const auto& b = other.delay_terms[i];
    if (a.tau != b.tau || !mat_eq(a.base, b.base)) return false;
    if (a.directions.size() != b.directions.size()) return false;
    for (std::size_t k = 0; k < a.directions.size(); ++k)
      if (!mat_eq(a.directions[k], b.directions[k])) return false;
  }
  return true;
}

ProblemSpec builtin(const std::string& name) {
  if (name == "fig1-2d") {
    ProblemSpec s;
    s.kind = ProblemKind::LinearSof;
    s.name = "fig1-2d";
    s.A.resize(3, 3);
    s.A << 0.1, -0.03, 0.2,
           0.2, 0.05, 0.01,
           -0.06, 0.2, 0.07;
    s.B.resize(3, 1);
    s.B << -0.5, -1.0, 0.5;
    s.C = Eigen::MatrixXd::Identity(3, 3);
    s.fixed[2] = 1.4;  // third gain entry pinned
    return s;
  }
  if (name == "delay3-feedback") {
    ProblemSpec s;
    s.kind = ProblemKind::Delay;
    s.name = "delay3-feedback";

    ProblemSpec::DelayTermSpec t0;
    t0.tau = 0.0;
    t0.base.resize(3, 3);
    t0.base << -0.08, -0.03, 0.2,
               0.2, -0.04, -0.005,
               -0.06, -0.2, -0.07;
    for (int k = 0; k < 3; ++k) t0.directions.push_back(Eigen::MatrixXd::Zero(3, 3));

    ProblemSpec::DelayTermSpec t1;
    t1.tau = 5.0;
    t1.base = Eigen::MatrixXd::Zero(3, 3);
    Eigen::VectorXd b(3);
    b << -0.1, -0.2, 0.1;
    for (int k = 0; k < 3; ++k) {
      Eigen::MatrixXd dir = Eigen::MatrixXd::Zero(3, 3);
      dir.col(k) = b;
      t1.directions.push_back(dir);
    }
    s.delay_terms = {t0, t1};
    return s;
  }
  throw InvalidInputError("builtin: unknown problem '" + name + "'");
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

namespace {

class LineReader {
public:
  LineReader(std::istream& in, std::string origin)
      : in_(in), origin_(std::move(origin)) {}

  // Next non-empty, non-comment line; false at EOF.
  bool next(std::string* line) {
    std::string raw;
    while (std::getline(in_, raw)) {
      ++lineno_;
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      while (!raw.empty() && (raw.back() == '\r' || raw.back() == ' ' || raw.back() == '\t'))
        raw.pop_back();
      std::size_t start = raw.find_first_not_of(" \t");
      if (start == std::string::npos) continue;
      *line = raw.substr(start);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(origin_ + ":" + std::to_string(lineno_) + ": " + msg);
  }

  Eigen::MatrixXd read_matrix(int rows, int cols) {
    if (rows <= 0 || cols <= 0) fail("matrix dimensions must be positive");
    Eigen::MatrixXd M(rows, cols);
    std::string line;
    for (int r = 0; r < rows; ++r) {
      if (!next(&line)) fail("unexpected end of file inside matrix (row " +
                             std::to_string(r) + " of " + std::to_string(rows) + ")");
      std::istringstream row(line);
      for (int c = 0; c < cols; ++c)
        if (!(row >> M(r, c)))
          fail("matrix row " + std::to_string(r) + " needs " + std::to_string(cols) +
               " entries");
      double extra;
      if (row >> extra) fail("matrix row " + std::to_string(r) + " has extra entries");
    }
    return M;
  }

private:
  std::istream& in_;
  std::string origin_;
  int lineno_ = 0;
};

void write_matrix(std::ostream& out, const Eigen::MatrixXd& M) {
  out << std::setprecision(17);
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      if (c) out << ' ';
      out << M(r, c);
    }
    out << '\n';
  }
}

}  // namespace

ProblemSpec parse(std::istream& in, const std::string& origin) {
  LineReader reader(in, origin);
  ProblemSpec spec;
  bool have_kind = false;

  std::string line;
  while (reader.next(&line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;

    if (word == "kind:") {
      std::string k;
      if (!(ls >> k)) reader.fail("kind: missing value");
      spec.kind = kind_from_string(k, origin);
      have_kind = true;
    } else if (word == "name:") {
      std::string rest;
      std::getline(ls, rest);
      const auto start = rest.find_first_not_of(" \t");
      spec.name = start == std::string::npos ? "" : rest.substr(start);
    } else if (word == "matrix") {
      std::string which;
      int rows, cols;
      if (!(ls >> which >> rows >> cols)) reader.fail("matrix: expected 'matrix NAME ROWS COLS'");
      const Eigen::MatrixXd M = reader.read_matrix(rows, cols);
      if (which == "A") spec.A = M;
      else if (which == "B") spec.B = M;
      else if (which == "C") spec.C = M;
      else if (which == "A0") spec.A0 = M;
      else reader.fail("unknown matrix name '" + which + "'");
    } else if (word == "direction") {
      int k, rows, cols;
      if (!(ls >> k >> rows >> cols))
        reader.fail("direction: expected 'direction K ROWS COLS'");
      if (k != static_cast<int>(spec.directions.size()))
        reader.fail("direction blocks must appear in order starting at 0");
      spec.directions.push_back(reader.read_matrix(rows, cols));
    } else if (word == "term") {
      int j;
      std::string tau_kw, block_kw;
      double tau;
      if (!(ls >> j >> tau_kw >> tau >> block_kw) || tau_kw != "tau")
        reader.fail("term: expected 'term J tau T matrix|direction ...'");
      if (j > static_cast<int>(spec.delay_terms.size()))
        reader.fail("term blocks must appear in order starting at 0");
      if (j == static_cast<int>(spec.delay_terms.size())) {
        ProblemSpec::DelayTermSpec t;
        t.tau = tau;
        spec.delay_terms.push_back(t);
      } else if (spec.delay_terms[j].tau != tau) {
        reader.fail("term " + std::to_string(j) + " repeats with a different tau");
      }
      auto& term = spec.delay_terms[j];
      if (block_kw == "matrix") {
        int rows, cols;
        if (!(ls >> rows >> cols)) reader.fail("term matrix: missing dimensions");
        term.base = reader.read_matrix(rows, cols);
      } else if (block_kw == "direction") {
        int k, rows, cols;
        if (!(ls >> k >> rows >> cols)) reader.fail("term direction: missing fields");
        if (k != static_cast<int>(term.directions.size()))
          reader.fail("term direction blocks must appear in order starting at 0");
        term.directions.push_back(reader.read_matrix(rows, cols));
      } else {
        reader.fail("term: expected 'matrix' or 'direction', got '" + block_kw + "'");
      }
    } else if (word == "fixed") {
      int idx;
      double val;
      if (!(ls >> idx >> val)) reader.fail("fixed: expected 'fixed INDEX VALUE'");
      spec.fixed[idx] = val;
    } else {
      reader.fail("unrecognized directive '" + word + "'");
    }
  }

  if (!have_kind) throw ParseError(origin + ": missing 'kind:' line");

  // Structural validation with named diagnostics.
  switch (spec.kind) {
    case ProblemKind::LinearSof:
      if (spec.A.size() == 0) throw ParseError(origin + ": linear-sof needs matrix A");
      if (spec.B.size() == 0) throw ParseError(origin + ": linear-sof needs matrix B");
      if (spec.C.size() == 0) throw ParseError(origin + ": linear-sof needs matrix C");
      if (spec.A.rows() != spec.A.cols())
        throw ParseError(origin + ": matrix A must be square");
      if (spec.B.rows() != spec.A.rows())
        throw ParseError(origin + ": matrix B row count must match A");
      if (spec.C.cols() != spec.A.cols())
        throw ParseError(origin + ": matrix C column count must match A");
      break;
    case ProblemKind::Affine: {
      if (spec.A0.size() == 0) throw ParseError(origin + ": affine needs matrix A0");
      if (spec.A0.rows() != spec.A0.cols())
        throw ParseError(origin + ": matrix A0 must be square");
      for (const auto& d : spec.directions)
        if (d.rows() != spec.A0.rows() || d.cols() != spec.A0.cols())
          throw ParseError(origin + ": direction dimension mismatch with A0");
      break;
    }
    case ProblemKind::Delay: {
      if (spec.delay_terms.empty())
        throw ParseError(origin + ": delay needs at least term 0");
      if (spec.delay_terms.front().tau != 0.0)
        throw ParseError(origin + ": term 0 must have tau 0");
      const auto& t0 = spec.delay_terms.front();
      if (t0.base.size() == 0) throw ParseError(origin + ": term 0 needs a matrix");
      const auto N = t0.base.rows();
      const auto n = t0.directions.size();
      for (const auto& t : spec.delay_terms) {
        if (t.tau < 0.0) throw ParseError(origin + ": negative delay");
        if (t.base.rows() != N || t.base.cols() != N)
          throw ParseError(origin + ": delay term matrix dimension mismatch");
        if (t.directions.size() != n)
          throw ParseError(origin + ": every delay term needs " + std::to_string(n) +
                           " direction blocks");
        for (const auto& d : t.directions)
          if (d.rows() != N || d.cols() != N)
            throw ParseError(origin + ": delay direction dimension mismatch");
      }
      break;
    }
  }
  for (const auto& [idx, val] : spec.fixed) {
    (void)val;
    if (idx < 0 || idx >= spec.raw_params())
      throw ParseError(origin + ": fixed index " + std::to_string(idx) +
                       " out of range (n = " + std::to_string(spec.raw_params()) + ")");
  }
  return spec;
}

void write(const ProblemSpec& spec, std::ostream& out) {
  out << "kind: " << kind_to_string(spec.kind) << '\n';
  out << "name: " << spec.name << '\n';
  out << std::setprecision(17);
  switch (spec.kind) {
    case ProblemKind::LinearSof:
      out << "matrix A " << spec.A.rows() << ' ' << spec.A.cols() << '\n';
      write_matrix(out, spec.A);
      out << "matrix B " << spec.B.rows() << ' ' << spec.B.cols() << '\n';
      write_matrix(out, spec.B);
      out << "matrix C " << spec.C.rows() << ' ' << spec.C.cols() << '\n';
      write_matrix(out, spec.C);
      break;
    case ProblemKind::Affine:
      out << "matrix A0 " << spec.A0.rows() << ' ' << spec.A0.cols() << '\n';
      write_matrix(out, spec.A0);
      for (std::size_t k = 0; k < spec.directions.size(); ++k) {
        out << "direction " << k << ' ' << spec.directions[k].rows() << ' '
            << spec.directions[k].cols() << '\n';
        write_matrix(out, spec.directions[k]);
      }
      break;
    case ProblemKind::Delay:
      for (std::size_t j = 0; j < spec.delay_terms.size(); ++j) {
        const auto& t = spec.delay_terms[j];
        out << "term " << j << " tau " << t.tau << " matrix " << t.base.rows() << ' '
            << t.base.cols() << '\n';
        write_matrix(out, t.base);
        for (std::size_t k = 0; k < t.directions.size(); ++k) {
          out << "term " << j << " tau " << t.tau << " direction " << k << ' '
              << t.directions[k].rows() << ' ' << t.directions[k].cols() << '\n';
          write_matrix(out, t.directions[k]);
        }
      }
      break;
  }
  for (const auto& [idx, val] : spec.fixed) out << "fixed " << idx << ' ' << val << '\n';
}

ProblemSpec load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  return parse(in, path);
}

void save(const ProblemSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError(path + ": cannot open file for writing");
  write(spec, out);
  if (!out) throw InvalidInputError(path + ": write failed");
}

// ---------------------------------------------------------------------------
// Grid evaluation
// ---------------------------------------------------------------------------

void GridTable::write_tsv(std::ostream& out) const {
  out << "x1\tx2\talpha\n";
  out << std::setprecision(12);
  for (std::size_t i = 0; i < x1.size(); ++i)
    for (std::size_t j = 0; j < x2.size(); ++j)
      out << x1[i] << '\t' << x2[j] << '\t' << alpha(static_cast<Eigen::Index>(i),
                                                     static_cast<Eigen::Index>(j))
          << '\n';
}

GridTable::Minimum GridTable::minimum() const {
  Minimum m{x1[0], x2[0], alpha(0, 0)};
  for (std::size_t i = 0; i < x1.size(); ++i)
    for (std::size_t j = 0; j < x2.size(); ++j)
      if (alpha(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) < m.alpha) {
        m.alpha = alpha(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        m.x1 = x1[i];
        m.x2 = x2[j];
      }
  return m;
}

GridTable grid_eval(const ProblemSpec& spec, const std::array<double, 2>& range1,
                    const std::array<double, 2>& range2, int resolution) {
  if (spec.free_params() != 2)
    throw InvalidInputError("grid_eval: problem must have exactly 2 free parameters");
  if (resolution < 1) throw InvalidInputError("grid_eval: resolution must be >= 1");

  auto axis = [&](const std::array<double, 2>& r) {
    std::vector<double> pts;
    if (resolution == 1) {
      pts.push_back(0.5 * (r[0] + r[1]));
    } else {
      for (int i = 0; i < resolution; ++i)
        pts.push_back(r[0] + (r[1] - r[0]) * i / (resolution - 1));
    }
    return pts;
  };

  GridTable table;
  table.x1 = axis(range1);
  table.x2 = axis(range2);
  table.alpha.resize(static_cast<Eigen::Index>(table.x1.size()),
                     static_cast<Eigen::Index>(table.x2.size()));

  const auto problem = spec.make_problem();
  Eigen::VectorXd x(2);
  for (std::size_t i = 0; i < table.x1.size(); ++i)
    for (std::size_t j = 0; j < table.x2.size(); ++j) {
      x(0) = table.x1[i];
      x(1) = table.x2[j];
      table.alpha(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          problem->alpha(x);
    }
  return table;
}

}  // namespace specmin
