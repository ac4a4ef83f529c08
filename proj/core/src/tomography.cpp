#include "kpo/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "kpo/error.hpp"
#include "kpo/io.hpp"
#include "kpo/parallel.hpp"

namespace kpo {

namespace {

constexpr double kTwoOverPi = 2.0 / std::numbers::pi;

}  // namespace

// ---------------------------------------------------------------------------
// PhaseGrid / WignerMap

double PhaseGrid::re(int j) const { return re_min + j * re_step(); }
double PhaseGrid::im(int i) const { return im_min + i * im_step(); }

double PhaseGrid::max_radius() const {
  const double x = std::max(std::abs(re_min), std::abs(re_max));
  const double y = std::max(std::abs(im_min), std::abs(im_max));
  return std::hypot(x, y);
}

std::vector<cplx> PhaseGrid::points() const {
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(re_count) * static_cast<std::size_t>(im_count));
  for (int i = 0; i < im_count; ++i) {
    for (int j = 0; j < re_count; ++j) out.emplace_back(re(j), im(i));
  }
  return out;
}

void PhaseGrid::validate() const {
  if (re_count < 2 || im_count < 2) fail(ErrorCode::usage, "phase grid needs at least 2 points per axis");
  if (!(re_max > re_min) || !(im_max > im_min) || !std::isfinite(re_min) || !std::isfinite(re_max) ||
      !std::isfinite(im_min) || !std::isfinite(im_max)) {
    fail(ErrorCode::usage, "phase grid bounds must be finite and increasing");
  }
}

double WignerMap::integral() const { return values.sum() * grid.re_step() * grid.im_step(); }

// ---------------------------------------------------------------------------
// Displaced parity

Matrix displaced_parity(cplx alpha, int dim) {
  if (dim < 2) fail(ErrorCode::invalid_dimension, "Fock dimension must be >= 2");
  const cplx beta = 2.0 * alpha;
  const double mag = std::abs(beta);
  Matrix d(dim, dim);
  // <m|D(beta)|0> = exp(-|beta|^2/2) beta^m / sqrt(m!)
  d(0, 0) = std::exp(-0.5 * mag * mag);
  for (int m = 1; m < dim; ++m) d(m, 0) = d(m - 1, 0) * beta / std::sqrt(static_cast<double>(m));
  // D a+ = (a+ - beta*) D gives the column recurrence.
  const cplx bc = std::conj(beta);
  for (int n = 0; n + 1 < dim; ++n) {
    const double inv = 1.0 / std::sqrt(n + 1.0);
    d(0, n + 1) = -bc * d(0, n) * inv;
    for (int m = 1; m < dim; ++m) {
      d(m, n + 1) = (std::sqrt(static_cast<double>(m)) * d(m - 1, n) - bc * d(m, n)) * inv;
    }
  }
  for (int n = 1; n < dim; n += 2) d.col(n) = -d.col(n);
  return 0.5 * (d + d.adjoint());
}

double wigner_at(const DensityMatrix& rho, cplx alpha) {
  const Matrix e = displaced_parity(alpha, rho.dim());
  // Tr(E rho) = sum_mn E_mn rho_nm
  return kTwoOverPi * (e.array() * rho.matrix().transpose().array()).sum().real();
}

WignerMap wigner_ideal(const DensityMatrix& rho, const PhaseGrid& grid, unsigned workers) {
  grid.validate();
  const double r = grid.max_radius();
  if (r * r > rho.dim()) {
    Error err(ErrorCode::truncation, "phase grid reaches |alpha| = " + std::to_string(r) +
                                         ", beyond sqrt(dim) for dim = " + std::to_string(rho.dim()));
    err.required_dim = static_cast<int>(std::ceil(r * r));
    throw err;
  }
  WignerMap map;
  map.grid = grid;
  map.values.resize(grid.im_count, grid.re_count);
  parallel_for(static_cast<std::size_t>(grid.im_count), workers, [&](std::size_t i) {
    for (int j = 0; j < grid.re_count; ++j) {
      map.values(static_cast<Eigen::Index>(i), j) =
          wigner_at(rho, {grid.re(j), grid.im(static_cast<int>(i))});
    }
  });
  return map;
}

// ---------------------------------------------------------------------------
// Simulated measurement

std::vector<double> MeasurementRecord::wigner() const {
  std::vector<double> out(parity.size());
  for (std::size_t i = 0; i < parity.size(); ++i) out[i] = kTwoOverPi * parity[i];
  return out;
}

namespace {

PulseSchedule tomography_schedule(const SystemParams& params, const TomographyPulse& pulse, cplx drive) {
  const double pump = pulse.pump_on ? params.pump : 0.0;
  PulseSchedule s;
  if (pulse.pre_delay > 0) s.append(hold_segment(pulse.pre_delay, pump, params.detuning));
  // The drive is resonant with the oscillator (Delta_d = Delta), so in the
  // frame of the free rotation it is a static force b = beta e^{-i phi}.
  s.append(drive_segment(pulse.duration, pump, params.detuning, std::abs(drive), params.detuning,
                         -std::arg(drive)));
  return s;
}

// <a> at the end of the pulse from vacuum, in the frame co-rotating with Delta n.
cplx linear_response(const SystemParams& params, const TomographyPulse& pulse, cplx drive,
                     const PropagationOptions& options) {
  SystemParams lin = params;
  lin.kerr = 1e-12 * params.kerr;  // linear limit of the same drive
  lin.kappa = 0;
  TomographyPulse p = pulse;
  p.pre_delay = 0;
  const PulseSchedule s = tomography_schedule(lin, p, drive);
  const double end = s.total_duration();
  const Trajectory traj = propagate(lin, s, StateVector::fock(0, params.dim),
                                    std::span<const double>(&end, 1), options);
  const Vector& psi = traj.states().back().amplitudes();
  cplx a{0, 0};
  for (int n = 1; n < params.dim; ++n) a += std::conj(psi[n - 1]) * std::sqrt(static_cast<double>(n)) * psi[n];
  return a * std::polar(1.0, params.detuning * end);
}

}  // namespace

MeasurementRecord simulate_ld_tomography(const SystemParams& params, const DensityMatrix& rho,
                                         const std::vector<cplx>& points, const TomographyPulse& pulse,
                                         unsigned workers, const PropagationOptions& options) {
  params.validate();
  if (rho.dim() != params.dim) fail(ErrorCode::invalid_dimension, "state dimension differs from params.dim");
  if (!(pulse.duration > 0) || pulse.pre_delay < 0 || pulse.max_amplitude < 0) {
    fail(ErrorCode::usage, "tomography pulse needs duration > 0 and non-negative delay and bound");
  }

  // Real-linear map from drive b to displacement gamma; with the pump on
  // the response is not holomorphic, so both quadratures are measured.
  const cplx g_re = linear_response(params, pulse, {1.0, 0.0}, options);
  const cplx g_im = linear_response(params, pulse, {0.0, 1.0}, options);
  Eigen::Matrix2d m;
  m << g_re.real(), g_im.real(), g_re.imag(), g_im.imag();
  Eigen::FullPivLU<Eigen::Matrix2d> lu(m);
  if (!lu.isInvertible()) fail(ErrorCode::calibration, "tomography pulse produces no displacement");

  MeasurementRecord record;
  record.points = points;
  record.pulse = pulse;
  record.calibration = g_re;
  record.parity.assign(points.size(), 0.0);

  // Pure components of rho for closed-system runs.
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  std::vector<std::pair<double, Vector>> components;
  for (Eigen::Index k = es.eigenvalues().size() - 1; k >= 0; --k) {
    if (es.eigenvalues()[k] > 1e-14) components.emplace_back(es.eigenvalues()[k], es.eigenvectors().col(k));
  }
  const OperatorMatrix parity_diag = parity_op(params.dim);

  parallel_for(points.size(), workers, [&](std::size_t idx) {
    const Eigen::Vector2d target(-points[idx].real(), -points[idx].imag());
    const Eigen::Vector2d b = lu.solve(target);
    const cplx drive{b[0], b[1]};
    if (pulse.max_amplitude > 0 && std::abs(drive) > pulse.max_amplitude) {
      fail(ErrorCode::calibration, "displacement " + std::to_string(std::abs(points[idx])) +
                                       " needs drive " + std::to_string(std::abs(drive)) +
                                       " rad/us above the bound " + std::to_string(pulse.max_amplitude));
    }
    const PulseSchedule s = tomography_schedule(params, pulse, drive);
    const double end = s.total_duration();
    const std::span<const double> at_end(&end, 1);
    double value = 0;
    if (params.kappa > 0) {
      const Trajectory traj = propagate(params, s, rho, at_end, options);
      value = traj.densities().back().expectation(parity_diag);
    } else {
      for (const auto& [w, v] : components) {
        const Trajectory traj = propagate(params, s, StateVector::unnormalized(v), at_end, options);
        value += w * traj.states().back().expectation(parity_diag);
      }
    }
    record.parity[idx] = value;
  });
  return record;
}

WignerMap record_to_map(const MeasurementRecord& record, const PhaseGrid& grid) {
  grid.validate();
  const auto pts = grid.points();
  if (pts.size() != record.points.size()) fail(ErrorCode::usage, "record does not match the grid size");
  WignerMap map;
  map.grid = grid;
  map.source = "simulated-measurement";
  map.values.resize(grid.im_count, grid.re_count);
  const auto w = record.wigner();
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (std::abs(pts[k] - record.points[k]) > 1e-9 * (1.0 + std::abs(pts[k]))) {
      fail(ErrorCode::usage, "record points are not in grid order");
    }
    map.values(static_cast<Eigen::Index>(k) / grid.re_count, static_cast<Eigen::Index>(k) % grid.re_count) = w[k];
  }
  return map;
}

DensityMatrix kerr_correct(const DensityMatrix& rho, double kerr, double detuning, double tau_corr) {
  if (tau_corr < 0) fail(ErrorCode::usage, "correction time must be non-negative");
  const int dim = rho.dim();
  Vector phase(dim);
  for (int n = 0; n < dim; ++n) {
    const double e = detuning * n - 0.5 * kerr * n * (n - 1.0);
    phase[n] = std::polar(1.0, e * tau_corr);  // U^dagger diagonal
  }
  Matrix out = phase.asDiagonal() * rho.matrix() * phase.conjugate().asDiagonal();
  return DensityMatrix::unnormalized(0.5 * (out + out.adjoint()));
}

// ---------------------------------------------------------------------------
// Reconstruction

namespace {

// Orthonormal Hermitian basis: diagonal units, then for each j < k the
// symmetric and antisymmetric combinations scaled by 1/sqrt(2).
struct HermitianBasis {
  int dim;
  std::vector<std::pair<int, int>> pairs;

  explicit HermitianBasis(int d) : dim(d) {
    for (int j = 0; j < d; ++j) {
      for (int k = j + 1; k < d; ++k) pairs.emplace_back(j, k);
    }
  }
  Eigen::Index size() const { return static_cast<Eigen::Index>(dim) * dim; }

  // Coordinates x_k = Tr(G_k M) of a Hermitian M (or coefficients Tr(E G_k) for Hermitian E).
  Eigen::VectorXd coords(const Matrix& m) const {
    Eigen::VectorXd x(size());
    for (int k = 0; k < dim; ++k) x[k] = m(k, k).real();
    Eigen::Index idx = dim;
    for (const auto& [j, k] : pairs) {
      x[idx++] = std::sqrt(2.0) * m(j, k).real();
      x[idx++] = -std::sqrt(2.0) * m(j, k).imag();
    }
    return x;
  }

  Matrix matrix(const Eigen::VectorXd& x) const {
    Matrix m = Matrix::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) m(k, k) = x[k];
    Eigen::Index idx = dim;
    for (const auto& [j, k] : pairs) {
      const cplx v = cplx{x[idx], -x[idx + 1]} / std::sqrt(2.0);
      m(j, k) = v;
      m(k, j) = std::conj(v);
      idx += 2;
    }
    return m;
  }
};

// Projection of v onto the probability simplex (sort-based).
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0;
  double theta = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cumsum += u[i];
    const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0) theta = t;
  }
  return (v.array() - theta).max(0.0);
}

}  // namespace

Matrix project_to_density(const Matrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (hermitian + hermitian.adjoint()));
  const Eigen::VectorXd p = project_simplex(es.eigenvalues());
  Matrix out = es.eigenvectors() * p.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  out = 0.5 * (out + out.adjoint());
  out /= out.trace().real();
  return out;
}

Reconstruction reconstruct_density(const MeasurementRecord& record, int dim,
                                   const ReconstructionOptions& options) {
  if (dim < 2) fail(ErrorCode::invalid_dimension, "Fock dimension must be >= 2");
  const HermitianBasis basis(dim);
  const Eigen::Index n_params = basis.size();
  const auto n_points = static_cast<Eigen::Index>(record.points.size());
  if (record.parity.size() != record.points.size()) fail(ErrorCode::usage, "record sizes differ");
  if (n_points < n_params) {
    fail(ErrorCode::reconstruction, "need at least dim^2 = " + std::to_string(n_params) +
                                        " points, got " + std::to_string(n_points));
  }

  Eigen::MatrixXd a(n_points, n_params);
  for (Eigen::Index i = 0; i < n_points; ++i) {
    a.row(i) = kTwoOverPi * basis.coords(displaced_parity(record.points[static_cast<std::size_t>(i)], dim)).transpose();
  }
  const auto w_std = record.wigner();
  const Eigen::Map<const Eigen::VectorXd> w(w_std.data(), n_points);

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(n_params).triangularView<Eigen::Upper>();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(r);
  const Eigen::VectorXd sv = svd.singularValues();
  const double condition = sv[0] / sv[sv.size() - 1];
  if (!(condition < options.max_condition)) {
    fail(ErrorCode::reconstruction, "design operator is ill-conditioned (condition number " +
                                        std::to_string(condition) + ")");
  }
  const Eigen::VectorXd qtw = (qr.householderQ().transpose() * w).head(n_params);
  const Eigen::VectorXd x_ls = r.triangularView<Eigen::Upper>().solve(qtw);

  // ADMM on 1/2 ||R (x - x_ls)||^2 + indicator(density matrices), x = z.
  const Eigen::MatrixXd h = r.transpose() * r;
  const double sigma = sv[0] * sv[sv.size() - 1];
  Eigen::MatrixXd lhs = h;
  lhs.diagonal().array() += sigma;
  const Eigen::LLT<Eigen::MatrixXd> llt(lhs);
  const Eigen::VectorXd hx = h * x_ls;

  Eigen::VectorXd z = basis.coords(project_to_density(basis.matrix(x_ls)));
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n_params);
  Eigen::VectorXd x = x_ls;
  int it = 0;
  bool converged = false;
  for (; it < options.max_iterations; ++it) {
    x = llt.solve(hx + sigma * (z - u));
    const Eigen::VectorXd z_old = z;
    z = basis.coords(project_to_density(basis.matrix(x + u)));
    u += x - z;
    const double primal = (x - z).norm();
    const double change = (z - z_old).norm();
    if (primal < options.tolerance && change < options.tolerance) {
      converged = true;
      ++it;
      break;
    }
  }
  if (!converged) {
    fail(ErrorCode::reconstruction, "projected least squares did not converge in " +
                                        std::to_string(options.max_iterations) + " iterations");
  }
  Reconstruction out{DensityMatrix(basis.matrix(z)), it, condition, (a * z - w).norm()};
  return out;
}

// ---------------------------------------------------------------------------
// Cat size

double cat_size(const WignerMap& map) {
  const auto& v = map.values;
  Eigen::Index i0 = 0;
  Eigen::Index j0 = 0;
  v.maxCoeff(&i0, &j0);
  if (i0 == 0 || j0 == 0 || i0 == v.rows() - 1 || j0 == v.cols() - 1) {
    fail(ErrorCode::grid_extent, "Wigner maximum lies on the grid boundary; enlarge the grid");
  }
  // Least-squares quadratic on the 3x3 neighbourhood in cell units.
  Eigen::Matrix<double, 9, 6> design;
  Eigen::Matrix<double, 9, 1> rhs;
  int row = 0;
  for (int di = -1; di <= 1; ++di) {
    for (int dj = -1; dj <= 1; ++dj) {
      const double x = dj;
      const double y = di;
      design.row(row) << 1.0, x, y, x * x, x * y, y * y;
      rhs[row] = v(i0 + di, j0 + dj);
      ++row;
    }
  }
  const Eigen::Matrix<double, 6, 1> c = design.colPivHouseholderQr().solve(rhs);
  Eigen::Matrix2d hess;
  hess << 2.0 * c[3], c[4], c[4], 2.0 * c[5];
  double dx = 0;
  double dy = 0;
  if (hess.determinant() > 0 && hess(0, 0) < 0) {
    const Eigen::Vector2d off = hess.lu().solve(-Eigen::Vector2d(c[1], c[2]));
    if (std::abs(off[0]) <= 1.0 && std::abs(off[1]) <= 1.0) {
      dx = off[0];
      dy = off[1];
    }
  }
  const double re = map.grid.re(static_cast<int>(j0)) + dx * map.grid.re_step();
  const double im = map.grid.im(static_cast<int>(i0)) + dy * map.grid.im_step();
  return std::hypot(re, im);
}

// ---------------------------------------------------------------------------
// I/O

std::string wigner_to_csv(const WignerMap& map) {
  CsvTable t;
  const auto& g = map.grid;
  t.metadata = {{"re_min", format_number(g.re_min)}, {"re_max", format_number(g.re_max)},
                {"re_count", std::to_string(g.re_count)}, {"im_min", format_number(g.im_min)},
                {"im_max", format_number(g.im_max)}, {"im_count", std::to_string(g.im_count)},
                {"source", map.source}, {"kerr_corrected", map.kerr_corrected ? "true" : "false"}};
  t.header = {"re", "im", "W"};
  for (int i = 0; i < g.im_count; ++i) {
    for (int j = 0; j < g.re_count; ++j) t.rows.push_back({g.re(j), g.im(i), map.values(i, j)});
  }
  return to_csv(t);
}

WignerMap wigner_from_csv(const std::string& text) {
  const CsvTable t = parse_csv(text);
  auto meta = [&](const std::string& key) -> std::string {
    for (const auto& [k, v] : t.metadata) {
      if (k == key) return v;
    }
    fail(ErrorCode::io, "Wigner CSV lacks metadata '" + key + "'");
  };
  WignerMap map;
  auto& g = map.grid;
  try {
    g.re_min = std::stod(meta("re_min"));
    g.re_max = std::stod(meta("re_max"));
    g.re_count = std::stoi(meta("re_count"));
    g.im_min = std::stod(meta("im_min"));
    g.im_max = std::stod(meta("im_max"));
    g.im_count = std::stoi(meta("im_count"));
  } catch (const std::logic_error&) {
    fail(ErrorCode::io, "Wigner CSV metadata is not numeric");
  }
  g.validate();
  map.source = meta("source");
  map.kerr_corrected = meta("kerr_corrected") == "true";
  const std::size_t wc = t.column("W");
  if (t.rows.size() != static_cast<std::size_t>(g.re_count) * static_cast<std::size_t>(g.im_count)) {
    fail(ErrorCode::io, "Wigner CSV row count does not match the grid");
  }
  map.values.resize(g.im_count, g.re_count);
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    map.values(static_cast<Eigen::Index>(k) / g.re_count, static_cast<Eigen::Index>(k) % g.re_count) = t.rows[k][wc];
  }
  return map;
}

std::string record_to_jsonl(const MeasurementRecord& record) {
  using nlohmann::json;
  std::ostringstream os;
  json meta{{"meta",
             {{"duration_us", record.pulse.duration},
              {"max_amplitude_rad_per_us", record.pulse.max_amplitude},
              {"pre_delay_us", record.pulse.pre_delay},
              {"pump_on", record.pulse.pump_on},
              {"calibration_re", record.calibration.real()},
              {"calibration_im", record.calibration.imag()}}}};
  os << meta.dump() << '\n';
  for (std::size_t i = 0; i < record.points.size(); ++i) {
    os << json{{"re", record.points[i].real()}, {"im", record.points[i].imag()}, {"parity", record.parity[i]}}.dump()
       << '\n';
  }
  return os.str();
}

MeasurementRecord record_from_jsonl(const std::string& text) {
  using nlohmann::json;
  MeasurementRecord record;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      if (j.contains("meta")) {
        const auto& m = j["meta"];
        record.pulse.duration = m.at("duration_us").get<double>();
        record.pulse.max_amplitude = m.at("max_amplitude_rad_per_us").get<double>();
        record.pulse.pre_delay = m.at("pre_delay_us").get<double>();
        record.pulse.pump_on = m.at("pump_on").get<bool>();
        record.calibration = {m.at("calibration_re").get<double>(), m.at("calibration_im").get<double>()};
        continue;
      }
      record.points.emplace_back(j.at("re").get<double>(), j.at("im").get<double>());
      const double p = j.at("parity").get<double>();
      if (std::abs(p) > 1.0 + 1e-9) fail(ErrorCode::io, "parity value outside [-1, 1]");
      record.parity.push_back(p);
    } catch (const json::exception& e) {
      fail(ErrorCode::io, std::string("bad measurement record line: ") + e.what());
    }
  }
  return record;
}

}  // namespace kpo
