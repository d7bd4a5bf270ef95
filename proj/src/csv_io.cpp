#include "tvopt/csv_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "tvopt/errors.hpp"

namespace tvopt {

namespace {

std::string join(const std::vector<std::string>& cols) {
  std::string line;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) line += ',';
    line += cols[i];
  }
  return line;
}

void append_indexed(std::vector<std::string>& cols, const std::string& prefix, int count) {
  for (int i = 0; i < count; ++i) cols.push_back(prefix + std::to_string(i));
}

void write_vector(std::ostream& out, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ',' << format_double(v(i));
}

void write_blanks(std::ostream& out, int count) {
  for (int i = 0; i < count; ++i) out << ',';
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  return s;
}

nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_results_csv(std::ostream& out, std::span<const TrialRecord> records) {
  out << kResultsHeader << '\n';
  for (const auto& r : records) {
    out << r.experiment << ',' << r.trial << ',' << r.n << ',' << r.seed << ','
        << format_double(r.rmse) << ',' << format_double(r.a_err_frobenius) << ','
        << format_double(r.a_err_spectral) << ',' << format_double(r.min_alpha_k) << ','
        << (r.clipped ? 1 : 0) << ',' << r.clamp_count << ',' << r.projections << ','
        << sanitize(r.status()) << '\n';
  }
}

void write_summary_json(std::ostream& out, const SweepResult& sweep) {
  nlohmann::ordered_json doc;
  doc["experiment"] = sweep.experiment;
  doc["per_N"] = nlohmann::ordered_json::array();
  for (const auto& row : sweep.summary) {
    nlohmann::ordered_json item;
    item["N"] = row.n;
    item["mean_rmse"] = number_or_null(row.mean_rmse);
    item["std_rmse"] = number_or_null(row.std_rmse);
    item["mean_a_err_fro"] = number_or_null(row.mean_a_err_fro);
    item["trials_ok"] = row.trials_ok;
    item["trials_failed"] = row.trials_failed;
    doc["per_N"].push_back(std::move(item));
  }
  out << doc.dump(2) << '\n';
}

std::vector<std::string> bundle_columns(int n, int p) {
  std::vector<std::string> cols{"t", "phase"};
  append_indexed(cols, "theta_true_", p);
  append_indexed(cols, "x_", n);
  append_indexed(cols, "y_", n);
  return cols;
}

std::vector<std::string> trajectory_columns(int n, int p) {
  std::vector<std::string> cols{"t", "phase"};
  append_indexed(cols, "xhat_", n);
  append_indexed(cols, "xstar_", n);
  append_indexed(cols, "theta_hat_", p);
  append_indexed(cols, "theta_true_", p);
  cols.push_back("projected");
  return cols;
}

void write_bundle_csv(std::ostream& out, const TrajectoryBundle& bundle, int n, int p) {
  out << join(bundle_columns(n, p)) << '\n';
  for (std::size_t t = 0; t < bundle.theta.size(); ++t) {
    const bool collect = t < bundle.collected();
    out << t << ',' << (collect ? "collect" : "predict");
    write_vector(out, bundle.theta[t]);
    if (collect) {
      write_vector(out, bundle.x[t]);
      write_vector(out, bundle.y[t]);
    } else {
      write_blanks(out, 2 * n);
    }
    out << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const PipelineRun& run, double mu_floor) {
  const auto& model = *run.model;
  const int n = model.n();
  const int p = model.p();
  out << join(trajectory_columns(n, p)) << '\n';
  NewtonOptions options;
  options.mu_floor = mu_floor;
  for (std::size_t t = 0; t < run.bundle.collected(); ++t) {
    const Vector& theta = run.bundle.theta[t];
    const MinimizerResult star = recover_minimizer(model, theta, run.bundle.x[t], options);
    out << t << ",collect";
    write_vector(out, run.bundle.x[t]);
    write_vector(out, star.x_hat);
    write_blanks(out, p);
    write_vector(out, theta);
    out << ",0\n";
  }
  for (const auto& pt : run.points) {
    out << pt.t << ",predict";
    write_vector(out, pt.x_hat);
    write_vector(out, pt.x_star);
    write_vector(out, pt.theta_hat);
    write_vector(out, pt.theta_true);
    out << ',' << (pt.projected ? 1 : 0) << '\n';
  }
}

void write_estimates_csv(std::ostream& out, const EstimateSeries& series) {
  const int p = series.estimates.empty() ? 0 : static_cast<int>(series.estimates.front().theta_tilde.size());
  std::vector<std::string> cols{"t"};
  append_indexed(cols, "theta_tilde_", p);
  cols.push_back("alpha_k");
  out << join(cols) << '\n';
  for (const auto& est : series.estimates) {
    out << est.t;
    write_vector(out, est.theta_tilde);
    out << ',' << format_double(est.alpha_k) << '\n';
  }
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_diagnostics_csv(std::ostream& out, std::span<const BoundComponents> rows) {
  out << "H,noise_term,anchor_decay,prediction_floor,floor_limit\n";
  for (const auto& r : rows) {
    out << r.horizon << ',' << format_double(r.noise_term) << ',' << format_double(r.anchor_decay)
        << ',' << format_double(r.prediction_floor) << ',' << format_double(r.floor_limit) << '\n';
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace tvopt
