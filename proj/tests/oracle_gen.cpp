// Generates tests/frozen_oracles.hpp: brute-force Monte-Carlo reference
// values that the test suite compares the library against. Everything here is
// computed from first principles with std:: randomness and hardcoded model
// constants; nothing links against the library under test.
//
// Usage: oracle_gen [output-path]   (stdout when no path is given)

#include <Eigen/Dense>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <random>

namespace {

struct Accumulator4 {
  // Deviations are accumulated about a fixed center so the running sums stay
  // O(sqrt(n)) and the covariance does not lose digits to cancellation.
  Eigen::Vector4d center;
  Eigen::Vector4d sum = Eigen::Vector4d::Zero();
  Eigen::Matrix4d sum_outer = Eigen::Matrix4d::Zero();
  std::int64_t n = 0;

  void add(const Eigen::Vector4d& x) {
    const Eigen::Vector4d d = x - center;
    sum += d;
    sum_outer += d * d.transpose();
    ++n;
  }

  Eigen::Vector4d mean() const { return center + sum / static_cast<double>(n); }

  Eigen::Matrix4d covariance() const {
    const Eigen::Vector4d m = sum / static_cast<double>(n);
    return sum_outer / static_cast<double>(n) - m * m.transpose();
  }
};

void emit_vector(std::FILE* out, const char* name, const Eigen::VectorXd& v) {
  std::fprintf(out, "inline const double %s[%d] = {", name, static_cast<int>(v.size()));
  for (int i = 0; i < v.size(); ++i)
    std::fprintf(out, "%s\n    %.17g", i ? "," : "", v(i));
  std::fprintf(out, "};\n");
}

void emit_matrix(std::FILE* out, const char* name, const Eigen::MatrixXd& m) {
  std::fprintf(out, "// row-major %dx%d\n", static_cast<int>(m.rows()),
               static_cast<int>(m.cols()));
  std::fprintf(out, "inline const double %s[%d] = {", name,
               static_cast<int>(m.size()));
  int c = 0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      std::fprintf(out, "%s\n    %.17g", c++ ? "," : "", m(i, j));
  std::fprintf(out, "};\n");
}

}  // namespace

int main(int argc, char** argv) {
  std::FILE* out = stdout;
  if (argc > 1) {
    out = std::fopen(argv[1], "w");
    if (!out) {
      std::perror("oracle_gen: open output");
      return 1;
    }
  }

  std::fprintf(out,
               "#pragma once\n\n"
               "// Generated by oracle_gen. Do not edit: regenerate instead.\n"
               "// Brute-force Monte-Carlo reference values with their standard"
               " errors.\n\n"
               "namespace frozen {\n\n");

  // -------------------------------------------------------------------------
  // One-step prediction of the tracking scenario: y = F x + w with
  // x ~ N(x0bar, P0), w ~ N(0, Q). 1e7 samples.
  {
    Eigen::Matrix4d f;
    f << 1, 1, 0, 0,
         0, 1, 0, 0,
         0, 0, 1, 1,
         0, 0, 0, 1;
    const double q = 0.05;
    Eigen::Matrix4d qmat = Eigen::Matrix4d::Zero();
    qmat(0, 0) = q / 3.0; qmat(0, 1) = q / 2.0;
    qmat(1, 0) = q / 2.0; qmat(1, 1) = q;
    qmat(2, 2) = q / 3.0; qmat(2, 3) = q / 2.0;
    qmat(3, 2) = q / 2.0; qmat(3, 3) = q;
    const Eigen::Vector4d x0(50.0, 1.0, 1.0, 1.0);
    const Eigen::Vector4d p0_diag(1.5, 0.5, 1.5, 0.5);

    const Eigen::Matrix4d p0_factor = p0_diag.cwiseSqrt().asDiagonal();
    const Eigen::Matrix4d q_factor =
        Eigen::LLT<Eigen::Matrix4d>(qmat).matrixL();

    const std::int64_t n = 10'000'000;
    std::mt19937_64 engine(0x5eed0001);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw4 = [&] {
      return Eigen::Vector4d(normal(engine), normal(engine), normal(engine),
                             normal(engine));
    };

    Accumulator4 acc;
    acc.center = f * x0;  // analytic mean, used only as the centering point
    for (std::int64_t i = 0; i < n; ++i) {
      const Eigen::Vector4d x = x0 + p0_factor * draw4();
      acc.add(f * x + q_factor * draw4());
    }

    const Eigen::Vector4d mean = acc.mean();
    const Eigen::Matrix4d cov = acc.covariance();
    Eigen::Vector4d mean_se;
    Eigen::Matrix4d cov_se;
    for (int i = 0; i < 4; ++i) {
      mean_se(i) = std::sqrt(cov(i, i) / static_cast<double>(n));
      for (int j = 0; j < 4; ++j)
        cov_se(i, j) = std::sqrt(
            (cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) /
            static_cast<double>(n));
    }

    const Eigen::Matrix4d analytic = f * p0_diag.asDiagonal() * f.transpose() + qmat;
    std::fprintf(out,
                 "// One-step prediction of the tracking scenario from its "
                 "initial belief:\n"
                 "// %" PRId64 " samples of F x + w. Analytic covariance "
                 "agrees to %.2g max-abs.\n",
                 n, (cov - analytic).cwiseAbs().maxCoeff());
    emit_vector(out, "scenario_predict_mean", mean);
    emit_vector(out, "scenario_predict_mean_se", mean_se);
    emit_matrix(out, "scenario_predict_cov", cov);
    emit_matrix(out, "scenario_predict_cov_se", cov_se);
    std::fprintf(out, "\n");
  }

  // -------------------------------------------------------------------------
  // E[sin(x) + x^3/10] for x ~ N(0.3, 1), 1e8 samples. The analytic value
  // sin(mu) e^{-1/2} + (mu^3 + 3 mu)/10 cross-checks the sampler.
  {
    const std::int64_t n = 100'000'000;
    std::mt19937_64 engine(0x5eed0002);
    std::normal_distribution<double> normal(0.3, 1.0);
    long double sum = 0.0L, sum_sq = 0.0L;
    for (std::int64_t i = 0; i < n; ++i) {
      const double x = normal(engine);
      const double g = std::sin(x) + x * x * x / 10.0;
      sum += g;
      sum_sq += static_cast<long double>(g) * g;
    }
    const double mean = static_cast<double>(sum / n);
    const double var =
        static_cast<double>(sum_sq / n - (sum / n) * (sum / n));
    const double se = std::sqrt(var / static_cast<double>(n));
    const double analytic =
        std::sin(0.3) * std::exp(-0.5) + (0.3 * 0.3 * 0.3 + 3 * 0.3) / 10.0;

    std::fprintf(out,
                 "// E[sin(x) + x^3/10], x ~ N(0.3, 1): %" PRId64
                 " samples.\n"
                 "// Analytic value %.17g differs by %.2g (%.2f standard "
                 "errors).\n"
                 "inline const double cubed_sine_mean = %.17g;\n"
                 "inline const double cubed_sine_mean_se = %.17g;\n\n",
                 n, analytic, mean - analytic, (mean - analytic) / se, mean,
                 se);
  }

  std::fprintf(out, "}  // namespace frozen\n");
  if (out != stdout) std::fclose(out);
  return 0;
}
