// Acceptance suite: one line per criterion, nonzero exit if any fail.
// Each criterion carries its own wall-clock budget; exceeding it fails the
// line even if the checks themselves pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "lsrf/experiment.hpp"

namespace fs = std::filesystem;
using namespace lsrf;

namespace {

int g_failed = 0;

struct Checker {
  std::vector<std::string> problems;
  std::string note;  // appended to the [PASS] line

  void require(bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  }
};

std::string fmt(double v, const char* f = "%.3g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void criterion(int id, const std::string& name, double budget_s,
               const std::function<void(Checker&)>& body) {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.problems.push_back(std::string("exception: ") + e.what());
  }
  const double dt =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (dt > budget_s)
    c.problems.push_back("over budget: " + fmt(dt) + "s > " + fmt(budget_s) +
                         "s");
  const bool pass = c.problems.empty();
  if (!pass) ++g_failed;
  std::printf("[%s] %2d %-28s %7.2fs / %gs%s%s\n", pass ? "PASS" : "FAIL", id,
              name.c_str(), dt, budget_s, c.note.empty() ? "" : "  ",
              c.note.c_str());
  for (const std::string& p : c.problems)
    std::printf("         - %s\n", p.c_str());
}

std::vector<double> logspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < n; ++i)
    out[i] = std::pow(10.0, a + (b - a) * i / (n - 1.0));
  return out;
}

// pooled centered axis-lag correlation via the ratio estimator
double lag_corr(const std::vector<std::vector<double>>& reps, int nx, int ny,
                int lag) {
  double sa = 0.0, sb = 0.0, n = 0.0;
  for (const auto& f : reps)
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j + lag < ny; ++j) {
        sa += f[i * ny + j];
        sb += f[i * ny + j + lag];
        n += 1.0;
      }
  sa /= n;
  sb /= n;
  double num = 0.0, va = 0.0, vb = 0.0;
  for (const auto& f : reps)
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j + lag < ny; ++j) {
        const double a = f[i * ny + j] - sa, b = f[i * ny + j + lag] - sb;
        num += a * b;
        va += a * a;
        vb += b * b;
      }
  return num / std::sqrt(va * vb);
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempRoot {
  fs::path path;
  explicit TempRoot(const std::string& tag)
      : path(fs::temp_directory_path() / ("lsrf_accept_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempRoot() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

void c1_shannon_oracle(Checker& c) {
  const LSModel m(MarginalDensity::standard_gaussian(), 10, 200);
  double worst = 0.0;
  for (double g : {0.1, 0.2, 0.3, 0.4, 0.5}) {
    const double err =
        std::abs(m.shannon_mi_from_gamma(g) + 0.5 * std::log1p(-g * g));
    worst = std::max(worst, err);
    c.require(err <= 2e-3, "gamma=" + fmt(g) + ": |err|=" + fmt(err) +
                               " exceeds 2e-3");
  }
  c.note = "max |err| = " + fmt(worst);
}

void c2_renyi_oracle(Checker& c) {
  const LSModel m(MarginalDensity::standard_gaussian(), 10);
  // the dense 320^2-node integration inside gaussian_mi_exact is the oracle;
  // anchor one value against an independently frozen high-precision constant
  c.require(std::abs(gaussian_mi_exact(0.3, 1.5) - 0.0699123268582) < 1e-9,
            "dense oracle drifted from frozen anchor at (0.3, 1.5)");
  double worst = 0.0;
  for (double q : {1.5, 2.0, 3.0})
    for (double g : {0.1, 0.2, 0.3, 0.4}) {
      const double err =
          std::abs(m.renyi_mi_from_gamma(g, q) - gaussian_mi_exact(g, q));
      worst = std::max(worst, err);
      c.require(err <= 5e-3, "q=" + fmt(q) + " gamma=" + fmt(g) +
                                 ": |err|=" + fmt(err) + " exceeds 5e-3");
    }
  const double cont = std::abs(m.renyi_mi_from_gamma(0.3, 1.001) -
                               m.shannon_mi_from_gamma(0.3));
  c.require(cont < 1e-3,
            "q->1 continuity gap " + fmt(cont) + " exceeds 1e-3");
  c.note = "max |err| = " + fmt(worst) + ", q->1 gap = " + fmt(cont);
}

void c3_decay_order(Checker& c) {
  const CorrelationModel pp = CorrelationModel::pure_power(1.5, 2);
  const LSModel m(MarginalDensity::standard_gaussian(), pp, 5);
  const std::vector<double> d = logspace(10.0, 3000.0, 40);
  const std::pair<double, double> win{100.0, 3000.0};
  const MICurve base = m.mi_curve(d, std::nullopt, std::nullopt, win);
  const MICurve ind =
      m.mi_curve(d, SubordinationSpec::indicator(0.95), std::nullopt, win);
  c.require(std::abs(base.slope_fit.slope + 3.0) <= 0.05 * 3.0,
            "base slope " + fmt(base.slope_fit.slope, "%.4f") +
                " outside -3.0 +/- 5%");
  c.require(std::abs(ind.slope_fit.slope + 3.0) <= 0.07 * 3.0,
            "indicator slope " + fmt(ind.slope_fit.slope, "%.4f") +
                " outside -3.0 +/- 7%");
  c.note = "base slope " + fmt(base.slope_fit.slope, "%.4f") +
           ", indicator slope " + fmt(ind.slope_fit.slope, "%.4f");
}

void c4_rank_two_envelope(Checker& c) {
  // sign(x^2 - 1) levels: the first expansion coefficient vanishes by
  // symmetry, so the transform has rank 2 and MI must decay at least as
  // gamma^2 does.
  const double rho = 0.4;
  const CorrelationModel pp = CorrelationModel::pure_power(rho, 2);
  const LSModel m(MarginalDensity::standard_gaussian(), pp, 10);
  const SubordinationSpec spec =
      SubordinationSpec::finite_levels({-1.0, 1.0}, {"+", "-", "+"});
  const std::vector<double> d = logspace(10.0, 10000.0, 60);
  const std::pair<double, double> win{1000.0, 10000.0};
  const MICurve curve = m.mi_curve(d, spec, std::nullopt, win);
  c.require(curve.slope_fit.slope <= -2.0 * rho,
            "slope " + fmt(curve.slope_fit.slope, "%.4f") +
                " above the rank envelope -2*rho = " + fmt(-2.0 * rho));
  double rmin = 1e300, rmax = 0.0;
  for (size_t i = 0; i < d.size(); ++i) {
    if (d[i] < win.first) continue;
    const double g = pp(d[i]);
    const double ratio = curve.mi_values[i] / (g * g);
    rmin = std::min(rmin, ratio);
    rmax = std::max(rmax, ratio);
  }
  c.require(rmax / rmin < 10.0, "MI/gamma^2 varies by " + fmt(rmax / rmin) +
                                    "x over the last decade (>= 10x)");
  c.note = "slope " + fmt(curve.slope_fit.slope, "%.4f") +
           ", MI/gamma^2 spread " + fmt(rmax / rmin, "%.2f") + "x";
}

void c5_orthant_oracle(Checker& c) {
  const LSModel m(MarginalDensity::standard_gaussian(), 10);
  const SubordinationSpec spec = SubordinationSpec::indicator(0.95);
  const SubordinationCoeffs sc = m.subordination_coeffs(spec);
  const double a = 0.171056126308;  // P(X > 0.95), X standard normal
  const struct {
    double gamma, p11;  // exact bivariate-normal orthant P(X>nu, Y>nu)
  } cases[] = {{0.2, 0.0433530746242}, {0.5, 0.0696270477932}};
  double worst_p = 0.0, worst_mi = 0.0;
  for (const auto& k : cases) {
    const FinitePMF pmf = m.subordinated_pmf_from_gamma(sc, k.gamma);
    const double perr = std::abs(pmf[3] - k.p11);
    worst_p = std::max(worst_p, perr);
    c.require(perr <= 1e-4, "gamma=" + fmt(k.gamma) + ": |P11 err|=" +
                                fmt(perr) + " exceeds 1e-4");
    const FinitePMF exact(
        {1.0 - 2.0 * a + k.p11, a - k.p11, a - k.p11, k.p11});
    const double mierr =
        std::abs(discrete_mi(pmf, 2, 2) - discrete_mi(exact, 2, 2));
    worst_mi = std::max(worst_mi, mierr);
    c.require(mierr <= 1e-3, "gamma=" + fmt(k.gamma) + ": |MI err|=" +
                                 fmt(mierr) + " exceeds 1e-3");
  }
  c.note = "max |P11 err| = " + fmt(worst_p) + ", max |MI err| = " +
           fmt(worst_mi);
}

void c6_multinomial(Checker& c) {
  const LSModel m(MarginalDensity::standard_gaussian(), 5);
  double worst = 0.0;
  for (double g : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    double s = 0.0;
    for (int k = 1; k <= 5; ++k) s += std::pow(g, 2 * k);
    const double err =
        std::abs(m.renyi_mi_multinomial_from_gamma(g, 2) - std::log1p(s));
    worst = std::max(worst, err);
    c.require(err <= 1e-12, "gamma=" + fmt(g) +
                                ": closed-form gap " + fmt(err) +
                                " exceeds 1e-12");
  }
  const double quad = std::abs(m.renyi_mi_multinomial_from_gamma(0.3, 2) -
                               m.renyi_mi_from_gamma(0.3, 2.0));
  c.require(quad <= 5e-3,
            "quadrature gap " + fmt(quad) + " exceeds 5e-3 at gamma=0.3");
  c.note = "max closed-form gap = " + fmt(worst) + ", quadrature gap = " +
           fmt(quad);
}

void c7_simulation_fidelity(Checker& c) {
  const CorrelationModel corr = CorrelationModel::power_law_bg(0.2, 0.2, 2);
  const GridSpec g({20, 20}, 1.0);
  std::vector<std::vector<double>> reps;
  reps.reserve(200);
  for (int r = 0; r < 200; ++r)
    reps.push_back(
        chi_square_field(g, corr, 10, detail::derive_seed(99, r)).values);
  const CorrelationModel squared = CorrelationModel::squared(corr);
  double worst = 0.0;
  for (int lag : {1, 2, 5}) {
    const double err =
        std::abs(lag_corr(reps, 20, 20, lag) - squared(double(lag)));
    worst = std::max(worst, err);
    c.require(err <= 0.05, "lag " + std::to_string(lag) +
                               ": |corr err|=" + fmt(err) + " exceeds 0.05");
  }
  // excursion-set area fraction above nu = 0.95 for the Gaussian field
  detail::GaussianSampler s(g, corr, SimMethod::Cholesky);
  std::vector<double> fracs;
  const double lambda_d = g.cell_volume() * 400.0;
  for (int r = 0; r < 200; ++r)
    fracs.push_back(minkowski_m0(s.realize(detail::derive_seed(5, r)), 0.95) /
                    lambda_d);
  const double m = std::accumulate(fracs.begin(), fracs.end(), 0.0) / 200.0;
  double s2 = 0.0;
  for (double x : fracs) s2 += (x - m) * (x - m);
  const double se = std::sqrt(s2 / 199.0 / 200.0);
  c.require(std::abs(m - 0.17106) <= 3.0 * se,
            "M0 fraction " + fmt(m, "%.5f") + " further than 3 s.e. (" +
                fmt(3.0 * se) + ") from 0.17106");
  c.note = "max |corr err| = " + fmt(worst) + ", M0 mean " + fmt(m, "%.5f") +
           " (3 s.e. = " + fmt(3.0 * se) + ")";
}

void c8_preset_curves(Checker& c) {
  const std::vector<std::string> presets = {
      "fig2-gaussian",       "fig2-chisq",
      "fig2-gaussian-indicator", "fig2-chisq-indicator",
      "fig3-renyi-gaussian", "fig3-renyi-chisq",
      "fig3-renyi-gaussian-indicator", "fig3-renyi-chisq-indicator"};
  const CorrelationModel base = CorrelationModel::power_law_bg(0.2, 0.2, 2);
  const CorrelationModel sq = CorrelationModel::squared(base);
  // indicator curves have no bound columns; bound them by the base-model
  // envelope (subordination cannot increase MI)
  const LSModel gauss(MarginalDensity::standard_gaussian(), 5);
  const LSModel chisq(MarginalDensity::gamma(5.0, 1.0), 5);
  TempRoot root_a("a"), root_b("b");
  int curves = 0, bound_pts = 0;
  for (const std::string& name : presets) {
    const RunManifest m1 = run_preset(name, root_a.path.string());
    const RunManifest m2 = run_preset(name, root_b.path.string());
    const bool is_gauss = name.find("chisq") == std::string::npos;
    const bool shannon = name.find("renyi") == std::string::npos;
    const CorrelationModel& corr = is_gauss ? base : sq;
    const LSModel& scalar = is_gauss ? gauss : chisq;
    for (const ArtifactRecord& a : m1.artifacts) {
      if (a.path.find(".csv") == std::string::npos) continue;
      const std::string bytes1 = slurp(fs::path(m1.output_dir) / a.path);
      const std::string bytes2 = slurp(fs::path(m2.output_dir) / a.path);
      c.require(!bytes1.empty() && bytes1 == bytes2,
                name + "/" + a.path + " not byte-stable across reruns");
      const auto rows = read_csv(fs::path(m1.output_dir) / a.path);
      c.require(rows.size() == 1000,
                name + "/" + a.path + ": expected 1000 rows, got " +
                    std::to_string(rows.size()));
      ++curves;
      double prev = 1e300;
      for (const auto& r : rows) {
        if (!(r[1] > 0.0)) {
          c.problems.push_back(name + "/" + a.path + ": MI <= 0 at d=" +
                               fmt(r[0]));
          break;
        }
        if (r[1] > prev + 1e-12) {
          c.problems.push_back(name + "/" + a.path +
                               ": MI increases at d=" + fmt(r[0]));
          break;
        }
        prev = r[1];
        if (shannon && corr(r[0]) <= 0.5) {
          ++bound_pts;
          const double upper = r.size() >= 4
                                   ? r[3]
                                   : scalar.mi_bounds_from_gamma(corr(r[0]))
                                         .second;
          if (!(r[1] <= upper)) {
            c.problems.push_back(name + "/" + a.path + ": MI " + fmt(r[1]) +
                                 " above bound " + fmt(upper) + " at d=" +
                                 fmt(r[0]));
            break;
          }
        }
      }
    }
  }
  // pinned regression fixtures on the lead preset
  const auto rows = read_csv(root_a.path / "fig2-gaussian" / "curve.csv");
  c.require(std::abs(rows.front()[1] - 0.644566814833) < 1e-9,
            "fig2-gaussian MI(1) drifted from pinned fixture");
  c.require(std::abs(rows.back()[1] - 0.383823342875) < 1e-9,
            "fig2-gaussian MI(1000) drifted from pinned fixture");
  c.note = std::to_string(curves) + " curves checked; bound check hit " +
           std::to_string(bound_pts) +
           " points (gamma(d) > 0.5 throughout these presets)";
}

void c9_functional_layer(Checker& c) {
  const GneitingCovariance gc(1.0, 1.0, 0.2, 0.35, 1.0, 0.3, 0.7, 2);
  const TimeBasis basis(TimeBasis::Kind::CosineOrthonormal, 1.0, 20);
  const LSModel scalar(MarginalDensity::standard_gaussian(), 10);
  CorrelationOperator op(gc, basis);
  double worst = 0.0;
  // M=10 holds the 2e-3 oracle tolerance for gamma <= ~0.7 (r >= 5 here)
  for (double r : {5.0, 10.0, 50.0})
    for (int n : {1, 2, 7}) {
      const double g = op.entry(r, n, n);
      const double err = std::abs(mi_operator_entry(gc, basis, scalar, r, n, n) -
                                  gaussian_mi_exact(g, 1.0));
      worst = std::max(worst, err);
      c.require(err <= 2e-3, "r=" + fmt(r) + " n=" + std::to_string(n) +
                                 ": |err|=" + fmt(err) + " exceeds 2e-3");
    }
  std::vector<double> mesh;
  for (int i = 0; i <= 30; ++i) mesh.push_back(i / 30.0);
  const MIOperatorSurface s1 = mi_surface(gc, basis, scalar, 1.0, mesh);
  const QuadratureRule gl = gauss_legendre(256, 0.0, 1.0);
  double worst_proj = 0.0;
  for (int n : {1, 3, 7})
    for (int m : {2, 5}) {
      double acc = 0.0;
      for (int i = 0; i < gl.size(); ++i) {
        double inner = 0.0;
        for (int j = 0; j < gl.size(); ++j)
          inner += gl.weights[j] * s1.evaluate(gl.nodes[i], gl.nodes[j]) *
                   basis.evaluate(m, gl.nodes[j]);
        acc += gl.weights[i] * inner * basis.evaluate(n, gl.nodes[i]);
      }
      const double err = std::abs(acc - s1.entries(n - 1, m - 1));
      worst_proj = std::max(worst_proj, err);
      c.require(err <= 1e-6, "re-projection (" + std::to_string(n) + "," +
                                 std::to_string(m) + "): |err|=" + fmt(err) +
                                 " exceeds 1e-6");
    }
  double prev = s1.mean_level();
  for (double r : {2.0, 4.0, 8.0}) {
    const double lvl = mi_surface(gc, basis, scalar, r, mesh).mean_level();
    c.require(lvl < prev, "mean level did not decrease from r=" + fmt(r / 2) +
                              " to r=" + fmt(r));
    prev = lvl;
  }
  c.note = "max |entry err| = " + fmt(worst) + ", max |proj err| = " +
           fmt(worst_proj) + ", mean level at r=8: " + fmt(prev, "%.4f");
}

void c10_exclusions(Checker& c) {
  // production-scale runs use a basis count of 100; desk scale substitutes
  // 20 with the same qualitative checks, and the figure presets are shape +
  // pinned-regression checks only (no quantitative external values exist)
  const std::string* fig5 = preset_config_text("fig5-mi-surfaces");
  c.require(fig5 != nullptr, "fig5-mi-surfaces preset missing");
  if (fig5) {
    c.require(fig5->find("\"basis_count\": 20") != std::string::npos,
              "fig5-mi-surfaces does not pin the desk-scale basis count 20");
    c.require(fig5->find("\"basis_count\": 100") == std::string::npos,
              "fig5-mi-surfaces requests the production basis count");
  }
  c.note = "basis count 20 substitutes the production 100; "
           "figure presets are shape/regression checks only";
}

}  // namespace

int main() {
  std::printf("lsrf acceptance suite (library %s)\n", kLibraryVersion);
  criterion(1, "shannon-gaussian-oracle", 5.0, c1_shannon_oracle);
  criterion(2, "renyi-gaussian-oracle", 30.0, c2_renyi_oracle);
  criterion(3, "decay-order-recovery", 60.0, c3_decay_order);
  criterion(4, "rank-two-envelope", 60.0, c4_rank_two_envelope);
  criterion(5, "orthant-pmf-oracle", 10.0, c5_orthant_oracle);
  criterion(6, "multinomial-crosscheck", 5.0, c6_multinomial);
  criterion(7, "simulation-fidelity", 120.0, c7_simulation_fidelity);
  criterion(8, "preset-curve-shapes", 300.0, c8_preset_curves);
  criterion(9, "functional-surfaces", 300.0, c9_functional_layer);
  criterion(10, "desk-scale-exclusions", 5.0, c10_exclusions);
  if (g_failed == 0) {
    std::printf("acceptance: all 10 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) FAILED\n", g_failed);
  return 1;
}
