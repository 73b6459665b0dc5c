// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "eel/experiment.hpp"
#include "eel/synthetic.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using eel::Matrix;
using eel::Vector;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// 1. pseudoinverse and LS combiner
Outcome numeric_kernel() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const std::vector<Matrix> shapes{oracle::random_matrix(3, 3, seed), oracle::random_matrix(5, 3, seed + 50),
                                     oracle::random_matrix(3, 5, seed + 100),
                                     oracle::random_matrix(4, 2, seed + 150) * oracle::random_matrix(2, 4, seed + 200)};
    for (const auto& a : shapes) {
      const Matrix p = eel::pseudoinverse(a);
      worst = std::max({worst, max_abs(a * p * a - a), max_abs(p * a * p - p), max_abs((a * p).transpose() - a * p),
                        max_abs((p * a).transpose() - p * a)});
    }
  }
  o.require(worst < 1e-9, "Penrose residual " + fmt("%.3g", worst));
  double ls_worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Matrix t = oracle::random_matrix(50, 8, seed + 1000);
    const Vector y = oracle::random_vector(50, seed + 2000);
    ls_worst = std::max(ls_worst, (eel::ls_combine(t, y) - oracle::ls_normal_equations(t, y)).cwiseAbs().maxCoeff());
  }
  o.require(ls_worst < 1e-8, "LS deviation " + fmt("%.3g", ls_worst));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("max Penrose residual ") + fmt("%.2e", worst) + ", max LS deviation " +
              fmt("%.2e", ls_worst);
  return o;
}

// 2. learner interpolation and the RVFL/ELM identity
Outcome learner_interpolation() {
  Outcome o;
  int interp = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix x = oracle::random_matrix(20, 5, seed + 300);
    const Vector y = oracle::random_vector(20, seed + 400);
    const auto m = eel::train({eel::LearnerKind::elm, {20}, seed}, x, y);
    interp += eel::rmse(m.predict(x), y) < 1e-4;
  }
  o.require(interp >= 18, "ELM interpolation on " + std::to_string(interp) + "/20 seeds");
  double linear_worst = 0.0;
  for (int n : {1, 10, 40, 200}) {
    const Matrix x = oracle::random_matrix(100, 6, static_cast<std::uint64_t>(n) + 500);
    const Vector y = x * oracle::random_vector(6, static_cast<std::uint64_t>(n) + 600);
    linear_worst = std::max(linear_worst, eel::rmse(eel::train({eel::LearnerKind::rvfl, {n, 1}, 7}, x, y).predict(x), y));
  }
  o.require(linear_worst < 1e-6, "RVFL linear fit RMSE " + fmt("%.3g", linear_worst));
  bool identical = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix x = oracle::random_matrix(40, 4, seed + 700);
    const Vector y = oracle::random_vector(40, seed + 800);
    const auto e = eel::train({eel::LearnerKind::elm, {25}, seed}, x, y);
    const auto r = eel::train({eel::LearnerKind::rvfl, {25, 0}, seed}, x, y);
    identical = identical && e.output_weights == r.output_weights && e.predict(x) == r.predict(x);
  }
  o.require(identical, "RVFL(link=0) differs from ELM");
  o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(interp) + "/20 ELM fits exact, RVFL linear RMSE " +
              fmt("%.2e", linear_worst);
  return o;
}

// 3. diversity and CV objective
Outcome objective_correctness() {
  Outcome o;
  Matrix hand(2, 2);
  hand << 1, 1, -1, -1;
  const double f2 = eel::ncl_diversity(std::vector<double>{1, 1}, hand, 0);
  o.require(f2 == -2.0, "hand case gave " + fmt("%.17g", f2));
  double identity_worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Matrix p = oracle::random_matrix(5, 20, seed + 900, -2, 2);
    double total = 0.0, identity = 0.0;
    for (Eigen::Index j = 0; j < 5; ++j) {
      const Vector row = p.row(j).transpose();
      total += eel::ncl_diversity(eel::as_span(row), p, static_cast<std::size_t>(j));
    }
    for (Eigen::Index i = 0; i < 20; ++i) {
      const Vector d = (p.col(i).array() - p.col(i).mean()).matrix();
      identity += d.sum() * d.sum() - d.squaredNorm();
    }
    identity_worst = std::max(identity_worst, std::abs(total - identity));
  }
  o.require(identity_worst <= 1e-10, "NCL identity deviation " + fmt("%.3g", identity_worst));
  double cv_worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    eel::SampleMatrix s;
    s.inputs = oracle::random_matrix(100, 5, seed + 1100);
    s.targets = (s.inputs.col(0).array().sin() + 0.5 * s.inputs.col(2).array()).matrix();
    const auto folds = eel::make_folds(100, 5, seed);
    const eel::LearnerSpec spec{eel::LearnerKind::elm, {20}, seed};
    cv_worst = std::max(cv_worst, std::abs(eel::evaluate_accuracy(s, spec, folds).f1 - oracle::cv_rmse(s.inputs, s.targets, spec, folds, 5).first));
  }
  o.require(cv_worst <= 1e-10, "CV deviation " + fmt("%.3g", cv_worst));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("f2 = ") + fmt("%g", f2) + ", identity dev " + fmt("%.2e", identity_worst) +
              ", CV dev " + fmt("%.2e", cv_worst);
  return o;
}

struct Toy {
  mutable std::size_t calls = 0;
  std::size_t dimension() const { return 2; }
  eel::EvaluatedIndividual evaluate(const eel::Genotype& g, std::uint64_t seed) const {
    ++calls;
    eel::EvaluatedIndividual e;
    e.genotype = g;
    e.learner_seed = seed;
    const double v = g.values[0];
    e.f = {(v - 0.3) * (v - 0.3), (v - 0.7) * (v - 0.7)};
    return e;
  }
  void refresh(std::span<eel::EvaluatedIndividual>) {}
  void score_candidate(eel::EvaluatedIndividual&) const {}
};

// 4. MOEA/D machinery
Outcome moead_machinery() {
  Outcome o;
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> grid(0, 40);
  bool filter_ok = true;
  for (int cloud = 0; cloud < 100; ++cloud) {
    std::vector<std::array<double, 2>> pts;
    std::vector<eel::EvaluatedIndividual> pop(200);
    for (std::size_t i = 0; i < 200; ++i) {
      pts.push_back({grid(rng) / 40.0, grid(rng) / 40.0});
      pop[i].f = pts.back();
      pop[i].learner_seed = i;
    }
    const auto front = eel::nondominated_filter(pop);
    const auto expected = oracle::nondominated_indices(pts);
    filter_ok = filter_ok && front.size() == expected.size();
    for (std::size_t k = 0; filter_ok && k < front.size(); ++k) filter_ok = front[k].learner_seed == expected[k];
  }
  o.require(filter_ok, "nondominated filter disagrees with oracle");

  Toy toy;
  eel::MoeadConfig cfg;
  cfg.population_size = 20;
  cfg.neighborhood_size = 4;
  cfg.max_fes = 2000;
  cfg.run_seed = 1;
  const auto res = eel::run(cfg, toy);
  o.require(toy.calls == res.evaluations && res.evaluations == 20 + 20 * res.generations && res.evaluations < 2000 + 20,
            "FEs accounting: " + std::to_string(toy.calls) + " calls, " + std::to_string(res.evaluations) + " reported");
  double lo = 1.0, hi = 0.0;
  bool internal = true;
  for (const auto& a : res.front) {
    lo = std::min(lo, a.genotype.values[0]);
    hi = std::max(hi, a.genotype.values[0]);
    for (const auto& b : res.front) internal = internal && !eel::dominates(a.f, b.f);
  }
  o.require(internal, "front not internally nondominated");
  o.require(lo >= 0.25 && hi <= 0.75 && hi - lo >= 0.3, "front span [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "]");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("front of ") + std::to_string(res.front.size()) + " spans [" +
              fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "], " + std::to_string(toy.calls) + " evaluations";
  return o;
}

// 5(a,b). selection oracles; 5(c) is checked on the experiment rows
Outcome selective_ensemble(const std::vector<eel::RunReport>& reports) {
  Outcome o;
  int trajectory_ok = 0;
  bool monotone = true;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Vector y = oracle::random_vector(40, seed + 3000);
    Matrix t = oracle::random_matrix(40, 8, seed + 4000, -0.5, 0.5);
    for (Eigen::Index j = 0; j < 8; ++j) t.col(j) += (0.3 + 0.1 * static_cast<double>(j)) * y;
    const auto sfs = eel::sfs_ls(t, y);
    trajectory_ok += sfs.selected == oracle::greedy_forward(t, y);
    for (std::size_t k = 1; k < sfs.trajectory.size(); ++k) monotone = monotone && sfs.trajectory[k].rmse < sfs.trajectory[k - 1].rmse;
    double best_single = INFINITY;
    for (Eigen::Index j = 0; j < 8; ++j) best_single = std::min(best_single, eel::rmse(Vector(t.col(j)), y));
    monotone = monotone && sfs.train_rmse <= best_single;
    const auto sbs = eel::sbs_ls(t, y);
    for (std::size_t k = 1; k < sbs.trajectory.size(); ++k) monotone = monotone && sbs.trajectory[k].rmse < sbs.trajectory[k - 1].rmse;
    monotone = monotone && sbs.train_rmse <= eel::ls_all(t, y).train_rmse;
  }
  o.require(trajectory_ok == 50, "SFS trajectory matched oracle on " + std::to_string(trajectory_ok) + "/50 pools");
  o.require(monotone, "SFS/SBS monotone-improvement invariant violated");

  std::size_t checked = 0;
  bool pooled_ok = true;
  for (const auto& report : reports) {
    std::map<std::size_t, double> best, pooled;
    for (const auto& row : report.rows) {
      if (row.status != "ok") continue;
      if (row.ps != "pooled") {
        auto& b = best.try_emplace(row.repetition, INFINITY).first->second;
        b = std::min(b, row.best_member_train_rmse);
      } else if (row.method == "SFS+LS") {
        pooled[row.repetition] = row.train_rmse;
      }
    }
    for (const auto& [rep, value] : pooled) {
      ++checked;
      pooled_ok = pooled_ok && value <= best.at(rep);
    }
  }
  o.require(checked > 0 && pooled_ok, "pooled SFS+LS above best single member");
  o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(trajectory_ok) + "/50 trajectories match, pooled bound held on " +
              std::to_string(checked) + " repetitions";
  return o;
}

eel::ExperimentConfig trend_config(const std::string& data, std::uint64_t seed) {
  eel::ExperimentConfig c;
  c.data = data;
  c.target = "y";
  c.learner = eel::LearnerKind::elm;
  c.ps = {10, 20};
  c.max_fes = 2000;
  c.repetitions = 1;
  c.seed = seed;
  c.tw_target = eel::int_range(2, 24, 2);
  c.tw_aux = eel::int_range(2, 24, 2);
  c.resolution = eel::int_range(1, 5);
  c.params = {eel::int_range(5, 60, 5)};
  c.jobs = std::max(1u, std::thread::hardware_concurrency());
  return c;
}

// 6. desk-scale trend
Outcome desk_trend(const std::string& data, std::vector<eel::RunReport>& reports) {
  Outcome o;
  const auto t0 = Clock::now();
  int sfs_wins = 0;
  double pooled_sum = 0.0;
  std::map<std::string, double> front_sum;
  std::size_t seeds = 10;
  for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
    reports.push_back(eel::run_experiment(trend_config(data, seed)));
    const auto& rep = reports.back();
    double sfs = 0.0, mean = 0.0;
    int fronts = 0;
    for (const auto& row : rep.rows) {
      if (row.status != "ok") {
        o.require(false, "seed " + std::to_string(seed) + ": " + row.status);
        continue;
      }
      if (row.ps == "pooled" && row.method == "SFS+LS") pooled_sum += row.test_rmse;
      if (row.ps == "pooled") continue;
      if (row.method == "SFS+LS") {
        sfs += row.test_rmse;
        front_sum[row.ps] += row.test_rmse;
        ++fronts;
      }
      if (row.method == "Mean") mean += row.test_rmse;
    }
    sfs_wins += fronts > 0 && sfs <= mean;
    std::printf("  seed %2llu: front-averaged SFS+LS %.5f vs Mean %.5f\n", static_cast<unsigned long long>(seed),
                fronts ? sfs / fronts : NAN, fronts ? mean / fronts : NAN);
  }
  const double seconds = elapsed(t0);
  const double pooled = pooled_sum / static_cast<double>(seeds);
  double best_front = INFINITY;
  std::string best_ps;
  for (const auto& [ps, sum] : front_sum) {
    if (sum / static_cast<double>(seeds) < best_front) {
      best_front = sum / static_cast<double>(seeds);
      best_ps = ps;
    }
  }
  o.require(sfs_wins >= 8, "SFS+LS <= Mean on only " + std::to_string(sfs_wins) + "/10 seeds");
  o.require(pooled <= best_front * 1.05, "pooled " + fmt("%.5f", pooled) + " > 1.05 x best front " + fmt("%.5f", best_front));
  o.require(seconds < 600.0, "runtime " + fmt("%.1f", seconds) + " s");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("(a) ") + std::to_string(sfs_wins) + "/10 seeds; (b) pooled " +
              fmt("%.5f", pooled) + " vs best front ps=" + best_ps + " " + fmt("%.5f", best_front) + "; " + fmt("%.1f", seconds) + " s";
  return o;
}

// 7. encoding dimensions
Outcome encoding_regression() {
  Outcome o;
  const std::size_t e = eel::default_genotype_spec(5, eel::LearnerKind::elm).dimension();
  const std::size_t r = eel::default_genotype_spec(5, eel::LearnerKind::rvfl).dimension();
  const std::size_t b = eel::default_genotype_spec(5, eel::LearnerKind::bls).dimension();
  o.require(e == 85 && r == 86 && b == 87, "dimensions " + std::to_string(e) + "/" + std::to_string(r) + "/" + std::to_string(b));
  if (o.pass) o.detail = "ELM 85, RVFL 86, BLS 87";
  return o;
}

std::string strip_seconds(const std::string& csv) {
  std::stringstream in(csv), out;
  for (std::string line; std::getline(in, line);) out << line.substr(0, line.rfind(',')) << '\n';
  return out.str();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 8. end-to-end determinism through the report files
Outcome determinism(const std::string& data, const std::filesystem::path& work) {
  Outcome o;
  auto cfg = trend_config(data, 2024);
  cfg.max_fes = 300;
  cfg.repetitions = 2;
  std::vector<std::filesystem::path> outs;
  std::size_t expected_models = 0;
  for (int run = 0; run < 2; ++run) {
    cfg.jobs = run == 0 ? 1 : 2;
    outs.push_back(work / ("det" + std::to_string(run)));
    cfg.out = outs.back().string();
    const auto report = eel::run_experiment(cfg);
    expected_models = static_cast<std::size_t>(
        std::count_if(report.rows.begin(), report.rows.end(), [](const eel::ReportRow& r) { return !r.model_file.empty(); }));
    eel::write_report(report, cfg.out);
  }
  o.require(strip_seconds(slurp(outs[0] / "report.csv")) == strip_seconds(slurp(outs[1] / "report.csv")), "report.csv differs");
  o.require(slurp(outs[0] / "summary.json") == slurp(outs[1] / "summary.json"), "summary.json differs");
  std::size_t models = 0;
  for (const auto& entry : std::filesystem::directory_iterator(outs[0] / "models")) {
    ++models;
    o.require(slurp(entry.path()) == slurp(outs[1] / "models" / entry.path().filename()),
              "model " + entry.path().filename().string() + " differs");
  }
  o.require(models > 0 && models == expected_models, std::to_string(models) + " model files, " + std::to_string(expected_models) + " expected");
  if (o.pass) o.detail = "two runs (1 and 2 jobs) agree bitwise on report, summary and " + std::to_string(models) + " models";
  return o;
}

}  // namespace

int main() {
  fixture::TempDir work;
  eel::SyntheticSpec syn;
  syn.length = 2000;
  syn.channels = 3;
  syn.noise = 0.05;
  syn.seed = 1;
  const std::string data = work.file("synthetic.csv");
  eel::write_synthetic_csv(syn, data);

  struct Item {
    int id;
    const char* name;
    double limit;  // seconds; 0 = none
    std::function<Outcome()> run;
  };
  std::vector<eel::RunReport> reports;
  std::map<int, std::pair<Outcome, double>> results;
  const std::vector<Item> items{
      {1, "numeric kernel", 10, numeric_kernel},
      {2, "learner interpolation", 30, learner_interpolation},
      {3, "objective correctness", 0, objective_correctness},
      {4, "MOEA/D machinery", 60, moead_machinery},
      {6, "desk-scale trend", 600, [&] { return desk_trend(data, reports); }},
      {5, "selective ensemble", 0, [&] { return selective_ensemble(reports); }},
      {7, "encoding regression", 0, encoding_regression},
      {8, "determinism", 0, [&] { return determinism(data, work.path()); }},
  };
  for (const auto& item : items) {
    const auto t0 = Clock::now();
    Outcome out;
    try {
      out = item.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double s = elapsed(t0);
    if (item.limit > 0 && s >= item.limit) out.require(false, "exceeded " + fmt("%.0f", item.limit) + " s");
    results[item.id] = {out, s};
  }

  int failed = 0;
  for (const auto& [id, r] : results) {
    const auto it = std::find_if(items.begin(), items.end(), [&](const Item& i) { return i.id == id; });
    std::printf("%s criterion %d (%s): %s [%.2f s]\n", r.first.pass ? "PASS" : "FAIL", id, it->name, r.first.detail.c_str(), r.second);
    failed += !r.first.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
  return failed == 0 ? 0 : 1;
}
