#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>

#include "slterr/crf.h"
#include "slterr/error.h"

namespace slterr {

std::string_view StepRuleName(StepRule rule) {
  return rule == StepRule::kAdaptive ? "adaptive" : "lbfgs";
}

StepRule ParseStepRule(std::string_view name) {
  if (name == "adaptive") return StepRule::kAdaptive;
  if (name == "lbfgs") return StepRule::kLbfgs;
  throw Error("unknown optimizer '" + std::string(name) + "' (expected adaptive or lbfgs)");
}

namespace {

constexpr int kMaxConsecutiveDecreases = 10;

// Objective: sum of log-likelihoods minus the Gaussian prior.
class Objective {
 public:
  Objective(CrfModel& model, const std::vector<Lattice>& data, double sigma2)
      : model_(model), data_(data), sigma2_(sigma2) {}

  double operator()(const std::vector<double>& w, std::vector<double>& grad) {
    model_.weights() = w;
    grad.assign(w.size(), 0.0);
    double value = 0.0;
    for (const auto& lat : data_) value += LogLikelihoodAndGradient(model_, lat, &grad);
    for (std::size_t i = 0; i < w.size(); ++i) {
      value -= w[i] * w[i] / (2.0 * sigma2_);
      grad[i] -= w[i] / sigma2_;
    }
    ++evaluations;
    return value;
  }

  void Set(const std::vector<double>& w) { model_.weights() = w; }

  int evaluations = 0;

 private:
  CrfModel& model_;
  const std::vector<Lattice>& data_;
  double sigma2_;
};

double InfNorm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double Dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void Log(const TrainConfig& config, int evals, double obj, double gnorm) {
  if (config.verbose)
    std::fprintf(stderr, "[crf] eval %d objective %.6f |grad|inf %.3g\n", evals, obj, gnorm);
}

TrainReport TrainAdaptive(Objective& f, std::vector<double> w, std::size_t tokens,
                          const TrainConfig& config) {
  TrainReport report;
  std::vector<double> g, g_new, w_new(w.size());
  double obj = f(w, g);
  report.accepted_objectives.push_back(obj);
  double eta = 1.0 / static_cast<double>(std::max<std::size_t>(tokens, 1));
  int decreases = 0;
  while (f.evaluations < config.max_epochs) {
    if (InfNorm(g) < config.tolerance) {
      report.converged = true;
      break;
    }
    for (std::size_t i = 0; i < w.size(); ++i) w_new[i] = w[i] + eta * g[i];
    double obj_new = f(w_new, g_new);
    if (obj_new >= obj) {
      std::swap(w, w_new);
      std::swap(g, g_new);
      obj = obj_new;
      eta *= 1.1;
      decreases = 0;
      ++report.accepted_steps;
      report.accepted_objectives.push_back(obj);
      Log(config, f.evaluations, obj, InfNorm(g));
    } else {
      eta *= 0.5;
      if (++decreases >= kMaxConsecutiveDecreases)
        throw TrainingDiverged("CRF training diverged: objective decreased on " +
                               std::to_string(decreases) +
                               " consecutive evaluations (last step size " +
                               std::to_string(eta * 2) + ")");
    }
  }
  if (!report.converged && InfNorm(g) < config.tolerance) report.converged = true;
  f.Set(w);  // leave the model at the accepted point
  report.objective = obj;
  report.gradient_inf_norm = InfNorm(g);
  return report;
}

// Limited-memory BFGS on the negated objective with Armijo backtracking.
TrainReport TrainLbfgs(Objective& f, std::vector<double> w, const TrainConfig& config) {
  constexpr std::size_t kMemory = 7;
  TrainReport report;
  const std::size_t n = w.size();
  std::vector<double> g;
  double obj = f(w, g);
  report.accepted_objectives.push_back(obj);
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::vector<double> d(n), w_new(n), g_new, alpha(kMemory);
  bool first = true;
  while (f.evaluations < config.max_epochs) {
    if (InfNorm(g) < config.tolerance) {
      report.converged = true;
      break;
    }
    // Ascent direction from the two-loop recursion on the gradient.
    d = g;
    for (std::size_t m = s_hist.size(); m-- > 0;) {
      alpha[m] = rho_hist[m] * Dot(s_hist[m], d);
      for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[m] * y_hist[m][i];
    }
    if (!s_hist.empty()) {
      double scale = Dot(s_hist.back(), y_hist.back()) / Dot(y_hist.back(), y_hist.back());
      for (double& x : d) x *= scale;
    }
    for (std::size_t m = 0; m < s_hist.size(); ++m) {
      double beta = rho_hist[m] * Dot(y_hist[m], d);
      for (std::size_t i = 0; i < n; ++i) d[i] += (alpha[m] - beta) * s_hist[m][i];
    }
    double slope = Dot(g, d);
    if (slope <= 0.0) {  // not an ascent direction; restart from the gradient
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = g;
      slope = Dot(g, d);
    }
    double step = first ? 1.0 / std::max(1.0, std::sqrt(Dot(g, g))) : 1.0;
    int failures = 0;
    double obj_new = obj;
    bool stalled = false;
    while (true) {
      for (std::size_t i = 0; i < n; ++i) w_new[i] = w[i] + step * d[i];
      obj_new = f(w_new, g_new);
      if (obj_new >= obj + 1e-4 * step * slope) break;
      step *= 0.5;
      if (++failures >= kMaxConsecutiveDecreases) {
        // Flat within rounding: the optimum is reached for this precision.
        if (std::fabs(obj_new - obj) <= 1e-12 * std::max(1.0, std::fabs(obj))) {
          stalled = true;
          break;
        }
        throw TrainingDiverged("CRF training diverged: line search failed on " +
                               std::to_string(failures) + " consecutive evaluations");
      }
      if (f.evaluations >= config.max_epochs) break;
    }
    if (stalled && !s_hist.empty()) {
      // Retry once from plain gradient ascent before giving up.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      first = true;
      continue;
    }
    if (stalled || obj_new < obj) break;  // stalled or budget ran out mid line search
    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = w_new[i] - w[i];
      y[i] = g[i] - g_new[i];  // gradient of the negated objective
    }
    double sy = Dot(s, y);
    if (sy > 1e-10) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    std::swap(w, w_new);
    std::swap(g, g_new);
    obj = obj_new;
    first = false;
    ++report.accepted_steps;
    report.accepted_objectives.push_back(obj);
    Log(config, f.evaluations, obj, InfNorm(g));
  }
  if (!report.converged && InfNorm(g) < config.tolerance) report.converged = true;
  f.Set(w);
  report.objective = obj;
  report.gradient_inf_norm = InfNorm(g);
  return report;
}

}  // namespace

TrainReport TrainWeights(CrfModel& model, const std::vector<Lattice>& data,
                         const TrainConfig& config) {
  if (data.empty()) throw Error("CRF training: no instances");
  if (!(config.sigma2 > 0.0)) throw Error("CRF training: sigma2 must be > 0");
  if (!(config.tolerance > 0.0)) throw Error("CRF training: tolerance must be > 0");
  if (config.max_epochs < 1) throw Error("CRF training: max epochs must be >= 1");
  std::size_t tokens = 0;
  for (const auto& lat : data) tokens += lat.size();
  Objective f(model, data, config.sigma2);
  TrainReport report = config.step_rule == StepRule::kAdaptive
                           ? TrainAdaptive(f, model.weights(), tokens, config)
                           : TrainLbfgs(f, model.weights(), config);
  report.evaluations = f.evaluations;
  return report;
}

CrfModel TrainCrf(const std::vector<Instance>& instances,
                  const std::vector<std::string>& templates,
                  const std::vector<std::string>& labels, const TrainConfig& config,
                  TrainReport* report) {
  if (instances.empty()) throw Error("CRF training: no instances");
  CrfModel model = CompileModel(instances, templates, labels);
  std::vector<Lattice> data;
  data.reserve(instances.size());
  for (const auto& inst : instances) {
    if (!inst.labels) throw Error("CRF training: instance without labels");
    data.push_back(model.Compile(inst));
  }
  TrainReport r = TrainWeights(model, data, config);
  if (report) *report = r;
  return model;
}

}  // namespace slterr
