#include "slterr/crf.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "slterr/error.h"

namespace slterr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogSumExp(const double* v, std::size_t k) {
  double mx = kNegInf;
  for (std::size_t i = 0; i < k; ++i) mx = std::max(mx, v[i]);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += std::exp(v[i] - mx);
  return mx + std::log(s);
}

std::string PadValue(int offset) {
  return offset < 0 ? "_X" + std::to_string(offset) : "_X+" + std::to_string(offset);
}

// Dense score tables for one lattice.
struct Scores {
  std::size_t n = 0, k = 0;
  std::vector<double> unary;  // [t*k + label]
  const double* trans = nullptr;
  const double* begin = nullptr;
  const double* end = nullptr;

  double U(std::size_t t, std::size_t y) const { return unary[t * k + y]; }
  double T(std::size_t a, std::size_t b) const { return trans[a * k + b]; }
};

Scores ComputeScores(const CrfModel& model, const Lattice& lat) {
  Scores s;
  s.n = lat.size();
  s.k = model.num_labels();
  const auto& w = model.weights();
  s.unary.assign(s.n * s.k, 0.0);
  for (std::size_t t = 0; t < s.n; ++t)
    for (std::uint32_t o : lat.obs[t])
      for (std::size_t y = 0; y < s.k; ++y) s.unary[t * s.k + y] += w[model.UnigramIndex(o, y)];
  s.trans = w.data() + model.TransitionIndex(0, 0);
  s.begin = w.data() + model.BeginIndex(0);
  s.end = w.data() + model.EndIndex(0);
  return s;
}

bool Allowed(const std::uint32_t* allowed, std::size_t t, std::size_t y) {
  return !allowed || (allowed[t] >> y) & 1u;
}

// alpha[t*k + y] = log sum over prefixes ending in y at t. Returns log Z.
double Forward(const Scores& s, const std::uint32_t* allowed, std::vector<double>& alpha) {
  const std::size_t n = s.n, k = s.k;
  alpha.assign(n * k, kNegInf);
  std::vector<double> tmp(k);
  for (std::size_t y = 0; y < k; ++y)
    if (Allowed(allowed, 0, y)) alpha[y] = s.begin[y] + s.U(0, y);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t y = 0; y < k; ++y) {
      if (!Allowed(allowed, t, y)) continue;
      for (std::size_t p = 0; p < k; ++p) tmp[p] = alpha[(t - 1) * k + p] + s.T(p, y);
      alpha[t * k + y] = LogSumExp(tmp.data(), k) + s.U(t, y);
    }
  }
  for (std::size_t y = 0; y < k; ++y) tmp[y] = alpha[(n - 1) * k + y] + s.end[y];
  return LogSumExp(tmp.data(), k);
}

// beta[t*k + y] = log sum over suffixes after y at t (excluding U(t, y)).
void Backward(const Scores& s, const std::uint32_t* allowed, std::vector<double>& beta) {
  const std::size_t n = s.n, k = s.k;
  beta.assign(n * k, kNegInf);
  std::vector<double> tmp(k);
  for (std::size_t y = 0; y < k; ++y) beta[(n - 1) * k + y] = s.end[y];
  for (std::size_t t = n - 1; t-- > 0;) {
    for (std::size_t y = 0; y < k; ++y) {
      for (std::size_t q = 0; q < k; ++q)
        tmp[q] = Allowed(allowed, t + 1, q)
                     ? s.T(y, q) + s.U(t + 1, q) + beta[(t + 1) * k + q]
                     : kNegInf;
      beta[t * k + y] = LogSumExp(tmp.data(), k);
    }
  }
}

// Adds sign * E[feature counts] under the (possibly constrained) distribution.
void AccumulateExpectations(const CrfModel& model, const Lattice& lat, const Scores& s,
                            const std::uint32_t* allowed, double sign,
                            std::vector<double>& grad) {
  const std::size_t n = s.n, k = s.k;
  std::vector<double> alpha, beta;
  const double log_z = Forward(s, allowed, alpha);
  Backward(s, allowed, beta);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t y = 0; y < k; ++y) {
      double a = alpha[t * k + y];
      if (a == kNegInf) continue;
      double p = std::exp(a + beta[t * k + y] - log_z);
      for (std::uint32_t o : lat.obs[t]) grad[model.UnigramIndex(o, y)] += sign * p;
      if (t == 0) grad[model.BeginIndex(y)] += sign * p;
      if (t == n - 1) grad[model.EndIndex(y)] += sign * p;
    }
  }
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t p = 0; p < k; ++p) {
      double a = alpha[(t - 1) * k + p];
      if (a == kNegInf) continue;
      for (std::size_t y = 0; y < k; ++y) {
        if (!Allowed(allowed, t, y)) continue;
        double pr = std::exp(a + s.T(p, y) + s.U(t, y) + beta[t * k + y] - log_z);
        grad[model.TransitionIndex(p, y)] += sign * pr;
      }
    }
  }
}

bool SingleLabelEverywhere(const Lattice& lat) {
  return std::all_of(lat.allowed.begin(), lat.allowed.end(),
                     [](std::uint32_t m) { return m != 0 && (m & (m - 1)) == 0; });
}

int LowestBit(std::uint32_t m) {
  int i = 0;
  while (!((m >> i) & 1u)) ++i;
  return i;
}

}  // namespace

// ---------------------------------------------------------------------------
// Model

CrfModel::CrfModel(std::vector<std::string> labels, std::vector<Template> templates)
    : labels_(std::move(labels)), templates_(std::move(templates)) {
  if (labels_.empty() || labels_.size() > 32)
    throw Error("CRF label set must have 1..32 labels");
  Reindex();
}

void CrfModel::Reindex() {
  const std::size_t k = labels_.size();
  weights_.assign(obs_names_.size() * k + k * k + 2 * k, 0.0);
}

int CrfModel::LabelIndex(std::string_view name) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == name) return static_cast<int>(i);
  return -1;
}

std::uint32_t CrfModel::AddObservation(const std::string& name) {
  auto [it, inserted] =
      obs_index_.emplace(name, static_cast<std::uint32_t>(obs_names_.size()));
  if (inserted) {
    obs_names_.push_back(name);
    weights_.resize(weights_.size() + num_labels(), 0.0);
  }
  return it->second;
}

void CrfModel::ResizeObservations(std::size_t count) {
  obs_names_.clear();
  obs_index_.clear();
  for (std::size_t i = 0; i < count; ++i) {
    obs_names_.push_back("#" + std::to_string(i));
    obs_index_.emplace(obs_names_.back(), static_cast<std::uint32_t>(i));
  }
  Reindex();
}

std::vector<std::vector<std::string>> CrfModel::Observations(const AttrSeq& attrs) const {
  std::vector<std::vector<int>> columns;
  for (const auto& t : templates_) {
    std::vector<int> cols;
    for (const auto& item : t.items) {
      int c = attrs.Find(item.attr);
      if (c < 0)
        throw Error("template '" + t.text + "' references unknown attribute '" +
                    item.attr + "'");
      cols.push_back(c);
    }
    columns.push_back(std::move(cols));
  }
  const long n = static_cast<long>(attrs.size());
  std::vector<std::vector<std::string>> out(attrs.size());
  for (long i = 0; i < n; ++i) {
    for (std::size_t ti = 0; ti < templates_.size(); ++ti) {
      const Template& t = templates_[ti];
      std::string obs = t.text + "=";
      for (std::size_t k = 0; k < t.items.size(); ++k) {
        if (k) obs += ' ';
        long pos = i + t.items[k].offset;
        if (pos < 0 || pos >= n)
          obs += PadValue(t.items[k].offset);
        else
          obs += attrs.values[static_cast<std::size_t>(pos)]
                             [static_cast<std::size_t>(columns[ti][k])];
      }
      out[static_cast<std::size_t>(i)].push_back(std::move(obs));
    }
  }
  return out;
}

Lattice CrfModel::Compile(const Instance& instance) const {
  Lattice lat;
  auto obs = Observations(instance.attrs);
  lat.obs.resize(obs.size());
  for (std::size_t t = 0; t < obs.size(); ++t)
    for (const auto& o : obs[t])
      if (auto it = obs_index_.find(o); it != obs_index_.end())
        lat.obs[t].push_back(it->second);
  if (instance.labels) {
    const std::uint32_t all =
        num_labels() == 32 ? 0xffffffffu : ((1u << num_labels()) - 1u);
    lat.allowed.resize(instance.size());
    for (std::size_t t = 0; t < instance.size(); ++t) {
      if (!instance.mask.empty() && !instance.mask[t]) {
        lat.allowed[t] = all;
        continue;
      }
      int y = LabelIndex(LabelName((*instance.labels)[t]));
      if (y < 0)
        throw Error("label '" + std::string(LabelName((*instance.labels)[t])) +
                    "' is not in the model label set");
      lat.allowed[t] = 1u << y;
    }
  }
  return lat;
}

CrfModel CompileModel(const std::vector<Instance>& instances,
                      const std::vector<std::string>& templates,
                      const std::vector<std::string>& labels) {
  std::vector<Template> parsed;
  for (const auto& t : templates) parsed.push_back(ParseTemplate(t));
  CrfModel model(labels, parsed);
  for (const auto& inst : instances)
    for (const auto& token : model.Observations(inst.attrs))
      for (const auto& o : token) model.AddObservation(o);
  return model;
}

// ---------------------------------------------------------------------------
// Inference

double PathScore(const CrfModel& model, const Lattice& lat, const std::vector<int>& y) {
  Scores s = ComputeScores(model, lat);
  if (s.n == 0) return 0.0;
  double score = s.begin[y[0]] + s.end[y[s.n - 1]];
  for (std::size_t t = 0; t < s.n; ++t) {
    score += s.U(t, static_cast<std::size_t>(y[t]));
    if (t) score += s.T(static_cast<std::size_t>(y[t - 1]), static_cast<std::size_t>(y[t]));
  }
  return score;
}

double LogPartition(const CrfModel& model, const Lattice& lat) {
  if (lat.size() == 0) return 0.0;
  Scores s = ComputeScores(model, lat);
  std::vector<double> alpha;
  return Forward(s, nullptr, alpha);
}

double LogLikelihoodAndGradient(const CrfModel& model, const Lattice& lat,
                                std::vector<double>* grad) {
  if (!lat.labeled() || lat.size() == 0) return 0.0;
  Scores s = ComputeScores(model, lat);
  std::vector<double> alpha;
  const double log_z = Forward(s, nullptr, alpha);

  double log_num;
  const bool single = SingleLabelEverywhere(lat);
  if (single) {
    std::vector<int> y(s.n);
    for (std::size_t t = 0; t < s.n; ++t) y[t] = LowestBit(lat.allowed[t]);
    log_num = PathScore(model, lat, y);
    if (grad) {
      auto& g = *grad;
      for (std::size_t t = 0; t < s.n; ++t) {
        auto yt = static_cast<std::size_t>(y[t]);
        for (std::uint32_t o : lat.obs[t]) g[model.UnigramIndex(o, yt)] += 1.0;
        if (t) g[model.TransitionIndex(static_cast<std::size_t>(y[t - 1]), yt)] += 1.0;
      }
      g[model.BeginIndex(static_cast<std::size_t>(y[0]))] += 1.0;
      g[model.EndIndex(static_cast<std::size_t>(y[s.n - 1]))] += 1.0;
    }
  } else {
    std::vector<double> alpha_c;
    log_num = Forward(s, lat.allowed.data(), alpha_c);
    if (grad) AccumulateExpectations(model, lat, s, lat.allowed.data(), 1.0, *grad);
  }
  if (grad) AccumulateExpectations(model, lat, s, nullptr, -1.0, *grad);
  return log_num - log_z;
}

ViterbiResult Viterbi(const CrfModel& model, const Lattice& lat) {
  ViterbiResult out;
  const std::size_t n = lat.size();
  if (n == 0) return out;
  Scores s = ComputeScores(model, lat);
  const std::size_t k = s.k;
  std::vector<double> delta(n * k);
  std::vector<int> back(n * k, 0);
  for (std::size_t y = 0; y < k; ++y) delta[y] = s.begin[y] + s.U(0, y);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t y = 0; y < k; ++y) {
      double best = kNegInf;
      int arg = 0;
      for (std::size_t p = 0; p < k; ++p) {
        double v = delta[(t - 1) * k + p] + s.T(p, y);
        if (v > best) {
          best = v;
          arg = static_cast<int>(p);
        }
      }
      delta[t * k + y] = best + s.U(t, y);
      back[t * k + y] = arg;
    }
  }
  double best = kNegInf;
  int arg = 0;
  for (std::size_t y = 0; y < k; ++y) {
    double v = delta[(n - 1) * k + y] + s.end[y];
    if (v > best) {
      best = v;
      arg = static_cast<int>(y);
    }
  }
  out.labels.assign(n, 0);
  out.labels[n - 1] = arg;
  for (std::size_t t = n - 1; t > 0; --t)
    out.labels[t - 1] = back[t * k + static_cast<std::size_t>(out.labels[t])];
  std::vector<double> alpha;
  out.score = best - Forward(s, nullptr, alpha);
  return out;
}

std::vector<std::vector<double>> Marginals(const CrfModel& model, const Lattice& lat) {
  const std::size_t n = lat.size();
  std::vector<std::vector<double>> out(n);
  if (n == 0) return out;
  Scores s = ComputeScores(model, lat);
  std::vector<double> alpha, beta;
  const double log_z = Forward(s, nullptr, alpha);
  Backward(s, nullptr, beta);
  for (std::size_t t = 0; t < n; ++t) {
    out[t].resize(s.k);
    for (std::size_t y = 0; y < s.k; ++y)
      out[t][y] = std::exp(alpha[t * s.k + y] + beta[t * s.k + y] - log_z);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr const char* kMagic = "slterr-crf 1";
constexpr const char* kTransPattern = "__trans__";

}  // namespace

std::string CrfModel::Serialize() const {
  std::ostringstream out;
  const std::size_t k = num_labels();
  out << kMagic << "\nlabels";
  for (const auto& l : labels_) out << '\t' << l;
  out << "\ntemplates";
  for (const auto& t : templates_) out << '\t' << t.text;
  out << "\nobservations\t" << obs_names_.size() << "\nfeatures\t" << weights_.size()
      << '\n';
  for (std::size_t o = 0; o < obs_names_.size(); ++o)
    for (std::size_t y = 0; y < k; ++y)
      out << obs_names_[o] << '\t' << labels_[y] << '\t'
          << FormatExact(weights_[UnigramIndex(static_cast<std::uint32_t>(o), y)]) << '\n';
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t y = 0; y < k; ++y)
      out << kTransPattern << '\t' << labels_[p] << '>' << labels_[y] << '\t'
          << FormatExact(weights_[TransitionIndex(p, y)]) << '\n';
  for (std::size_t y = 0; y < k; ++y)
    out << kTransPattern << "\t^>" << labels_[y] << '\t'
        << FormatExact(weights_[BeginIndex(y)]) << '\n';
  for (std::size_t y = 0; y < k; ++y)
    out << kTransPattern << '\t' << labels_[y] << ">$\t"
        << FormatExact(weights_[EndIndex(y)]) << '\n';
  out << "end\n";
  return out.str();
}

void CrfModel::Save(const std::filesystem::path& path) const {
  WriteFileAtomic(path, Serialize());
}

CrfModel CrfModel::Parse(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw ParseError(source + ":" + std::to_string(lineno) + ": " + msg, source, lineno);
  };
  auto next = [&](const char* expect) {
    if (!std::getline(in, line)) {
      ++lineno;
      fail(std::string("unexpected end of file (truncated model?), expected ") + expect);
    }
    ++lineno;
  };
  auto split_tabs = [](const std::string& s) {
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      auto tab = s.find('\t', start);
      f.push_back(s.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    return f;
  };
  auto parse_double = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    fail("malformed weight '" + s + "'");
    return 0.0;
  };
  auto parse_count = [&](const std::vector<std::string>& f, const char* key) {
    if (f.size() != 2 || f[0] != key) fail(std::string("expected '") + key + "<TAB>count'");
    try {
      return static_cast<std::size_t>(std::stoull(f[1]));
    } catch (const std::exception&) {
      fail("malformed count");
    }
    return std::size_t{0};
  };

  next("header");
  if (line != kMagic) fail("not a CRF model file");
  next("labels");
  auto f = split_tabs(line);
  if (f.empty() || f[0] != "labels" || f.size() < 2) fail("expected 'labels<TAB>...'");
  std::vector<std::string> labels(f.begin() + 1, f.end());
  next("templates");
  f = split_tabs(line);
  if (f.empty() || f[0] != "templates") fail("expected 'templates<TAB>...'");
  std::vector<Template> templates;
  for (std::size_t i = 1; i < f.size(); ++i) {
    try {
      templates.push_back(ParseTemplate(f[i]));
    } catch (const Error& e) {
      fail(e.what());
    }
  }
  CrfModel model(labels, templates);
  next("observations");
  const std::size_t num_obs = parse_count(split_tabs(line), "observations");
  next("features");
  const std::size_t num_features = parse_count(split_tabs(line), "features");
  const std::size_t k = labels.size();
  if (num_features != num_obs * k + k * k + 2 * k)
    fail("feature count does not match observations and labels");

  model.obs_names_.reserve(num_obs);
  std::vector<double> unigram, weights;
  unigram.reserve(num_obs * k);
  weights.reserve(num_features);
  for (std::size_t o = 0; o < num_obs; ++o) {
    for (std::size_t y = 0; y < k; ++y) {
      next("observation weight");
      f = split_tabs(line);
      if (f.size() != 3) fail("expected 'pattern<TAB>label<TAB>weight'");
      if (f[1] != labels[y]) fail("label out of order: '" + f[1] + "'");
      if (y == 0) {
        if (!model.obs_index_.emplace(f[0], static_cast<std::uint32_t>(o)).second)
          fail("duplicate observation '" + f[0] + "'");
        model.obs_names_.push_back(f[0]);
      } else if (f[0] != model.obs_names_.back()) {
        fail("observation block interrupted");
      }
      unigram.push_back(parse_double(f[2]));
    }
  }
  auto trans_line = [&](const std::string& expect_labels) {
    next("transition weight");
    f = split_tabs(line);
    if (f.size() != 3 || f[0] != kTransPattern || f[1] != expect_labels)
      fail("expected transition '" + expect_labels + "'");
    weights.push_back(parse_double(f[2]));
  };
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t y = 0; y < k; ++y) trans_line(labels[p] + ">" + labels[y]);
  for (std::size_t y = 0; y < k; ++y) trans_line("^>" + labels[y]);
  for (std::size_t y = 0; y < k; ++y) trans_line(labels[y] + ">$");
  next("end marker");
  if (line != "end") fail("expected 'end'");
  weights.insert(weights.end(), unigram.begin(), unigram.end());
  model.weights_ = std::move(weights);
  return model;
}

CrfModel CrfModel::Load(const std::filesystem::path& path) {
  return Parse(ReadFile(path), path.string());
}

}  // namespace slterr
