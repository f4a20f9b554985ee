#include "latentact/env.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "latentact/numeric.hpp"
#include "latentact/rng.hpp"

namespace latentact {

using json = nlohmann::json;

ObservationSpace ObservationSpace::Finite(int n) {
  if (n < 1) throw std::invalid_argument("ObservationSpace: finite size must be >= 1");
  ObservationSpace s;
  s.kind = Kind::kFinite;
  s.size = n;
  return s;
}

ObservationSpace ObservationSpace::Continuous(int d,
                                              std::vector<Eigen::VectorXd> grid) {
  if (d < 1) throw std::invalid_argument("ObservationSpace: dimension must be >= 1");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      if ((grid[i] - grid[j]).norm() == 0.0) {
        throw std::invalid_argument("ObservationSpace: grid states must be distinct");
      }
    }
  }
  ObservationSpace s;
  s.kind = Kind::kContinuous;
  s.dimension = d;
  s.grid = std::move(grid);
  return s;
}

void LatentEnv::validate() const {
  if (k < 1 || m < 1) throw std::invalid_argument("LatentEnv: k and m must be >= 1");
  if (states.empty()) throw std::invalid_argument("LatentEnv: no states");
  if (identifiable_by_construction && k > m) {
    throw std::invalid_argument(
        "LatentEnv: identifiable-by-construction requires k <= m");
  }
  if (Pi_star.size() != states.size()) {
    throw std::invalid_argument("LatentEnv: Pi_star size mismatch");
  }
  const double tol = 1e-12;
  for (const auto& pi : Pi_star) {
    if (pi.rows() != k || pi.cols() != m) {
      throw std::invalid_argument("LatentEnv: Pi_star shape mismatch");
    }
    if (StochasticMatrix::max_column_sum_deviation(pi.matrix()) > tol) {
      throw std::invalid_argument("LatentEnv: Pi_star column sums exceed 1e-12");
    }
  }
  if (finite()) {
    if (T_star.size() != states.size()) {
      throw std::invalid_argument("LatentEnv: T_star size mismatch");
    }
    for (const auto& t : T_star) {
      if (t.rows() != space.size || t.cols() != k) {
        throw std::invalid_argument("LatentEnv: T_star shape mismatch");
      }
      if (StochasticMatrix::max_column_sum_deviation(t.matrix()) > tol) {
        throw std::invalid_argument("LatentEnv: T_star column sums exceed 1e-12");
      }
    }
  } else {
    if (T_star_continuous.size() != states.size()) {
      throw std::invalid_argument("LatentEnv: T_star_continuous size mismatch");
    }
    for (const auto& dists : T_star_continuous) {
      if (int(dists.size()) != k) {
        throw std::invalid_argument("LatentEnv: per-state transition count != k");
      }
    }
  }
}

StartDistribution StartDistribution::Uniform(int num_states, int m) {
  StartDistribution s;
  s.weights = Eigen::MatrixXd::Constant(num_states, m,
                                        1.0 / double(num_states * m));
  return s;
}

double EmpiricalConditional::min_present_count() const {
  double lo = -1.0;
  for (std::size_t e = 0; e < missing.size(); ++e) {
    if (missing[e]) continue;
    const double c = counts.col(Eigen::Index(e)).sum();
    if (lo < 0.0 || c < lo) lo = c;
  }
  return lo < 0.0 ? 0.0 : lo;
}

StochasticMatrix mix_observable(const StochasticMatrix& T_o,
                                const StochasticMatrix& Pi_o) {
  if (T_o.cols() != Pi_o.rows()) {
    std::ostringstream msg;
    msg << "mix_observable: dimension mismatch, T is " << T_o.rows() << "x"
        << T_o.cols() << " but Pi is " << Pi_o.rows() << "x" << Pi_o.cols();
    throw std::invalid_argument(msg.str());
  }
  // StochasticMatrix enforces column sums within 1e-10 on construction; the
  // product of column-stochastic matrices is column-stochastic.
  return StochasticMatrix(T_o.matrix() * Pi_o.matrix());
}

TrajectoryBatch sample_transitions(const LatentEnv& env,
                                   const StartDistribution& start, int n,
                                   std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_transitions: N must be >= 1");
  env.validate();
  const int S = env.num_states();
  if (start.weights.rows() != S || start.weights.cols() != env.m) {
    throw std::invalid_argument("sample_transitions: start distribution shape mismatch");
  }
  const double mass = start.weights.sum();
  if (!(mass > 0.0) || start.weights.minCoeff() < 0.0) {
    throw std::invalid_argument("sample_transitions: degenerate start distribution");
  }

  // Flatten (state, demonstrator) pairs for categorical sampling.
  Eigen::VectorXd flat(S * env.m);
  for (int s = 0; s < S; ++s) {
    for (int e = 0; e < env.m; ++e) flat(s * env.m + e) = start.weights(s, e);
  }
  flat /= mass;

  TrajectoryBatch batch;
  batch.seed = seed;
  batch.state.reserve(std::size_t(n));
  batch.demonstrator.reserve(std::size_t(n));
  batch.next_state.reserve(std::size_t(n));

  Rng rng(derive_seed(seed, "sample-transitions"));
  for (int i = 0; i < n; ++i) {
    const int pair = int(rng.categorical(flat));
    const int s = pair / env.m;
    const int e = pair % env.m;
    const int a = int(rng.categorical(env.Pi_star[std::size_t(s)].matrix().col(e)));
    batch.state.push_back(s);
    batch.demonstrator.push_back(e);
    if (env.finite()) {
      const int next =
          int(rng.categorical(env.T_star[std::size_t(s)].matrix().col(a)));
      batch.next_state.push_back(next);
    } else {
      batch.next_state.push_back(-1);
      batch.next_point.push_back(
          env.T_star_continuous[std::size_t(s)][std::size_t(a)].sample(rng));
    }
  }
  return batch;
}

std::vector<EmpiricalConditional> estimate_conditionals(const TrajectoryBatch& batch,
                                                        const LatentEnv& env) {
  if (!env.finite()) {
    throw std::invalid_argument(
        "estimate_conditionals: finite observation space required");
  }
  const int S = env.num_states();
  const int n = env.space.size;
  std::vector<EmpiricalConditional> out(static_cast<std::size_t>(S));
  for (auto& cond : out) {
    cond.counts = Eigen::MatrixXd::Zero(n, env.m);
    cond.p_hat = Eigen::MatrixXd::Zero(n, env.m);
    cond.missing.assign(std::size_t(env.m), true);
  }
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const int s = batch.state[i];
    const int e = batch.demonstrator[i];
    const int next = batch.next_state[i];
    if (s < 0 || s >= S || e < 0 || e >= env.m || next < 0 || next >= n) {
      throw std::invalid_argument("estimate_conditionals: triple out of range");
    }
    out[std::size_t(s)].counts(next, e) += 1.0;
    out[std::size_t(s)].total += 1.0;
  }
  for (auto& cond : out) {
    for (int e = 0; e < env.m; ++e) {
      const double c = cond.counts.col(e).sum();
      if (c > 0.0) {
        cond.missing[std::size_t(e)] = false;
        cond.p_hat.col(e) = cond.counts.col(e) / c;
      }
    }
  }
  return out;
}

Counterexample build_counterexample() {
  Counterexample ce;
  Eigen::MatrixXd p(2, 1);
  p << 0.5, 0.5;
  ce.observable = StochasticMatrix(p);

  Eigen::MatrixXd ta(2, 2);
  ta << 1.0, 0.0, 0.0, 1.0;
  ce.T_a = StochasticMatrix(ta);
  ce.Pi_a = StochasticMatrix(p);

  Eigen::MatrixXd tb(2, 2);
  tb << 0.75, 0.25, 0.25, 0.75;
  ce.T_b = StochasticMatrix(tb);
  ce.Pi_b = StochasticMatrix(p);
  return ce;
}

LatentEnv make_random_finite_env(int n, int k, int m, std::uint64_t seed,
                                 bool separable_policy) {
  if (separable_policy && m < k) {
    throw std::invalid_argument(
        "make_random_finite_env: separable policy requires m >= k");
  }
  if (n < k) {
    throw std::invalid_argument("make_random_finite_env: need n >= k");
  }
  LatentEnv env;
  env.space = ObservationSpace::Finite(n);
  env.k = k;
  env.m = m;
  env.identifiable_by_construction = separable_policy;
  for (int s = 0; s < n; ++s) env.states.push_back("s" + std::to_string(s));

  // Assumption rank(P_o) = k is enforced with a numerical margin: transition
  // columns that are nearly observationally equivalent sit next to the
  // rank-deficient regime where identifiability genuinely degrades, so such
  // draws are rejected.
  constexpr double kSigmaMinFloor = 0.15;
  for (int s = 0; s < n; ++s) {
    Rng rng(derive_seed(seed, "env-state", std::uint64_t(s)));
    Eigen::MatrixXd T(n, k);
    for (int tries = 0;; ++tries) {
      for (int a = 0; a < k; ++a) T.col(a) = rng.simplex_uniform(n);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(T);
      if (svd.singularValues().minCoeff() >= kSigmaMinFloor || tries > 500) break;
    }
    Eigen::MatrixXd Pi(k, m);
    for (int tries = 0;; ++tries) {
      if (separable_policy) {
        Pi.leftCols(k) = Eigen::MatrixXd::Identity(k, k);
        for (int e = k; e < m; ++e) Pi.col(e) = rng.simplex_uniform(k);
      } else {
        for (int e = 0; e < m; ++e) Pi.col(e) = rng.simplex_uniform(k);
      }
      if (numerical_rank(Pi, 1e-9) == std::min(k, m) || tries > 100) break;
    }
    env.T_star.emplace_back(T);
    env.Pi_star.emplace_back(Pi);
  }
  env.validate();
  return env;
}

DictEnv make_dict_mixture_env(int d, int num_components, int k, int m,
                              int num_states, std::uint64_t seed,
                              double component_variance, double spread,
                              double bandwidth) {
  if (m < k) throw std::invalid_argument("make_dict_mixture_env: need m >= k");
  if (num_components < k) {
    throw std::invalid_argument("make_dict_mixture_env: need at least k components");
  }
  Rng rng(derive_seed(seed, "dict-env"));
  std::vector<Eigen::VectorXd> means;
  means.reserve(std::size_t(num_components));
  for (int i = 0; i < num_components; ++i) {
    Eigen::VectorXd mu(d);
    for (int j = 0; j < d; ++j) mu(j) = rng.uniform(-spread, spread);
    means.push_back(std::move(mu));
  }
  auto dict = ComponentDictionary::MakeGaussian(means, component_variance, bandwidth);

  DictEnv out;
  out.dictionary = dict;
  out.env.space = ObservationSpace::Continuous(d);
  out.env.k = k;
  out.env.m = m;
  out.env.identifiable_by_construction = true;

  for (int s = 0; s < num_states; ++s) {
    out.env.states.push_back("s" + std::to_string(s));
    Rng state_rng(derive_seed(seed, "dict-env-state", std::uint64_t(s)));
    Eigen::MatrixXd C(num_components, k);
    for (int tries = 0;; ++tries) {
      for (int a = 0; a < k; ++a) C.col(a) = state_rng.simplex_uniform(num_components);
      std::vector<TransitionDistribution> dists;
      for (int a = 0; a < k; ++a) {
        dists.push_back(TransitionDistribution::DictMixture(dict, C.col(a)));
      }
      if (embedded_rank(dists, dict->kernel(), 1e-9) == k || tries > 100) {
        out.env.T_star_continuous.push_back(std::move(dists));
        break;
      }
    }
    out.coords_star.emplace_back(C);

    Eigen::MatrixXd Pi(k, m);
    Pi.leftCols(k) = Eigen::MatrixXd::Identity(k, k);
    for (int e = k; e < m; ++e) Pi.col(e) = state_rng.simplex_uniform(k);
    out.env.Pi_star.emplace_back(Pi);
  }
  out.env.validate();
  return out;
}

LatentEnv make_smooth_path_env(int nodes, int k, int m, std::uint64_t seed) {
  if (nodes < 2) throw std::invalid_argument("make_smooth_path_env: need >= 2 nodes");
  if (m < k) throw std::invalid_argument("make_smooth_path_env: need m >= k");
  LatentEnv env;
  env.k = k;
  env.m = m;
  env.identifiable_by_construction = true;

  std::vector<Eigen::VectorXd> grid;
  Rng rng(derive_seed(seed, "path-env"));
  Eigen::MatrixXd Pi(k, m);
  Pi.leftCols(k) = Eigen::MatrixXd::Identity(k, k);
  for (int e = k; e < m; ++e) Pi.col(e) = rng.simplex_uniform(k);

  for (int s = 0; s < nodes; ++s) {
    const double x = double(s) / double(nodes - 1);
    Eigen::VectorXd pos(2);
    pos << x, 0.0;
    grid.push_back(pos);
    env.states.push_back("s" + std::to_string(s));

    std::vector<TransitionDistribution> dists;
    for (int a = 0; a < k; ++a) {
      // Smooth drift in the first coordinate, fixed action offset in the
      // second; distinct actions stay ~1 apart while neighbors differ by
      // ~1/(nodes-1).
      Eigen::VectorXd target(2);
      target << x + 0.1 * std::sin(2.0 * 3.14159265358979323846 * x + a),
          double(a);
      dists.push_back(TransitionDistribution::Dirac(target));
    }
    env.T_star_continuous.push_back(std::move(dists));
    env.Pi_star.emplace_back(Pi);
  }
  env.space = ObservationSpace::Continuous(2, std::move(grid));
  env.validate();
  return env;
}

// --- Serialization ----------------------------------------------------------

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(std::size_t(m.size()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) data.push_back(m(r, c));
  }
  j["data"] = data;  // column-major
  return j;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (Eigen::Index(data.size()) != rows * cols) {
    throw std::invalid_argument("matrix_from_json: data length mismatch");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t idx = 0;
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = data[idx++];
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto data = j.get<std::vector<double>>();
  Eigen::VectorXd v(Eigen::Index(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) v(Eigen::Index(i)) = data[i];
  return v;
}

json distribution_to_json(const TransitionDistribution& d) {
  json j;
  switch (d.kind()) {
    case TransitionDistribution::Kind::kCategorical:
      j["kind"] = "categorical";
      j["weights"] = vector_to_json(d.weights());
      break;
    case TransitionDistribution::Kind::kGaussian:
      j["kind"] = d.is_dirac() ? "dirac" : "gaussian";
      j["mean"] = vector_to_json(d.mean());
      if (!d.is_dirac()) j["variance"] = d.variance();
      break;
    case TransitionDistribution::Kind::kDictMixture:
      j["kind"] = "dict_mixture";
      j["weights"] = vector_to_json(d.weights());
      break;
    case TransitionDistribution::Kind::kEmpirical: {
      j["kind"] = "empirical";
      json pts = json::array();
      for (const auto& p : d.points()) pts.push_back(vector_to_json(p));
      j["points"] = pts;
      break;
    }
  }
  return j;
}

TransitionDistribution distribution_from_json(
    const json& j, const std::shared_ptr<const ComponentDictionary>& dict) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "categorical") {
    return TransitionDistribution::Categorical(vector_from_json(j.at("weights")));
  }
  if (kind == "gaussian") {
    return TransitionDistribution::Gaussian(vector_from_json(j.at("mean")),
                                            j.at("variance").get<double>());
  }
  if (kind == "dirac") {
    return TransitionDistribution::Dirac(vector_from_json(j.at("mean")));
  }
  if (kind == "dict_mixture") {
    if (!dict) {
      throw std::invalid_argument(
          "distribution_from_json: dict_mixture without dictionary");
    }
    return TransitionDistribution::DictMixture(dict,
                                               vector_from_json(j.at("weights")));
  }
  if (kind == "empirical") {
    std::vector<Eigen::VectorXd> pts;
    for (const auto& p : j.at("points")) pts.push_back(vector_from_json(p));
    return TransitionDistribution::Empirical(std::move(pts));
  }
  throw std::invalid_argument("distribution_from_json: unknown kind " + kind);
}

json kernel_to_json(const Kernel& k) {
  json j;
  if (k.kind == Kernel::Kind::kGaussian) {
    j["kind"] = "gaussian";
    j["bandwidth"] = k.bandwidth;
    j["dim"] = k.dimension;
  } else {
    j["kind"] = "finite-delta";
    j["size"] = k.dimension;
  }
  return j;
}

Kernel kernel_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "gaussian") {
    return Kernel::Gaussian(j.at("bandwidth").get<double>(), j.at("dim").get<int>());
  }
  if (kind == "finite-delta") return Kernel::FiniteDelta(j.at("size").get<int>());
  throw std::invalid_argument("kernel_from_json: unknown kind " + kind);
}

}  // namespace

std::string env_to_json(const LatentEnv& env) {
  env.validate();
  json j;
  j["k"] = env.k;
  j["m"] = env.m;
  if (env.finite()) {
    j["space"] = {{"kind", "finite"}, {"size", env.space.size}};
  } else {
    j["space"] = {{"kind", "continuous"}, {"dim", env.space.dimension}};
    if (!env.space.grid.empty()) {
      json grid = json::array();
      for (const auto& g : env.space.grid) grid.push_back(vector_to_json(g));
      j["space"]["grid"] = grid;
    }
  }
  j["states"] = env.states;
  j["identifiable_by_construction"] = env.identifiable_by_construction;

  json t_star = json::object();
  if (env.finite()) {
    for (int s = 0; s < env.num_states(); ++s) {
      t_star[env.states[std::size_t(s)]] =
          matrix_to_json(env.T_star[std::size_t(s)].matrix());
    }
  } else {
    // Serialize a shared dictionary once when present.
    std::shared_ptr<const ComponentDictionary> dict;
    for (const auto& dists : env.T_star_continuous) {
      for (const auto& d : dists) {
        if (d.kind() == TransitionDistribution::Kind::kDictMixture) {
          dict = d.dictionary();
        }
      }
    }
    if (dict) {
      json dj;
      dj["kernel"] = kernel_to_json(dict->kernel());
      json comps = json::array();
      for (const auto& c : dict->components()) comps.push_back(distribution_to_json(c));
      dj["components"] = comps;
      j["dictionary"] = dj;
    }
    for (int s = 0; s < env.num_states(); ++s) {
      json dists = json::array();
      for (const auto& d : env.T_star_continuous[std::size_t(s)]) {
        dists.push_back(distribution_to_json(d));
      }
      t_star[env.states[std::size_t(s)]] = dists;
    }
  }
  j["T_star"] = t_star;

  json pi_star = json::object();
  for (int s = 0; s < env.num_states(); ++s) {
    pi_star[env.states[std::size_t(s)]] =
        matrix_to_json(env.Pi_star[std::size_t(s)].matrix());
  }
  j["Pi_star"] = pi_star;
  return j.dump(2);
}

LatentEnv env_from_json(const std::string& text) {
  const json j = json::parse(text);
  LatentEnv env;
  env.k = j.at("k").get<int>();
  env.m = j.at("m").get<int>();
  const auto& space = j.at("space");
  const std::string kind = space.at("kind").get<std::string>();
  if (kind == "finite") {
    env.space = ObservationSpace::Finite(space.at("size").get<int>());
  } else if (kind == "continuous") {
    std::vector<Eigen::VectorXd> grid;
    if (space.contains("grid")) {
      for (const auto& g : space.at("grid")) grid.push_back(vector_from_json(g));
    }
    env.space = ObservationSpace::Continuous(space.at("dim").get<int>(), grid);
  } else {
    throw std::invalid_argument("env_from_json: unknown space kind " + kind);
  }
  env.states = j.at("states").get<std::vector<std::string>>();
  env.identifiable_by_construction =
      j.value("identifiable_by_construction", false);

  std::shared_ptr<const ComponentDictionary> dict;
  if (j.contains("dictionary")) {
    const auto& dj = j.at("dictionary");
    const Kernel kernel = kernel_from_json(dj.at("kernel"));
    std::vector<TransitionDistribution> comps;
    for (const auto& c : dj.at("components")) {
      comps.push_back(distribution_from_json(c, nullptr));
    }
    dict = std::make_shared<const ComponentDictionary>(std::move(comps), kernel);
  }

  for (const auto& name : env.states) {
    if (env.finite()) {
      env.T_star.emplace_back(matrix_from_json(j.at("T_star").at(name)), 1e-10);
    } else {
      std::vector<TransitionDistribution> dists;
      for (const auto& dj : j.at("T_star").at(name)) {
        dists.push_back(distribution_from_json(dj, dict));
      }
      env.T_star_continuous.push_back(std::move(dists));
    }
    env.Pi_star.emplace_back(matrix_from_json(j.at("Pi_star").at(name)), 1e-10);
  }
  env.validate();
  return env;
}

std::string batch_to_csv(const TrajectoryBatch& batch) {
  std::ostringstream out;
  out.precision(17);
  out << "o,o_next,e\n";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out << batch.state[i] << ",";
    if (batch.next_state[i] >= 0) {
      out << batch.next_state[i];
    } else {
      const Eigen::VectorXd& p = batch.next_point[i];
      for (Eigen::Index d = 0; d < p.size(); ++d) {
        if (d > 0) out << ";";
        out << p(d);
      }
    }
    out << "," << batch.demonstrator[i] << "\n";
  }
  return out.str();
}

TrajectoryBatch batch_from_csv(const std::string& text) {
  TrajectoryBatch batch;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.rfind(',');
    if (c1 == std::string::npos || c2 == c1) {
      throw std::invalid_argument("batch_from_csv: malformed line: " + line);
    }
    batch.state.push_back(std::stoi(line.substr(0, c1)));
    batch.demonstrator.push_back(std::stoi(line.substr(c2 + 1)));
    const std::string next = line.substr(c1 + 1, c2 - c1 - 1);
    if (next.find(';') == std::string::npos &&
        next.find('.') == std::string::npos) {
      batch.next_state.push_back(std::stoi(next));
    } else {
      std::vector<double> coords;
      std::istringstream ns(next);
      std::string tok;
      while (std::getline(ns, tok, ';')) coords.push_back(std::stod(tok));
      Eigen::VectorXd p(Eigen::Index(coords.size()));
      for (std::size_t d = 0; d < coords.size(); ++d) p(Eigen::Index(d)) = coords[d];
      batch.next_state.push_back(-1);
      batch.next_point.push_back(std::move(p));
    }
  }
  return batch;
}

}  // namespace latentact
