#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "learners_impl.hpp"

namespace fluscope::learners {

namespace {

struct Problem {
  std::size_t n = 0, d = 0;
  std::vector<double> x;  // row-major n x d
  std::vector<double> y;  // +1 sick, -1 not sick
  std::vector<double> scale;

  std::span<const double> row(std::size_t i) const { return {x.data() + i * d, d}; }
};

Problem make_problem(const Dataset& data, bool scale) {
  Problem p;
  p.n = data.size();
  p.d = data.n_features();
  p.scale.assign(p.d, 1.0);
  if (scale) {
    for (std::size_t j = 0; j < p.d; ++j) {
      double m = 0;
      for (std::size_t i = 0; i < p.n; ++i) m = std::max(m, std::abs(data.at(i, j)));
      if (m > 0) p.scale[j] = m;
    }
  }
  p.x.resize(p.n * p.d);
  p.y.resize(p.n);
  for (std::size_t i = 0; i < p.n; ++i) {
    for (std::size_t j = 0; j < p.d; ++j) p.x[i * p.d + j] = data.at(i, j) / p.scale[j];
    p.y[i] = is_sick(data.label(i)) ? 1.0 : -1.0;
  }
  return p;
}

double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// params = [w (d), b]; bias unpenalized.
double objective(const Problem& p, std::span<const double> params, double lambda, std::vector<double>* grad) {
  const std::span<const double> w = params.first(p.d);
  const double b = params[p.d];
  double f = 0;
  if (grad) grad->assign(p.d + 1, 0.0);
  for (std::size_t i = 0; i < p.n; ++i) {
    const auto xi = p.row(i);
    const double m = p.y[i] * (dot(w, xi) + b);
    f += softplus(-m);
    if (grad) {
      const double coef = -p.y[i] * logistic(-m);
      for (std::size_t j = 0; j < p.d; ++j) (*grad)[j] += coef * xi[j];
      (*grad)[p.d] += coef;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(p.n);
  f *= inv_n;
  f += 0.5 * lambda * dot(w, w);
  if (grad) {
    for (auto& g : *grad) g *= inv_n;
    for (std::size_t j = 0; j < p.d; ++j) (*grad)[j] += lambda * w[j];
  }
  return f;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

// Limited-memory BFGS with Armijo backtracking.
std::vector<double> minimize_logistic(const Problem& p, double lambda, int max_iter, double tol) {
  const std::size_t m = p.d + 1;
  std::vector<double> x(m, 0.0), g, g_new, x_new(m), dir(m);
  double f = objective(p, x, lambda, &g);
  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> memory;
  constexpr std::size_t kMemory = 10;

  for (int iter = 0; iter < max_iter; ++iter) {
    if (norm(g) < tol) break;
    // Two-loop recursion.
    for (std::size_t j = 0; j < m; ++j) dir[j] = -g[j];
    std::vector<double> alpha(memory.size());
    for (std::size_t k = memory.size(); k-- > 0;) {
      alpha[k] = memory[k].rho * dot(memory[k].s, dir);
      for (std::size_t j = 0; j < m; ++j) dir[j] -= alpha[k] * memory[k].y[j];
    }
    if (!memory.empty()) {
      const auto& last = memory.back();
      const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (auto& v : dir) v *= gamma;
    }
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const double beta = memory[k].rho * dot(memory[k].y, dir);
      for (std::size_t j = 0; j < m; ++j) dir[j] += (alpha[k] - beta) * memory[k].s[j];
    }
    double slope = dot(g, dir);
    if (!(slope < 0)) {
      memory.clear();
      for (std::size_t j = 0; j < m; ++j) dir[j] = -g[j];
      slope = dot(g, dir);
    }
    double step = memory.empty() ? 1.0 / std::max(1.0, norm(g)) : 1.0;
    double f_new = 0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t j = 0; j < m; ++j) x_new[j] = x[j] + step * dir[j];
      f_new = objective(p, x_new, lambda, &g_new);
      if (f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    Pair pr{std::vector<double>(m), std::vector<double>(m), 0.0};
    for (std::size_t j = 0; j < m; ++j) {
      pr.s[j] = x_new[j] - x[j];
      pr.y[j] = g_new[j] - g[j];
    }
    const double sy = dot(pr.s, pr.y);
    if (sy > 1e-16) {
      pr.rho = 1.0 / sy;
      memory.push_back(std::move(pr));
      if (memory.size() > kMemory) memory.pop_front();
    }
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
  }
  return x;
}

// Two-parameter sigmoid p = logistic(a f + b) fit to decision values with
// smoothed targets, by Newton's method with backtracking.
std::pair<double, double> fit_sigmoid(std::span<const double> f, std::span<const double> y) {
  double n_pos = 0, n_neg = 0;
  for (const double v : y) (v > 0 ? n_pos : n_neg) += 1;
  const double hi = (n_pos + 1) / (n_pos + 2), lo = 1 / (n_neg + 2);
  std::vector<double> t(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) t[i] = y[i] > 0 ? hi : lo;

  auto loss = [&](double a, double b) {
    double l = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double s = a * f[i] + b;
      l += t[i] * softplus(-s) + (1 - t[i]) * softplus(s);
    }
    return l;
  };
  double a = 0, b = std::log((n_pos + 1) / (n_neg + 1));
  double l = loss(a, b);
  for (int iter = 0; iter < 100; ++iter) {
    double ga = 0, gb = 0, haa = 1e-12, hab = 0, hbb = 1e-12;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double p = logistic(a * f[i] + b);
      const double r = p - t[i], v = p * (1 - p);
      ga += r * f[i];
      gb += r;
      haa += v * f[i] * f[i];
      hab += v * f[i];
      hbb += v;
    }
    if (std::abs(ga) < 1e-7 && std::abs(gb) < 1e-7) break;
    const double det = haa * hbb - hab * hab;
    if (!(det > 0)) break;
    const double da = -(hbb * ga - hab * gb) / det;
    const double db = -(-hab * ga + haa * gb) / det;
    const double slope = ga * da + gb * db;
    double step = 1.0;
    bool moved = false;
    while (step > 1e-12) {
      const double l_new = loss(a + step * da, b + step * db);
      if (l_new <= l + 1e-4 * step * slope) {
        a += step * da;
        b += step * db;
        l = l_new;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return {a, b};
}

class LinearModel final : public ModelImpl {
 public:
  std::vector<double> w;
  double b = 0;
  double sig_a = 1, sig_b = 0;  // p = logistic(sig_a * (w.x + b) + sig_b)

  double p_sick(std::span<const double> x) const override {
    return clamp_probability(logistic(sig_a * (dot(w, x) + b) + sig_b));
  }
  json state() const override { return {{"w", w}, {"b", b}, {"sigmoid_a", sig_a}, {"sigmoid_b", sig_b}}; }

  static std::shared_ptr<LinearModel> restore(const json& s) {
    auto m = std::make_shared<LinearModel>();
    m->w = s.at("w").get<std::vector<double>>();
    m->b = s.at("b").get<double>();
    m->sig_a = s.at("sigmoid_a").get<double>();
    m->sig_b = s.at("sigmoid_b").get<double>();
    return m;
  }
};

}  // namespace

double detail::logistic_objective(std::span<const double> params, const Dataset& data, double lambda,
                                  std::vector<double>* grad) {
  const auto p = make_problem(data, false);
  if (params.size() != p.d + 1) throw ConfigError("logistic parameters must have n_features + 1 entries");
  return objective(p, params, lambda, grad);
}

std::vector<double> detail::fit_logistic(const Dataset& data, double lambda, int max_iter, double tol) {
  return minimize_logistic(make_problem(data, false), lambda, max_iter, tol);
}

ImplPtr train_logistic_regression(const AlgorithmSpec& spec, const Dataset& data) {
  const auto p = make_problem(data, spec.get_bool("scale", true));
  const auto params = minimize_logistic(p, spec.get_double("lambda", 1e-4),
                                        static_cast<int>(spec.get_int("max_iter", 10000)), spec.get_double("tol", 1e-6));
  auto model = std::make_shared<LinearModel>();
  model->w.resize(p.d);
  for (std::size_t j = 0; j < p.d; ++j) model->w[j] = params[j] / p.scale[j];
  model->b = params[p.d];
  return model;
}

ImplPtr restore_logistic_regression(const json& s) { return LinearModel::restore(s); }

ImplPtr train_linear_svm(const AlgorithmSpec& spec, const Dataset& data) {
  const auto p = make_problem(data, spec.get_bool("scale", true));
  const double lambda = spec.get_double("lambda", 1e-3);
  const auto epochs = spec.get_int("epochs", 10000);
  const auto patience = spec.get_int("patience", 200);
  const std::size_t m = p.d + 1;  // bias as a constant feature
  const double radius = 1.0 / std::sqrt(lambda);
  const double inv_n = 1.0 / static_cast<double>(p.n);

  std::vector<double> w(m, 0.0), best = w, grad(m);
  double best_obj = std::numeric_limits<double>::infinity();
  std::int64_t since_improvement = 0;
  auto margin = [&](std::size_t i, std::span<const double> v) { return dot(v.first(p.d), p.row(i)) + v[p.d]; };

  for (std::int64_t t = 1; t <= epochs; ++t) {
    double hinge = 0;
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < p.n; ++i) {
      const double mi = p.y[i] * margin(i, w);
      if (mi < 1) {
        hinge += 1 - mi;
        const auto xi = p.row(i);
        for (std::size_t j = 0; j < p.d; ++j) grad[j] -= p.y[i] * xi[j];
        grad[p.d] -= p.y[i];
      }
    }
    const double obj = 0.5 * lambda * dot(w, w) + hinge * inv_n;
    if (obj < best_obj * (1 - 1e-6)) {
      best_obj = obj;
      best = w;
      since_improvement = 0;
    } else if (++since_improvement >= patience) {
      break;
    }
    if (obj < best_obj) {
      best_obj = obj;
      best = w;
    }
    const double eta = 1.0 / (lambda * static_cast<double>(t));
    for (std::size_t j = 0; j < m; ++j) w[j] -= eta * (lambda * w[j] + grad[j] * inv_n);
    const double nw = norm(w);
    if (nw > radius)
      for (auto& v : w) v *= radius / nw;
  }

  std::vector<double> f(p.n);
  for (std::size_t i = 0; i < p.n; ++i) f[i] = margin(i, best);
  const auto [a, b] = fit_sigmoid(f, p.y);

  auto model = std::make_shared<LinearModel>();
  model->w.resize(p.d);
  for (std::size_t j = 0; j < p.d; ++j) model->w[j] = best[j] / p.scale[j];
  model->b = best[p.d];
  model->sig_a = a;
  model->sig_b = b;
  return model;
}

ImplPtr restore_linear_svm(const json& s) { return LinearModel::restore(s); }

}  // namespace fluscope::learners
