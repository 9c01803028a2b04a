#include <cmath>
#include <random>

#include "autodiff_internal.hpp"
#include "sest/autodiff.hpp"
#include "sest/error.hpp"
#include "sest/random.hpp"

namespace sest::ad {

Tensor ParamStore::add(const std::string& name, Shape shape, Init init, double value, bool trainable) {
  std::vector<double> values(shape.size(), 0.0);
  std::mt19937_64 rng(mix_seed(seed_, fnv1a(name)));
  switch (init) {
    case Init::kXavier: {
      const double r = std::sqrt(6.0 / static_cast<double>(shape.rows + shape.cols));
      std::uniform_real_distribution<double> dist(-r, r);
      for (auto& v : values) v = dist(rng);
      break;
    }
    case Init::kNormal: {
      std::normal_distribution<double> dist(0.0, value > 0.0 ? value : 1.0);
      for (auto& v : values) v = dist(rng);
      break;
    }
    case Init::kConstant:
      for (auto& v : values) v = value;
      break;
    case Init::kZeros:
      break;
  }
  return add_values(name, shape, std::move(values), trainable);
}

Tensor ParamStore::add_values(const std::string& name, Shape shape, std::vector<double> values, bool trainable) {
  if (entries_.count(name)) throw ArgumentError("duplicate parameter name '" + name + "'");
  if (shape.size() == 0) throw ShapeError("parameter '" + name + "' has an empty shape");
  Entry e;
  e.tensor = Tensor::parameter(shape, std::move(values));
  e.tensor.set_requires_grad(trainable);
  e.trainable = trainable;
  auto [it, _] = entries_.emplace(name, std::move(e));
  return it->second.tensor;
}

Tensor ParamStore::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ArgumentError("unknown parameter '" + name + "'");
  return it->second.tensor;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [_, e] : entries_) n += e.tensor.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [_, e] : entries_) {
    if (e.trainable) e.tensor.zero_grad();
  }
}

GradCheckResult grad_check(const std::function<Tensor(ParamStore&)>& f, ParamStore& params, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("grad_check eps must be positive");
  params.zero_grad();
  const Tensor loss = f(params);
  if (!std::isfinite(loss.item())) throw NumericError("grad_check: objective is not finite");
  backward(loss);

  GradCheckResult result;
  for (auto& [name, entry] : params.entries()) {
    if (!entry.trainable) continue;
    const std::vector<double> analytic(entry.tensor.grad().begin(), entry.tensor.grad().end());
    auto values = entry.tensor.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + eps;
      const double plus = f(params).item();
      values[i] = original - eps;
      const double minus = f(params).item();
      values[i] = original;
      if (!std::isfinite(plus) || !std::isfinite(minus)) {
        throw NumericError("grad_check: objective not finite when perturbing " + name + "[" + std::to_string(i) +
                           "]");
      }
      const double numeric = (plus - minus) / (2.0 * eps);
      const double a = analytic[i];
      const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      ++result.components;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = name;
        result.worst_index = i;
        result.analytic = a;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

void adam_step(ParamStore& params, const AdamConfig& cfg) {
  for (auto& [name, e] : params.entries()) {
    if (e.trainable && !e.tensor.has_grad()) {
      throw StateError("adam_step: parameter '" + name + "' has no gradient; run backward first");
    }
  }
  params.set_step(params.step() + 1);
  const double t = static_cast<double>(params.step());
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (auto& [name, e] : params.entries()) {
    if (!e.trainable) continue;
    auto values = e.tensor.mutable_values();
    const auto grad = e.tensor.grad();
    if (e.adam_m.size() != values.size()) {
      e.adam_m.assign(values.size(), 0.0);
      e.adam_v.assign(values.size(), 0.0);
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad[i];
      e.adam_m[i] = cfg.beta1 * e.adam_m[i] + (1.0 - cfg.beta1) * g;
      e.adam_v[i] = cfg.beta2 * e.adam_v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = e.adam_m[i] / c1;
      const double v_hat = e.adam_v[i] / c2;
      values[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

double clip_grad_norm(ParamStore& params, double max_norm) {
  double sq = 0.0;
  for (const auto& [_, e] : params.entries()) {
    if (!e.trainable || !e.tensor.has_grad()) continue;
    for (double g : e.tensor.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& [_, e] : params.entries()) {
      if (!e.trainable || !e.tensor.has_grad()) continue;
      for (double& g : Access::node(e.tensor)->grad) g *= factor;
    }
  }
  return norm;
}

}  // namespace sest::ad
