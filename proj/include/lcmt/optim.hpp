#pragma once

#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "lcmt/tensor.hpp"

namespace lcmt::nn {

/// d_model^{-1/2} * min(step^{-1/2}, step * warmup^{-3/2}).
inline double noam_lr(long step, int d_model, long warmup) {
  check(step >= 1, "noam_lr: step must be >= 1, got ", step);
  check(warmup >= 1, "noam_lr: warmup must be >= 1, got ", warmup);
  double s = (double)step, w = (double)warmup;
  return std::pow((double)d_model, -0.5) * std::min(std::pow(s, -0.5), s * std::pow(w, -1.5));
}

/// Adam with bias-corrected moments over a fixed set of named parameters.
template <typename Real>
class Adam {
public:
  Adam(double beta1 = 0.9, double beta2 = 0.98, double eps = 1e-9)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void register_param(const std::string& name, const TensorPtr<Real>& p) {
    check(p && p->requires_grad, "Adam: parameter '", name, "' does not require grad");
    params_.emplace_back(name, p);
    slots_.push_back({std::vector<double>(p->size(), 0.0), std::vector<double>(p->size(), 0.0)});
  }

  std::size_t param_count() const { return params_.size(); }

  long step_count() const { return t_; }

  void zero_grad() {
    for (auto& [name, p] : params_) p->zero_grad();
  }

  /// One update; missing gradients count as zero, non-finite ones abort.
  void step(double lr) {
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, (double)t_);
    double bc2 = 1.0 - std::pow(beta2_, (double)t_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& [name, p] = params_[i];
      if (p->g.empty()) continue;
      auto& slot = slots_[i];
      for (std::size_t j = 0; j < p->size(); ++j) {
        double grad = (double)p->g[j];
        check(std::isfinite(grad), "non-finite gradient in parameter '", name, "' at index ", j);
        slot.m[j] = beta1_ * slot.m[j] + (1.0 - beta1_) * grad;
        slot.v[j] = beta2_ * slot.v[j] + (1.0 - beta2_) * grad * grad;
        double mhat = slot.m[j] / bc1;
        double vhat = slot.v[j] / bc2;
        p->v[j] -= (Real)(lr * mhat / (std::sqrt(vhat) + eps_));
      }
    }
  }

  /// Moment buffers and step counter, for exact training resume.
  void save_state(std::ostream& out) const {
    out << "adam " << t_ << ' ' << params_.size() << '\n';
    out.precision(17);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      out << params_[i].first << ' ' << slots_[i].m.size() << '\n';
      for (std::size_t j = 0; j < slots_[i].m.size(); ++j)
        out << slots_[i].m[j] << ' ' << slots_[i].v[j] << '\n';
    }
  }

  void load_state(std::istream& in) {
    std::string magic;
    std::size_t n = 0;
    check((bool)(in >> magic >> t_ >> n) && magic == "adam", "bad optimizer state header");
    check(n == params_.size(), "optimizer state holds ", n, " parameters, model has ",
          params_.size());
    for (std::size_t i = 0; i < n; ++i) {
      std::string name;
      std::size_t count = 0;
      check((bool)(in >> name >> count), "truncated optimizer state");
      check(name == params_[i].first && count == slots_[i].m.size(),
            "optimizer state mismatch at parameter '", name, "'");
      for (std::size_t j = 0; j < count; ++j)
        check((bool)(in >> slots_[i].m[j] >> slots_[i].v[j]), "truncated optimizer state");
    }
  }

private:
  struct Slot {
    std::vector<double> m, v;
  };
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::pair<std::string, TensorPtr<Real>>> params_;
  std::vector<Slot> slots_;
};

}  // namespace lcmt::nn
