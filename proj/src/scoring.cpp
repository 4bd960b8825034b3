#include "dmta/scoring.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <istream>
#include <numeric>
#include <ostream>
#include <vector>

#include "dmta/errors.hpp"

namespace dmta {

namespace {

constexpr char kMagic[8] = {'D', 'M', 'T', 'A', 'Q', 'S', 'A', 'R'};
constexpr std::uint32_t kBlobVersion = 1;
constexpr int kHistory = 10;
constexpr int kMaxBacktracks = 60;
constexpr double kArmijo = 1e-4;

double sigmoid(double z) noexcept {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z)
double softplus(double z) noexcept {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Parameters are weights[0..dim) followed by the bias. Examples are packed
// once into CSR form with dimensions already folded.
class Objective {
 public:
  Objective(const TrainingSet& train, const ScoringHyper& hyper) : hyper_(hyper) {
    const auto dim = hyper.dim;
    start_.reserve(train.size() + 1);
    start_.push_back(0);
    std::size_t pos = 0;
    for (const auto& ex : train) {
      for (const auto& [d, c] : ex.fp.entries()) {
        idx_.push_back(d % dim);
        val_.push_back(c);
      }
      start_.push_back(idx_.size());
      label_.push_back(ex.label);
      pos += ex.label == 1;
    }
    const double n = static_cast<double>(train.size());
    if (hyper.balance_classes) {
      pos_weight_ = n / (2.0 * static_cast<double>(pos));
      neg_weight_ = n / (2.0 * static_cast<double>(train.size() - pos));
    }
  }

  double operator()(const std::vector<double>& x, std::vector<double>& grad) const {
    const std::size_t dim = hyper_.dim;
    std::fill(grad.begin(), grad.end(), 0.0);
    double f = 0.0;
    for (std::size_t i = 0; i < label_.size(); ++i) {
      const std::size_t lo = start_[i], hi = start_[i + 1];
      double z = x[dim];
      for (std::size_t j = lo; j < hi; ++j) z += x[idx_[j]] * val_[j];
      const int label = label_[i];
      const double w = label == 1 ? pos_weight_ : neg_weight_;
      f += w * (softplus(z) - (label == 1 ? z : 0.0));
      const double r = w * (sigmoid(z) - label);
      for (std::size_t j = lo; j < hi; ++j) grad[idx_[j]] += r * val_[j];
      grad[dim] += r;
    }
    for (std::size_t d = 0; d < dim; ++d) {
      f += 0.5 * hyper_.l2 * x[d] * x[d];
      grad[d] += hyper_.l2 * x[d];
    }
    return f;
  }

 private:
  const ScoringHyper& hyper_;
  std::vector<std::size_t> start_;
  std::vector<std::uint32_t> idx_;
  std::vector<double> val_;
  std::vector<int> label_;
  double pos_weight_ = 1.0;
  double neg_weight_ = 1.0;
};

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::ostream& out, double d) {
  auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_bytes(std::istream& in, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) {
    int c = in.get();
    if (c == std::char_traits<char>::eof()) throw ParseError("truncated model blob");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

}  // namespace

ScoringModel ScoringModel::constant(double p) {
  ScoringModel m;
  m.kind_ = Kind::kConstant;
  m.base_rate_ = std::clamp(p, 0.0, 1.0);
  m.info_.converged = true;
  return m;
}

double ScoringModel::predict(const Fingerprint& fp) const noexcept {
  if (kind_ == Kind::kConstant) return base_rate_;
  const std::size_t dim = weights_.size();
  double z = bias_;
  for (const auto& [d, c] : fp.entries()) z += weights_[d % dim] * c;
  return sigmoid(z);
}

std::vector<double> ScoringModel::predict_proba(std::span<const Fingerprint> fps) const {
  std::vector<double> out;
  out.reserve(fps.size());
  for (const auto& fp : fps) out.push_back(predict(fp));
  return out;
}

ScoringModel fit(const TrainingSet& train, const ScoringHyper& hyper) {
  std::size_t pos = 0;
  for (const auto& ex : train) pos += ex.label == 1;
  if (train.empty()) return ScoringModel::constant(0.5);
  const double base_rate = static_cast<double>(pos) / static_cast<double>(train.size());
  if (pos == 0 || pos == train.size()) return ScoringModel::constant(base_rate);

  const std::size_t dim = hyper.dim;
  const std::size_t np = dim + 1;
  Objective objective(train, hyper);

  std::vector<double> x(np, 0.0), grad(np), x_new(np), grad_new(np), dir(np);
  x[dim] = std::log(base_rate / (1.0 - base_rate));
  double f = objective(x, grad);

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  FitInfo info;
  int epoch = 0;
  for (; epoch < hyper.max_epochs; ++epoch) {
    const double gnorm = std::sqrt(dot(grad, grad));
    if (gnorm < hyper.grad_tol) {
      info.converged = true;
      break;
    }

    // Two-loop recursion.
    dir = grad;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * dot(s_hist[i], dir);
      for (std::size_t k = 0; k < np; ++k) dir[k] -= alpha[i] * y_hist[i][k];
    }
    double gamma = 1.0;
    if (!s_hist.empty()) gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
    for (double& v : dir) v *= gamma;
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * dot(y_hist[i], dir);
      for (std::size_t k = 0; k < np; ++k) dir[k] += s_hist[i][k] * (alpha[i] - beta);
    }
    for (double& v : dir) v = -v;

    double slope = dot(grad, dir);
    if (slope >= 0) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t k = 0; k < np; ++k) dir[k] = -grad[k];
      slope = -gnorm * gnorm;
    }

    double step = s_hist.empty() ? std::min(1.0, 1.0 / gnorm) : 1.0;
    bool accepted = false;
    double f_new = f;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      for (std::size_t k = 0; k < np; ++k) x_new[k] = x[k] + step * dir[k];
      f_new = objective(x_new, grad_new);
      if (f_new <= f + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no further decrease representable in double precision

    std::vector<double> s(np), y(np);
    for (std::size_t k = 0; k < np; ++k) {
      s[k] = x_new[k] - x[k];
      y[k] = grad_new[k] - grad[k];
    }
    const double sy = dot(s, y);
    if (sy > 1e-12) {
      if (static_cast<int>(s_hist.size()) == kHistory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
    x.swap(x_new);
    grad.swap(grad_new);
    const double decrease = f - f_new;
    f = f_new;
    if (decrease <= hyper.rel_tol * std::max(1.0, std::abs(f))) {
      info.converged = true;
      ++epoch;
      break;
    }
  }
  info.epochs = epoch;
  info.grad_norm = std::sqrt(dot(grad, grad));
  info.objective = f;
  info.converged = info.converged || info.grad_norm < hyper.grad_tol;

  ScoringModel m;
  m.kind_ = ScoringModel::Kind::kLogistic;
  m.base_rate_ = base_rate;
  m.bias_ = x[dim];
  m.weights_.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(dim));
  m.info_ = info;
  return m;
}

void ScoringModel::save(std::ostream& out) const {
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kBlobVersion);
  out.put(static_cast<char>(kind_));
  put_u32(out, static_cast<std::uint32_t>(weights_.size()));
  put_f64(out, base_rate_);
  put_f64(out, bias_);
  if (kind_ == Kind::kLogistic)
    for (double w : weights_) put_f64(out, w);
}

ScoringModel ScoringModel::load(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + 8, kMagic))
    throw ParseError("not a scoring model blob");
  if (get_bytes(in, 4) != kBlobVersion) throw ParseError("unsupported scoring model version");
  ScoringModel m;
  auto kind = get_bytes(in, 1);
  if (kind > 1) throw ParseError("unknown scoring model kind");
  m.kind_ = static_cast<Kind>(kind);
  auto dim = static_cast<std::uint32_t>(get_bytes(in, 4));
  m.base_rate_ = std::bit_cast<double>(get_bytes(in, 8));
  m.bias_ = std::bit_cast<double>(get_bytes(in, 8));
  if (m.kind_ == Kind::kLogistic) {
    if (dim == 0) throw ParseError("logistic model blob with zero dimension");
    m.weights_.resize(dim);
    for (double& w : m.weights_) w = std::bit_cast<double>(get_bytes(in, 8));
  }
  m.info_.converged = true;
  return m;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos = 0, neg = 0, rank_sum = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // average 1-based rank
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        rank_sum += mid_rank;
        ++pos;
      } else {
        ++neg;
      }
    }
    i = j;
  }
  if (pos == 0 || neg == 0) return 0.5;
  return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

}  // namespace dmta
