#pragma once

// Two-layer feedforward classifier: relu hidden layer, softmax output,
// mean cross-entropy loss and plain gradient descent.

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "ef/error.hpp"

namespace ef {

template <typename Scalar>
struct MlpModel {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix w1;  // hidden x input
  Vector b1;  // hidden
  Matrix w2;  // classes x hidden
  Vector b2;  // classes

  Eigen::Index input_size() const { return w1.cols(); }
  Eigen::Index hidden_size() const { return w1.rows(); }
  Eigen::Index class_count() const { return w2.rows(); }

  bool consistent() const {
    return b1.size() == w1.rows() && w2.cols() == w1.rows() && b2.size() == w2.rows();
  }
  bool finite() const { return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite(); }

  static MlpModel zeros(Eigen::Index inputs, Eigen::Index hidden, Eigen::Index classes) {
    return {Matrix::Zero(hidden, inputs), Vector::Zero(hidden), Matrix::Zero(classes, hidden),
            Vector::Zero(classes)};
  }

  // Every parameter uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static MlpModel uniform(Eigen::Index inputs, Eigen::Index hidden, Eigen::Index classes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto fill = [&rng](auto& m, Eigen::Index fan_in) {
      const Scalar bound = Scalar(1) / std::sqrt(Scalar(fan_in));
      std::uniform_real_distribution<double> u(-double(bound), double(bound));
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = Scalar(u(rng));
    };
    MlpModel model = zeros(inputs, hidden, classes);
    fill(model.w1, inputs);
    fill(model.b1, inputs);
    fill(model.w2, hidden);
    fill(model.b2, hidden);
    return model;
  }

  friend bool operator==(const MlpModel& a, const MlpModel& b) {
    auto same = [](const auto& x, const auto& y) {
      return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
    };
    return same(a.w1, b.w1) && same(a.b1, b.b1) && same(a.w2, b.w2) && same(a.b2, b.b2);
  }
};

template <typename Scalar>
struct LabeledExample {
  typename MlpModel<Scalar>::Vector x;
  int label = 0;
};

namespace detail {

// Column-wise softmax; subtracts the column max before exponentiating.
template <typename Scalar>
typename MlpModel<Scalar>::Matrix softmax_columns(const typename MlpModel<Scalar>::Matrix& logits) {
  typename MlpModel<Scalar>::Matrix p = logits;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    p.col(j).array() -= p.col(j).maxCoeff();
    p.col(j) = p.col(j).array().exp().matrix();
    p.col(j) /= p.col(j).sum();
  }
  return p;
}

}  // namespace detail

template <typename Scalar>
typename MlpModel<Scalar>::Vector mlp_forward(const MlpModel<Scalar>& model,
                                              const typename MlpModel<Scalar>::Vector& x) {
  if (x.size() != model.input_size() || !model.consistent()) {
    throw Error(Errc::ShapeMismatch, "input size does not match model");
  }
  const typename MlpModel<Scalar>::Vector hidden = (model.w1 * x + model.b1).cwiseMax(Scalar(0));
  const typename MlpModel<Scalar>::Matrix logits = model.w2 * hidden + model.b2;
  return detail::softmax_columns<Scalar>(logits).col(0);
}

template <typename Scalar>
struct MlpGradients {
  typename MlpModel<Scalar>::Matrix w1;
  typename MlpModel<Scalar>::Vector b1;
  typename MlpModel<Scalar>::Matrix w2;
  typename MlpModel<Scalar>::Vector b2;
};

// Mean cross-entropy over the batch; fills `grads` by backpropagation when
// non-null.
template <typename Scalar>
Scalar mlp_loss(const MlpModel<Scalar>& model, std::span<const LabeledExample<Scalar>> batch,
                MlpGradients<Scalar>* grads = nullptr) {
  using Matrix = typename MlpModel<Scalar>::Matrix;
  if (batch.empty()) throw Error(Errc::EmptyBatch, "training batch is empty");
  if (!model.consistent()) throw Error(Errc::ShapeMismatch, "model parameter shapes disagree");

  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  Matrix x(model.input_size(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& ex = batch[static_cast<std::size_t>(j)];
    if (ex.x.size() != model.input_size()) throw Error(Errc::ShapeMismatch, "example size does not match model");
    if (ex.label < 0 || ex.label >= model.class_count()) throw Error(Errc::ShapeMismatch, "label out of range");
    x.col(j) = ex.x;
  }

  const Matrix pre = (model.w1 * x).colwise() + model.b1;
  const Matrix hidden = pre.cwiseMax(Scalar(0));
  const Matrix logits = (model.w2 * hidden).colwise() + model.b2;

  Scalar loss = 0;
  Matrix probs = detail::softmax_columns<Scalar>(logits);
  for (Eigen::Index j = 0; j < n; ++j) {
    const int y = batch[static_cast<std::size_t>(j)].label;
    const Scalar top = logits.col(j).maxCoeff();
    const Scalar log_sum = top + std::log((logits.col(j).array() - top).exp().sum());
    loss += log_sum - logits(y, j);
  }
  loss /= Scalar(n);

  if (grads != nullptr) {
    Matrix d_logits = probs;
    for (Eigen::Index j = 0; j < n; ++j) d_logits(batch[static_cast<std::size_t>(j)].label, j) -= Scalar(1);
    d_logits /= Scalar(n);
    grads->w2 = d_logits * hidden.transpose();
    grads->b2 = d_logits.rowwise().sum();
    const Matrix d_pre = ((model.w2.transpose() * d_logits).array() * (pre.array() > Scalar(0)).template cast<Scalar>())
                             .matrix();
    grads->w1 = d_pre * x.transpose();
    grads->b1 = d_pre.rowwise().sum();
  }
  return loss;
}

// One vanilla gradient-descent step. Returns the updated model and the
// loss measured before the step.
template <typename Scalar>
std::pair<MlpModel<Scalar>, Scalar> mlp_train_step(const MlpModel<Scalar>& model,
                                                   std::span<const LabeledExample<Scalar>> batch, Scalar lr) {
  if (!(lr >= Scalar(0))) throw Error(Errc::InvalidConfig, "learning rate must be non-negative");
  MlpGradients<Scalar> g;
  const Scalar loss = mlp_loss(model, batch, &g);
  MlpModel<Scalar> next = model;
  next.w1 -= lr * g.w1;
  next.b1 -= lr * g.b1;
  next.w2 -= lr * g.w2;
  next.b2 -= lr * g.b2;
  return {std::move(next), loss};
}

// Index of the largest probability; earlier classes win ties.
template <typename Scalar>
Eigen::Index argmax_first(const typename MlpModel<Scalar>::Vector& p) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < p.size(); ++i)
    if (p[i] > p[best]) best = i;
  return best;
}

template <typename Scalar>
double mlp_accuracy(const MlpModel<Scalar>& model, std::span<const LabeledExample<Scalar>> data) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : data) correct += argmax_first<Scalar>(mlp_forward(model, ex.x)) == ex.label;
  return double(correct) / double(data.size());
}

}  // namespace ef
