// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/metrics/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "dyad/chrono_text/chrono.hpp"
#include "dyad/error.hpp"

namespace dyad::metrics {

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::istringstream in{std::string(text)};
  std::string w;
  const std::string pause = [] {
    std::string s(chrono::kPauseMarker);
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  }();
  const std::string lasting = [] {
    std::string s(chrono::kLastingMarker);
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  }();
  while (in >> w) {
    for (char& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (w == pause || w == lasting) continue;
    out.push_back(std::move(w));
  }
  return out;
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const Tokens& reference, const Tokens& hypothesis) {
  if (reference.empty() || hypothesis.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_length(reference, hypothesis));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(hypothesis.size());
  const double r = lcs / static_cast<double>(reference.size());
  return 2.0 * p * r / (p + r);
}

double distinct_2(const std::vector<Tokens>& hypotheses) {
  std::set<std::pair<std::string, std::string>> unique;
  std::size_t total = 0;
  for (const auto& h : hypotheses) {
    for (std::size_t i = 1; i < h.size(); ++i) {
      unique.emplace(h[i - 1], h[i]);
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(unique.size()) / static_cast<double>(total);
}

void GaussianStats::validate() const {
  const std::size_t d = dim();
  if (d == 0) throw ContractError("Gaussian stats need at least one dimension");
  if (cov.rows() != d || cov.cols() != d) {
    throw ContractError("covariance is " + std::to_string(cov.rows()) + "x" + std::to_string(cov.cols()) +
                        " but the mean has " + std::to_string(d) + " entries");
  }
  if (count < 2) throw ContractError("Gaussian stats need at least two samples");
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      const double tol = 1e-12 * std::max({1.0, std::abs(cov(i, j)), std::abs(cov(j, i))});
      if (std::abs(cov(i, j) - cov(j, i)) > tol) throw ContractError("covariance is not symmetric");
    }
  }
}

GaussianStats gaussian_stats(const grad::Tensor& x) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n < 2) throw ContractError("gaussian_stats needs at least two rows");
  GaussianStats s;
  s.count = n;
  s.mean.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) s.mean[c] += x(r, c);
  }
  for (double& m : s.mean) m /= static_cast<double>(n);
  s.cov = grad::Tensor(d, d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < d; ++i) {
      const double di = x(r, i) - s.mean[i];
      for (std::size_t j = i; j < d; ++j) s.cov(i, j) += di * (x(r, j) - s.mean[j]);
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      s.cov(i, j) /= static_cast<double>(n - 1);
      s.cov(j, i) = s.cov(i, j);
    }
  }
  return s;
}

namespace {

Eigen::MatrixXd to_eigen(const grad::Tensor& t) {
  Eigen::MatrixXd m(t.rows(), t.cols());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.cols(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t(i, j);
  }
  return 0.5 * (m + m.transpose());
}

}  // namespace

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  a.validate();
  b.validate();
  if (a.dim() != b.dim()) {
    throw ContractError("frechet_distance: dimensions " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()) +
                        " differ");
  }
  double mean_term = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) mean_term += (a.mean[i] - b.mean[i]) * (a.mean[i] - b.mean[i]);

  const Eigen::MatrixXd sa = to_eigen(a.cov), sb = to_eigen(b.cov);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(sa);
  const Eigen::VectorXd root_vals = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd root_a = ea.eigenvectors() * root_vals.asDiagonal() * ea.eigenvectors().transpose();
  Eigen::MatrixXd inner = root_a * sb * root_a;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ei(inner, Eigen::EigenvaluesOnly);
  const double tr_root = ei.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double fd = mean_term + sa.trace() + sb.trace() - 2.0 * tr_root;
  return std::max(fd, 0.0);
}

LagEstimate sync_lag(const std::vector<double>& mouth, const std::vector<double>& audio, int max_lag,
                     double min_correlation) {
  const std::size_t n = mouth.size();
  if (audio.size() != n) throw ContractError("sync_lag: inputs have different lengths");
  if (n < 4) throw ContractError("sync_lag needs at least 4 frames");
  if (max_lag < 0) throw ContractError("sync_lag: max_lag must be non-negative");
  const int cap = std::min(max_lag, static_cast<int>(n) - 3);

  LagEstimate best;
  // Visit 0, 1, -1, 2, -2, ... so ties resolve to the smallest |lag|.
  for (int lag = 0; lag <= cap; lag = lag > 0 ? -lag : -lag + 1) {
    // overlap: t in [max(0,-lag), min(n, n-lag))
    const std::size_t t0 = static_cast<std::size_t>(std::max(0, -lag));
    const std::size_t t1 = static_cast<std::size_t>(std::min<long>(static_cast<long>(n), static_cast<long>(n) - lag));
    const double m = static_cast<double>(t1 - t0);
    double mx = 0, my = 0;
    for (std::size_t t = t0; t < t1; ++t) mx += mouth[t], my += audio[static_cast<std::size_t>(static_cast<long>(t) + lag)];
    mx /= m;
    my /= m;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t t = t0; t < t1; ++t) {
      const double dx = mouth[t] - mx, dy = audio[static_cast<std::size_t>(static_cast<long>(t) + lag)] - my;
      sxy += dx * dy;
      sxx += dx * dx;
      syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) continue;
    const double r = sxy / std::sqrt(sxx * syy);
    if (!best.defined || r > best.correlation) {
      best.defined = true;
      best.lag = lag;
      best.correlation = r;
    }
  }
  best.weak = best.defined && best.correlation < min_correlation;
  return best;
}

double TurnTaking::pause_rate() const {
  return speech_frames ? static_cast<double>(listener_pause_in_speech) / static_cast<double>(speech_frames) : 0.0;
}

double TurnTaking::response_rate() const {
  return turn_ends ? static_cast<double>(answered_turn_ends) / static_cast<double>(turn_ends) : 0.0;
}

TurnTaking& TurnTaking::operator+=(const TurnTaking& o) {
  speech_frames += o.speech_frames;
  listener_pause_in_speech += o.listener_pause_in_speech;
  turn_ends += o.turn_ends;
  answered_turn_ends += o.answered_turn_ends;
  return *this;
}

TurnTaking turn_taking(const std::vector<chrono::ChronoToken>& speaker,
                       const std::vector<chrono::ChronoToken>& listener, Rational fps, double window_seconds) {
  if (speaker.size() != listener.size()) {
    throw DimensionError("turn_taking: " + std::to_string(speaker.size()) + " speaker frames vs " +
                         std::to_string(listener.size()) + " listener frames");
  }
  if (!fps.positive() || !(window_seconds > 0.0)) throw RangeError("turn_taking: fps and window must be positive");
  const double frames_per_window = window_seconds * static_cast<double>(fps.num()) / static_cast<double>(fps.den());
  const auto reach = static_cast<std::size_t>(std::ceil(frames_per_window - 1e-9));
  TurnTaking out;
  const std::size_t n = speaker.size();
  for (std::size_t t = 0; t < n; ++t) {
    if (speaker[t].is_pause()) continue;
    ++out.speech_frames;
    if (listener[t].is_pause()) ++out.listener_pause_in_speech;
    if (t + 1 < n && speaker[t + 1].is_pause()) {
      ++out.turn_ends;
      const std::size_t stop = std::min(n, t + 1 + reach);
      for (std::size_t u = t + 1; u < stop; ++u) {
        if (listener[u].is_word()) {
          ++out.answered_turn_ends;
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace dyad::metrics
