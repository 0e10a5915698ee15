#pragma once

// Implementation of fnpeg::correct_bank; included from fnpeg.hpp.

#include <algorithm>
#include <cmath>
#include <numbers>

namespace entrylab::fnpeg {

template <class ZFunction>
CorrectorResult correct_bank(ZFunction&& z_of, double sigma_guess, const GuidanceConfig& config) {
  constexpr double kPi = std::numbers::pi;
  auto eval = [&](double sigma, double& z) {
    try {
      z = z_of(sigma);
      return std::isfinite(z);
    } catch (const PredictionFailure&) {
      return false;
    }
  };

  CorrectorResult res;
  double sigma = std::clamp(sigma_guess, 0.0, kPi);
  double z = 0.0;
  if (!eval(sigma, z)) throw PredictionFailure("predictor failed at the current bank angle");
  res.history.push_back({sigma, z});
  res.sigma0 = sigma;
  res.z = z;
  if (z == 0.0) {
    res.converged = true;
    return res;
  }

  // Forward difference, falling back to a backward difference near the bound.
  double probe = sigma + config.fd_step;
  double zp = 0.0;
  if (probe > kPi || !eval(probe, zp)) {
    probe = sigma - config.fd_step;
    if (!eval(probe, zp)) throw PredictionFailure("predictor failed on the slope probe");
  }
  double dz = (zp - z) / (probe - sigma);
  res.dz = dz;

  for (int k = 0; k < config.max_iterations; ++k) {
    if (!(dz != 0.0) || !std::isfinite(dz)) {
      res.stalled = true;
      break;
    }
    const double full_step = -z / dz;
    bool accepted = false;
    double candidate = sigma;
    double zc = 0.0;
    double lambda = 1.0;
    for (int i = 0; i <= config.max_halvings; ++i, lambda *= 0.5) {
      candidate = std::clamp(sigma + lambda * full_step, 0.0, kPi);
      if (candidate != sigma && eval(candidate, zc) && std::abs(zc) < std::abs(z)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (std::abs(z * dz) <= config.tolerance) {
        res.converged = true;
      } else {
        res.stalled = true;
      }
      break;
    }
    dz = (zc - z) / (candidate - sigma);  // secant through the last two iterates
    sigma = candidate;
    z = zc;
    ++res.iterations;
    res.history.push_back({sigma, z});
    res.sigma0 = sigma;
    res.z = z;
    res.dz = dz;
    if (std::abs(z * dz) <= config.tolerance) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace entrylab::fnpeg
