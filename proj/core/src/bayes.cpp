#include "lidarsurf/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lidarsurf/error.hpp"

namespace lidarsurf {

namespace {

double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("log posterior term is not finite: ") + what);
}

}  // namespace

SpectralLibrary SpectralLibrary::from_signatures(
    const std::vector<std::vector<double>>& signatures, double alpha, double nu) {
  require(!signatures.empty() && !signatures.front().empty(), "library needs at least one class");
  SpectralLibrary lib;
  lib.classes = signatures.size();
  lib.wavelengths = signatures.front().size();
  for (const auto& m : signatures) {
    require(m.size() == lib.wavelengths, "signatures must share one wavelength count");
    for (double v : m) {
      lib.signatures.push_back(v);
      lib.alpha.push_back(alpha);
      lib.nu.push_back(nu);
      lib.eps.push_back((nu + 1.0) * v / alpha);
    }
  }
  lib.validate();
  return lib;
}

void SpectralLibrary::validate() const {
  require(classes >= 1 && wavelengths >= 1, "library needs K >= 1 and L >= 1");
  const std::size_t n = classes * wavelengths;
  require(signatures.size() == n && alpha.size() == n && nu.size() == n && eps.size() == n,
          "library fields must all be K x L");
  for (std::size_t i = 0; i < n; ++i) {
    require(std::isfinite(signatures[i]) && signatures[i] > 0.0, "signatures must be positive");
    require(std::isfinite(alpha[i]) && alpha[i] >= 1.0, "alpha must be >= 1");
    require(std::isfinite(nu[i]) && nu[i] > 0.0, "nu must be positive");
    require(std::isfinite(eps[i]) && eps[i] > 0.0, "eps must be positive");
  }
}

void CdaConfig::validate() const {
  require(std::isfinite(rho) && rho > 0.0, "rho must be positive");
  require(std::isfinite(gamma) && gamma >= 0.0, "gamma must be non-negative");
  require(!std::isnan(xi) && xi > 0.0, "xi must be positive");
  require(max_iterations >= 1, "max_iterations must be >= 1");
}

double log_gamma_density(double x, double shape, double scale) {
  return xlogy(shape - 1.0, x) - x / scale - shape * std::log(scale) - std::lgamma(shape);
}

double log_inverse_gamma_density(double x, double shape, double scale) {
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

ModelState init_state(const SurfaceSet& surfaces, const SpectralLibrary& library,
                      const SurfaceGraph& graph) {
  require(surfaces.size() > 0, "surface set is empty");
  library.validate();
  require(library.wavelengths == surfaces.wavelengths(),
          "library and surfaces disagree on the wavelength count");
  require(graph.surface_count() == surfaces.size(), "graph does not match the surface set");

  const std::size_t S = surfaces.size();
  const std::size_t K = library.classes;
  const std::size_t L = library.wavelengths;
  ModelState st;
  st.surfaces = S;
  st.classes = K;
  st.wavelengths = L;
  st.present.assign(S, 0);
  st.r.assign(S * L, 0.0);
  st.beta.assign(S * K * L, 0.0);
  st.label.assign(S, 0);
  st.depth.assign(S, -1);
  st.h.assign(S, 1.0);
  st.w.assign(graph.aux_count(), 1.0);
  st.ybar.assign(S * L, 0.0);
  st.ybarbar.assign(S, 0.0);
  st.degenerate.assign(S, 0);

  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t l = 0; l < L; ++l)
        st.beta[st.bi(s, k, l)] = library.signatures[library.at(k, l)] / library.alpha[library.at(k, l)];
    const Surface& surf = surfaces[s];
    if (!surf.present) continue;
    require(surf.clean.size() == L * surf.window_length,
            "present surface lacks a selected-scale histogram");
    st.present[s] = 1;
    st.depth[s] = surf.depth;
    for (std::size_t l = 0; l < L; ++l) {
      double sum = 0.0;
      for (double v : surf.clean_histogram(l)) sum += v;
      st.ybar[st.ri(s, l)] = sum;
      st.r[st.ri(s, l)] = sum;
      st.ybarbar[s] += sum;
    }

    double ynorm = 0.0;
    for (std::size_t l = 0; l < L; ++l) ynorm += st.ybar[st.ri(s, l)] * st.ybar[st.ri(s, l)];
    if (ynorm == 0.0) continue;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
      double dot = 0.0, mnorm = 0.0;
      for (std::size_t l = 0; l < L; ++l) {
        const double m = library.signatures[library.at(k, l)];
        dot += st.ybar[st.ri(s, l)] * m;
        mnorm += m * m;
      }
      const double cosine = dot / std::sqrt(ynorm * mnorm);
      if (cosine > best) {
        best = cosine;
        st.label[s] = k;
      }
    }
  }
  // Empty channels start at the prior mode of the initial class instead of 0.
  for (std::size_t s = 0; s < S; ++s) {
    if (!st.present[s]) continue;
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t i = library.at(st.label[s], l);
      if (st.r[st.ri(s, l)] == 0.0)
        st.r[st.ri(s, l)] = (library.alpha[i] - 1.0) * st.beta[st.bi(s, st.label[s], l)];
    }
  }
  update_aux(st, graph);
  return st;
}

double label_score(const ModelState& state, const SpectralLibrary& library,
                   const SurfaceGraph& graph, double gamma, std::size_t s, std::size_t k) {
  double score = 0.0;
  if (gamma != 0.0) {
    std::size_t same = 0;
    for (std::size_t t : graph.label_neighbors(s))
      if (state.label[t] == k) ++same;
    score += gamma * static_cast<double>(same);
  }
  for (std::size_t l = 0; l < state.wavelengths; ++l)
    score += log_gamma_density(state.r[state.ri(s, l)], library.alpha[library.at(k, l)],
                               state.beta[state.bi(s, k, l)]);
  return score;
}

std::size_t update_labels(ModelState& state, const SpectralLibrary& library,
                          const SurfaceGraph& graph, const CdaConfig& config) {
  std::size_t flips = 0;
  if (state.classes == 1) return 0;
  for (std::size_t s = 0; s < state.surfaces; ++s) {
    if (!state.present[s]) continue;
    std::size_t best_k = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < state.classes; ++k) {
      const double score = label_score(state, library, graph, config.gamma, s, k);
      if (score > best) {
        best = score;
        best_k = k;
      }
    }
    if (best_k != state.label[s]) {
      state.label[s] = best_k;
      ++flips;
    }
  }
  return flips;
}

void update_reflectivity(ModelState& state, const SpectralLibrary& library) {
  for (std::size_t s = 0; s < state.surfaces; ++s) {
    if (!state.present[s]) continue;
    const std::size_t k = state.label[s];
    for (std::size_t l = 0; l < state.wavelengths; ++l) {
      const double denom = state.h[s] + 1.0 / state.beta[state.bi(s, k, l)];
      const double num = state.ybar[state.ri(s, l)] + library.alpha[library.at(k, l)] - 1.0;
      state.r[state.ri(s, l)] = num / denom;
    }
  }
}

void update_beta(ModelState& state, const SpectralLibrary& library) {
  for (std::size_t s = 0; s < state.surfaces; ++s) {
    if (!state.present[s]) continue;
    for (std::size_t k = 0; k < state.classes; ++k) {
      for (std::size_t l = 0; l < state.wavelengths; ++l) {
        const std::size_t i = library.at(k, l);
        double& b = state.beta[state.bi(s, k, l)];
        if (k == state.label[s])
          b = (state.r[state.ri(s, l)] + library.eps[i]) / (library.alpha[i] + library.nu[i] + 1.0);
        else
          b = library.eps[i] / (library.nu[i] + 1.0);
      }
    }
  }
}

Theta gain_theta(const ModelState& state, const SurfaceGraph& graph, std::size_t s) {
  Theta th;
  const double c = graph.weight(s);
  for (std::size_t j : graph.aux_of(s)) {
    th.shape += c;
    th.rate += c / state.w[j];
  }
  return th;
}

Theta aux_theta(const ModelState& state, const SurfaceGraph& graph, std::size_t j) {
  Theta th;
  for (std::size_t s : graph.members_of(j)) {
    const double c = graph.weight(s);
    th.shape += c;
    th.rate += c * state.h[s];
  }
  return th;
}

double gain_mode(const ModelState& state, const SurfaceGraph& graph, std::size_t s) {
  const double L = static_cast<double>(state.wavelengths);
  double sum_r = 0.0;
  for (std::size_t l = 0; l < state.wavelengths; ++l) sum_r += state.r[state.ri(s, l)];
  double num = state.ybarbar[s];
  double den = sum_r;
  if (!graph.aux_of(s).empty()) {
    const Theta th = gain_theta(state, graph, s);
    num += L * (th.shape - 1.0);
    den += L * th.rate;
  }
  if (!(den > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::max(num, 0.0) / den;
}

void update_gain(ModelState& state, const SurfaceGraph& graph) {
  for (std::size_t s = 0; s < state.surfaces; ++s) {
    if (!state.present[s]) continue;
    const double h = gain_mode(state, graph, s);
    if (std::isnan(h)) {
      state.degenerate[s] = 1;
      state.h[s] = 0.0;
    } else {
      state.degenerate[s] = 0;
      state.h[s] = h;
    }
  }
}

void update_aux(ModelState& state, const SurfaceGraph& graph) {
  for (std::size_t j = 0; j < graph.aux_count(); ++j) {
    if (!graph.aux_active(j)) continue;
    const Theta th = aux_theta(state, graph, j);
    state.w[j] = std::max(th.rate / (th.shape + 1.0), std::numeric_limits<double>::min());
  }
}

LogPosteriorTerms log_posterior_terms(const ModelState& state, const SurfaceSet& surfaces,
                                      const SpectralLibrary& library, const SurfaceGraph& graph,
                                      const CdaConfig& config) {
  LogPosteriorTerms t;
  const std::size_t L = state.wavelengths;
  const Irf& irf = surfaces.irf();
  for (std::size_t s = 0; s < state.surfaces; ++s) {
    if (!state.present[s]) continue;
    const Surface& surf = surfaces[s];
    const std::size_t k = state.label[s];
    for (std::size_t l = 0; l < L; ++l) {
      const double r = state.r[state.ri(s, l)];
      const double hr = state.h[s] * r;
      t.likelihood += xlogy(state.ybar[state.ri(s, l)], hr) - hr;
      const auto y = surf.clean_histogram(l);
      for (std::size_t i = 0; i < surf.window_length; ++i) {
        const double g = irf.at(l, static_cast<long>(surf.window_start + i) - state.depth[s]);
        if (g <= 0.0) continue;
        t.likelihood += xlogy(y[i], g) - std::lgamma(y[i] + 1.0);
      }
      t.reflectivity_prior +=
          log_gamma_density(r, library.alpha[library.at(k, l)], state.beta[state.bi(s, k, l)]);
      for (std::size_t kk = 0; kk < state.classes; ++kk) {
        const std::size_t i = library.at(kk, l);
        t.beta_prior +=
            log_inverse_gamma_density(state.beta[state.bi(s, kk, l)], library.nu[i], library.eps[i]);
      }
    }
  }

  double gmrf = 0.0;
  for (std::size_t s = 0; s < state.surfaces; ++s) {
    if (!state.present[s] || graph.aux_of(s).empty()) continue;
    const Theta th = gain_theta(state, graph, s);
    gmrf += xlogy(th.shape - 1.0, state.h[s]) - state.h[s] * th.rate;
  }
  for (std::size_t j = 0; j < graph.aux_count(); ++j) {
    if (!graph.aux_active(j)) continue;
    const Theta th = aux_theta(state, graph, j);
    gmrf -= (th.shape + 1.0) * std::log(state.w[j]);
  }
  t.gmrf = static_cast<double>(L) * gmrf;

  if (config.gamma != 0.0) {
    std::size_t same = 0;
    for (std::size_t s = 0; s < state.surfaces; ++s) {
      if (!state.present[s]) continue;
      for (std::size_t n : graph.label_neighbors(s))
        if (n > s && state.label[n] == state.label[s]) ++same;
    }
    t.potts = config.gamma * static_cast<double>(same);
  }

  check_finite(t.likelihood, "likelihood");
  check_finite(t.reflectivity_prior, "reflectivity prior");
  check_finite(t.beta_prior, "beta prior");
  check_finite(t.gmrf, "gamma MRF prior");
  check_finite(t.potts, "Potts prior");
  return t;
}

double log_posterior(const ModelState& state, const SurfaceSet& surfaces,
                     const SpectralLibrary& library, const SurfaceGraph& graph,
                     const CdaConfig& config) {
  return log_posterior_terms(state, surfaces, library, graph, config).total();
}

TraceRow cda_sweep(ModelState& state, const SurfaceSet& surfaces, const SpectralLibrary& library,
                   const SurfaceGraph& graph, const CdaConfig& config) {
  const std::vector<double> r_prev = state.r;
  const std::vector<double> h_prev = state.h;

  const std::size_t flips = update_labels(state, library, graph, config);
  update_reflectivity(state, library);
  update_beta(state, library);
  update_gain(state, graph);
  update_aux(state, graph);

  TraceRow row;
  std::size_t n = 0;
  double sr = 0.0, sh = 0.0;
  for (std::size_t s = 0; s < state.surfaces; ++s) {
    if (!state.present[s]) continue;
    ++n;
    const double dh = state.h[s] - h_prev[s];
    sh += dh * dh;
    for (std::size_t l = 0; l < state.wavelengths; ++l) {
      const double dr = state.r[state.ri(s, l)] - r_prev[state.ri(s, l)];
      sr += dr * dr;
    }
  }
  if (n > 0) {
    row.rms_r = std::sqrt(sr / static_cast<double>(n * state.wavelengths));
    row.rms_h = std::sqrt(sh / static_cast<double>(n));
    row.flip_rate = static_cast<double>(flips) / static_cast<double>(n);
  }
  row.log_posterior = log_posterior(state, surfaces, library, graph, config);
  return row;
}

CdaResult run_cda(ModelState state, const SurfaceSet& surfaces, const SpectralLibrary& library,
                  const SurfaceGraph& graph, const CdaConfig& config) {
  config.validate();
  CdaResult res;
  res.initial_log_posterior = log_posterior(state, surfaces, library, graph, config);
  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    TraceRow row = cda_sweep(state, surfaces, library, graph, config);
    row.sweep = it;
    res.trace.push_back(row);
    if (row.rms_r <= config.xi && row.rms_h <= config.xi && row.flip_rate <= config.xi) {
      res.converged = true;
      break;
    }
  }
  res.state = std::move(state);
  return res;
}

CdaResult run_cda(const SurfaceSet& surfaces, const SpectralLibrary& library,
                  const SurfaceGraph& graph, const CdaConfig& config) {
  config.validate();
  return run_cda(init_state(surfaces, library, graph), surfaces, library, graph, config);
}

}  // namespace lidarsurf
