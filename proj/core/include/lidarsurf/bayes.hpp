#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lidarsurf/graph.hpp"
#include "lidarsurf/surfaces.hpp"

namespace lidarsurf {

// K class signatures over L wavelengths with their gamma / inverse-gamma
// hyperparameters. All matrices are class-major (K x L). Classes are 0-based.
struct SpectralLibrary {
  std::size_t classes = 0;
  std::size_t wavelengths = 0;
  std::vector<double> signatures;  // m_{k,l}
  std::vector<double> alpha;       // gamma shape of r
  std::vector<double> nu;          // inverse-gamma shape of beta
  std::vector<double> eps;         // inverse-gamma scale of beta

  static constexpr double kDefaultAlpha = 100.0;
  static constexpr double kDefaultNu = 100.0;

  // alpha and nu uniform; eps = (nu + 1) m / alpha so the beta prior mode is m / alpha.
  static SpectralLibrary from_signatures(const std::vector<std::vector<double>>& signatures,
                                         double alpha = kDefaultAlpha, double nu = kDefaultNu);

  std::size_t at(std::size_t k, std::size_t l) const { return k * wavelengths + l; }
  // Throws ValidationError unless K, L >= 1, all entries positive and alpha >= 1.
  void validate() const;
};

struct CdaConfig {
  double rho = 1.25;
  double gamma = 4.0;
  double xi = 1e-4;
  std::size_t max_iterations = 100;

  void validate() const;
};

// Unknowns of the hierarchical model over all N x K_s surface slots. Entries of
// absent slots are kept but never updated or scored.
struct ModelState {
  std::size_t surfaces = 0;
  std::size_t classes = 0;
  std::size_t wavelengths = 0;

  std::vector<std::uint8_t> present;
  std::vector<double> r;           // S x L
  std::vector<double> beta;        // S x K x L
  std::vector<std::size_t> label;  // S
  std::vector<long> depth;         // S, frozen
  std::vector<double> h;           // S
  std::vector<double> w;           // auxiliary sites x K_s
  std::vector<double> ybar;        // S x L, sum over bins of the clean histogram
  std::vector<double> ybarbar;     // S, sum over wavelengths of ybar
  std::vector<std::uint8_t> degenerate;

  std::size_t ri(std::size_t s, std::size_t l) const { return s * wavelengths + l; }
  std::size_t bi(std::size_t s, std::size_t k, std::size_t l) const {
    return (s * classes + k) * wavelengths + l;
  }
};

// d from scale selection, r = ybar (h = 1; empty channels use the prior mode), beta = m / alpha, labels by cosine
// similarity of ybar to the signatures, w at its mode given h.
ModelState init_state(const SurfaceSet& surfaces, const SpectralLibrary& library,
                      const SurfaceGraph& graph);

// log G(x; shape, scale) with 0 log 0 = 0.
double log_gamma_density(double x, double shape, double scale);
// log IG(x; shape, scale).
double log_inverse_gamma_density(double x, double shape, double scale);

// Score of class k for surface s: gamma * (#label neighbours with class k) +
// sum_l log G(r_{s,l}; alpha_{k,l}, beta_{s,k,l}).
double label_score(const ModelState& state, const SpectralLibrary& library,
                   const SurfaceGraph& graph, double gamma, std::size_t s, std::size_t k);

// Sequential raster sweep; returns the number of labels that changed.
std::size_t update_labels(ModelState& state, const SpectralLibrary& library,
                          const SurfaceGraph& graph, const CdaConfig& config);
void update_reflectivity(ModelState& state, const SpectralLibrary& library);
// Active class: (r + eps) / (alpha + nu + 1). Other classes: eps / (nu + 1).
void update_beta(ModelState& state, const SpectralLibrary& library);

struct Theta {
  double shape = 0.0;  // theta_1
  double rate = 0.0;   // theta_2
};
Theta gain_theta(const ModelState& state, const SurfaceGraph& graph, std::size_t s);
Theta aux_theta(const ModelState& state, const SurfaceGraph& graph, std::size_t j);

// Closed-form h mode; isolated surfaces use ybarbar / sum_l r.
double gain_mode(const ModelState& state, const SurfaceGraph& graph, std::size_t s);
void update_gain(ModelState& state, const SurfaceGraph& graph);
void update_aux(ModelState& state, const SurfaceGraph& graph);

struct LogPosteriorTerms {
  double likelihood = 0.0;
  double reflectivity_prior = 0.0;
  double beta_prior = 0.0;
  double gmrf = 0.0;
  double potts = 0.0;

  double total() const { return likelihood + reflectivity_prior + beta_prior + gmrf + potts; }
};

// Throws NumericalError naming the first non-finite term.
LogPosteriorTerms log_posterior_terms(const ModelState& state, const SurfaceSet& surfaces,
                                      const SpectralLibrary& library, const SurfaceGraph& graph,
                                      const CdaConfig& config);
double log_posterior(const ModelState& state, const SurfaceSet& surfaces,
                     const SpectralLibrary& library, const SurfaceGraph& graph,
                     const CdaConfig& config);

struct TraceRow {
  std::size_t sweep = 0;
  double rms_r = 0.0;
  double rms_h = 0.0;
  double flip_rate = 0.0;
  double log_posterior = 0.0;
};

struct CdaResult {
  ModelState state;
  double initial_log_posterior = 0.0;
  std::vector<TraceRow> trace;
  bool converged = false;
};

// One sweep: labels, reflectivity, beta, gain, auxiliary.
TraceRow cda_sweep(ModelState& state, const SurfaceSet& surfaces, const SpectralLibrary& library,
                   const SurfaceGraph& graph, const CdaConfig& config);

CdaResult run_cda(ModelState state, const SurfaceSet& surfaces, const SpectralLibrary& library,
                  const SurfaceGraph& graph, const CdaConfig& config);
CdaResult run_cda(const SurfaceSet& surfaces, const SpectralLibrary& library,
                  const SurfaceGraph& graph, const CdaConfig& config);

}  // namespace lidarsurf
