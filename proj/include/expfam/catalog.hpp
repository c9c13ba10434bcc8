#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "expfam/families/bernoulli.hpp"
#include "expfam/families/beta.hpp"
#include "expfam/families/binomial.hpp"
#include "expfam/families/centered_laplacian.hpp"
#include "expfam/families/dirichlet.hpp"
#include "expfam/families/gamma.hpp"
#include "expfam/families/gaussian_fixed_variance.hpp"
#include "expfam/families/inverse_gaussian.hpp"
#include "expfam/families/isotropic_gaussian.hpp"
#include "expfam/families/multinomial.hpp"
#include "expfam/families/multivariate_gaussian.hpp"
#include "expfam/families/poisson.hpp"
#include "expfam/families/rayleigh.hpp"
#include "expfam/families/univariate_gaussian.hpp"
#include "expfam/family.hpp"

namespace expfam {

using Hyperparams = std::map<std::string, double>;

namespace catalog_detail {

inline double hyper_or(const Hyperparams& h, const std::string& key, double fallback) {
  const auto it = h.find(key);
  return it == h.end() ? fallback : it->second;
}

}  // namespace catalog_detail

/// Instantiates a catalog family by its canonical identifier. Families
/// with fixed hyperparameters take them from `hyper` (defaults: sigma2=1,
/// n=10, d=2, k=3).
inline FamilyPtr make_family(const std::string& name, const Hyperparams& hyper = {}) {
  using namespace families;
  if (name == "univariate_gaussian") return std::make_shared<UnivariateGaussian>();
  if (name == "gaussian_fixed_variance") {
    return std::make_shared<GaussianFixedVariance>(catalog_detail::hyper_or(hyper, "sigma2", 1.0));
  }
  if (name == "multivariate_gaussian") {
    return std::make_shared<MultivariateGaussian>(
        static_cast<int>(catalog_detail::hyper_or(hyper, "d", 2)));
  }
  if (name == "isotropic_gaussian") {
    return std::make_shared<IsotropicGaussian>(
        static_cast<int>(catalog_detail::hyper_or(hyper, "d", 2)));
  }
  if (name == "poisson") return std::make_shared<Poisson>();
  if (name == "centered_laplacian") return std::make_shared<CenteredLaplacian>();
  if (name == "bernoulli") return std::make_shared<Bernoulli>();
  if (name == "binomial") {
    return std::make_shared<Binomial>(static_cast<long>(catalog_detail::hyper_or(hyper, "n", 10)));
  }
  if (name == "multinomial") {
    return std::make_shared<Multinomial>(
        static_cast<long>(catalog_detail::hyper_or(hyper, "n", 10)),
        static_cast<int>(catalog_detail::hyper_or(hyper, "k", 3)));
  }
  if (name == "rayleigh") return std::make_shared<Rayleigh>();
  if (name == "gamma") return std::make_shared<Gamma>();
  if (name == "beta") return std::make_shared<Beta>();
  if (name == "inverse_gaussian") return std::make_shared<InverseGaussian>();
  if (name == "dirichlet") {
    return std::make_shared<Dirichlet>(static_cast<int>(catalog_detail::hyper_or(hyper, "k", 3)));
  }
  throw ParseError("unknown family: " + name);
}

/// One catalog row: a family instance plus its capability flags.
struct CatalogEntry {
  FamilyPtr family;
  bool closed_form_kl = false;
  bool closed_form_mle = false;

  const FamilyDescriptor& descriptor() const { return family->descriptor(); }
};

inline const std::vector<std::string>& family_names() {
  static const std::vector<std::string> names = {
      "univariate_gaussian", "gaussian_fixed_variance", "multivariate_gaussian",
      "isotropic_gaussian",  "poisson",                 "centered_laplacian",
      "bernoulli",           "binomial",                "multinomial",
      "rayleigh",            "gamma",                   "beta",
      "inverse_gaussian",    "dirichlet"};
  return names;
}

/// All fourteen catalog entries, instantiated with default hyperparameters.
inline std::vector<CatalogEntry> list_families() {
  std::vector<CatalogEntry> entries;
  entries.reserve(family_names().size());
  for (const auto& name : family_names()) {
    const FamilyPtr family = make_family(name);
    entries.push_back(CatalogEntry{family, family->descriptor().has_closed_kl,
                                   family->descriptor().has_closed_mle});
  }
  return entries;
}

}  // namespace expfam
