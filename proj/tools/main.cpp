// Command-line interface to the exponential-family toolkit: flash-card
// style inspection, parameter conversions, divergences, maximum
// likelihood, mixture fitting and the validation harness.
//
// Exit codes: 0 success, 2 parse error, 3 domain error, 4 data error,
// 5 numerical failure.

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "expfam/catalog.hpp"
#include "expfam/divergences.hpp"
#include "expfam/family.hpp"
#include "expfam/inference.hpp"
#include "expfam/io.hpp"
#include "expfam/mixture.hpp"
#include "expfam/validation.hpp"

namespace {

using namespace expfam;

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitDomain = 3;
constexpr int kExitData = 4;
constexpr int kExitNumerical = 5;

std::string num(double v) { return io_detail::format_number(v); }

std::string arr(const std::vector<double>& v) { return io_detail::format_array(v); }

std::string matrix_json(const Matrix& m) {
  std::string out = "[";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (i) out += ",";
    out += "[";
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out += ",";
      out += num(m(i, j));
    }
    out += "]";
  }
  return out + "]";
}

Hyperparams parse_hyper(const std::vector<std::string>& assignments) {
  Hyperparams hyper;
  for (const auto& text : assignments) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ParseError("bad hyperparameter '" + text + "', expected name=value");
    }
    try {
      hyper[text.substr(0, eq)] = std::stod(text.substr(eq + 1));
    } catch (...) {
      throw ParseError("bad hyperparameter value in '" + text + "'");
    }
  }
  return hyper;
}

bool use_color() {
  return std::getenv("NO_COLOR") == nullptr;
}

std::string bold(const std::string& text) {
  return use_color() ? "\033[1m" + text + "\033[0m" : text;
}

// ----- card ---------------------------------------------------------------

struct CardOptions {
  std::string file;
  bool pretty = false;
  std::optional<std::uint64_t> seed;
  long mc_n = 100000;
};

int cmd_card(const CardOptions& opt) {
  const DistributionFile dist = parse_distribution(read_file(opt.file));
  const Family& family = *dist.family;
  const auto lambda = source_values(family, dist.params);
  const auto theta = natural_values(family, dist.params);
  const auto eta = family.grad_log_normalizer(theta);
  const double log_norm = family.log_normalizer(theta);
  const auto grad_g = family.grad_conjugate(eta);
  const Matrix fisher = family.log_normalizer_hessian(theta);

  std::optional<double> conj;
  if (family.descriptor().has_closed_conjugate) conj = family.conjugate(eta);

  std::optional<ValueWithError> entropy;
  if (family.carrier_mean(theta).has_value()) {
    entropy = shannon_entropy(family, natural_params(theta));
  } else if (opt.seed) {
    entropy = shannon_entropy(family, natural_params(theta),
                              McBudget{opt.mc_n, RngSeed{*opt.seed}});
  }

  if (opt.pretty) {
    auto row = [](const std::string& label, const std::string& value) {
      std::printf("%-24s %s\n", label.c_str(), value.c_str());
    };
    std::printf("%s\n", bold(family.name()).c_str());
    for (const auto& [key, value] : family.descriptor().fixed_hyperparams) {
      row("fixed " + key, num(value));
    }
    row("source", arr(lambda));
    row("natural", arr(theta));
    row("expectation", arr(eta));
    row("log normalizer F", num(log_norm));
    row("grad F", arr(eta));
    row("conjugate G", conj ? num(*conj) : "(no closed form)");
    row("grad G", arr(grad_g));
    row("fisher information", matrix_json(fisher));
    if (entropy) {
      row("shannon entropy", num(entropy->value) +
                                 (entropy->std_error > 0.0
                                      ? " +- " + num(entropy->std_error)
                                      : ""));
    } else {
      row("shannon entropy", "(needs --seed for the Monte-Carlo carrier term)");
    }
    return kExitOk;
  }

  std::string out = "{\"family\":\"" + family.name() + "\"," +
                    io_detail::fixed_block(family);
  out += "\"lambda\":" + arr(lambda) + ",\"theta\":" + arr(theta) +
         ",\"eta\":" + arr(eta) + ",\"log_normalizer\":" + num(log_norm) +
         ",\"grad_log_normalizer\":" + arr(eta) +
         ",\"conjugate\":" + (conj ? num(*conj) : "null") +
         ",\"grad_conjugate\":" + arr(grad_g) + ",\"fisher\":" + matrix_json(fisher);
  if (entropy) {
    out += ",\"shannon_entropy\":" + num(entropy->value) +
           ",\"shannon_entropy_std_error\":" + num(entropy->std_error);
  } else {
    out += ",\"shannon_entropy\":null";
  }
  out += "}";
  std::printf("%s\n", out.c_str());
  return kExitOk;
}

// ----- convert --------------------------------------------------------------

int cmd_convert(const std::string& file, const std::string& target) {
  const DistributionFile dist = parse_distribution(read_file(file));
  const Space space = io_detail::parse_space(target);
  const ParamVector converted = convert(*dist.family, dist.params, space);
  std::printf("%s\n", serialize_distribution(*dist.family, converted).c_str());
  return kExitOk;
}

// ----- divergence -----------------------------------------------------------

void require_same_family(const DistributionFile& p, const DistributionFile& q) {
  if (p.family->name() != q.family->name() ||
      p.family->descriptor().fixed_hyperparams !=
          q.family->descriptor().fixed_hyperparams) {
    throw DomainError("divergence: the two distributions must share one family");
  }
}

int cmd_divergence(const std::string& measure, double alpha, const std::string& p_file,
                   const std::string& q_file) {
  const DistributionFile p = parse_distribution(read_file(p_file));
  const DistributionFile q = parse_distribution(read_file(q_file));
  require_same_family(p, q);
  const Family& family = *p.family;

  double value = 0.0;
  if (measure == "kl") {
    value = kl(family, p.params, q.params);
  } else if (measure == "bregman") {
    value = bregman(family, convert(family, p.params, Space::natural),
                    convert(family, q.params, Space::natural));
  } else if (measure == "renyi") {
    value = renyi_divergence(family, alpha, p.params, q.params);
  } else if (measure == "tsallis") {
    value = tsallis_divergence(family, alpha, p.params, q.params);
  } else if (measure == "bhattacharyya") {
    value = bhattacharyya_coefficient(family, p.params, q.params);
  } else if (measure == "hellinger") {
    value = hellinger(family, p.params, q.params);
  } else if (measure == "jensen") {
    value = skew_jensen(family, alpha, p.params, q.params);
  } else {
    throw ParseError("unknown measure '" + measure + "'");
  }
  std::printf("%s\n", num(value).c_str());
  return kExitOk;
}

// ----- fit -------------------------------------------------------------------

int cmd_fit(const std::string& family_name, const std::vector<std::string>& hyper,
            const std::string& csv_file) {
  const FamilyPtr family = make_family(family_name, parse_hyper(hyper));
  const auto rows = read_csv(read_file(csv_file));
  const MleResult fit = mle(*family, rows);
  const ParamVector lambda = convert(*family, fit.eta, Space::source);
  std::printf("%s\n", serialize_distribution(*family, lambda).c_str());
  return kExitOk;
}

// ----- sample ----------------------------------------------------------------

int cmd_sample(const std::string& family_file, const std::string& mixture_file, long n,
               std::uint64_t seed, const std::string& out_path) {
  if (n < 0) throw DataError("sample: n must be nonnegative");
  if (family_file.empty() == mixture_file.empty()) {
    throw ParseError("sample: give exactly one of --family or --mixture");
  }
  std::vector<Observation> draws;
  int columns = 0;
  if (!family_file.empty()) {
    const DistributionFile dist = parse_distribution(read_file(family_file));
    const auto lambda = source_values(*dist.family, dist.params);
    Rng rng(RngSeed{seed});
    draws = dist.family->sample(lambda, n, rng);
    columns = dist.family->obs_dim();
  } else {
    ParseWarnings warnings;
    const MixtureModel model = parse_mixture(read_file(mixture_file), &warnings);
    for (const auto& w : warnings.messages) std::fprintf(stderr, "warning: %s\n", w.c_str());
    draws = sample_mixture(model, n, RngSeed{seed}).observations;
    columns = model.family->obs_dim();
  }
  const std::string csv = write_csv(draws, columns);
  if (out_path.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    write_file(out_path, csv);
  }
  return kExitOk;
}

// ----- mixture ---------------------------------------------------------------

int cmd_mixture_fit(const std::string& family_name, const std::vector<std::string>& hyper,
                    int k, int iters, double tol, std::uint64_t seed, int threads,
                    const std::string& csv_file) {
  const FamilyPtr family = make_family(family_name, parse_hyper(hyper));
  const auto rows = read_csv(read_file(csv_file));
  const auto [model, trace] = em_fit(family, rows, k, iters, tol, RngSeed{seed}, threads);

  std::string out = serialize_mixture(model);
  out.pop_back();  // splice the trace into the same JSON object
  out += ",\"trace\":{\"iterations\":" + std::to_string(trace.iterations_run) +
         ",\"converged\":" + (trace.converged ? "true" : "false") +
         ",\"average_log_likelihood\":" + arr(trace.average_log_likelihood) + "}}";
  std::printf("%s\n", out.c_str());
  return kExitOk;
}

int cmd_mixture_sample(const std::string& model_file, long n, std::uint64_t seed,
                       const std::string& out_path) {
  ParseWarnings warnings;
  const MixtureModel model = parse_mixture(read_file(model_file), &warnings);
  for (const auto& w : warnings.messages) std::fprintf(stderr, "warning: %s\n", w.c_str());
  const auto draws = sample_mixture(model, n, RngSeed{seed});
  const std::string csv = write_csv(draws.observations, model.family->obs_dim());
  if (out_path.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    write_file(out_path, csv);
  }
  return kExitOk;
}

int cmd_mixture_kl(const std::string& method, const std::string& f_file,
                   const std::string& g_file, long n,
                   const std::optional<std::uint64_t>& seed) {
  ParseWarnings warnings;
  const MixtureModel f = parse_mixture(read_file(f_file), &warnings);
  const MixtureModel g = parse_mixture(read_file(g_file), &warnings);
  for (const auto& w : warnings.messages) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (method == "jensen") {
    std::printf("%s\n", num(mixture_kl_jensen_bound(f, g)).c_str());
  } else if (method == "matching") {
    std::printf("%s\n", num(mixture_kl_matching(f, g)).c_str());
  } else if (method == "unscented") {
    std::printf("%s\n", num(mixture_kl_unscented(f, g)).c_str());
  } else if (method == "mc") {
    if (!seed) throw ParseError("mixture kl --method mc requires --seed");
    const McEstimate estimate = mixture_kl_monte_carlo(f, g, n, RngSeed{*seed});
    std::printf("{\"estimate\":%s,\"std_error\":%s}\n", num(estimate.mean).c_str(),
                num(estimate.std_error).c_str());
  } else {
    throw ParseError("unknown mixture KL method '" + method + "'");
  }
  return kExitOk;
}

int cmd_mixture_eval(const std::string& model_file, const std::string& data_file,
                     const std::string& point_text) {
  ParseWarnings warnings;
  const MixtureModel model = parse_mixture(read_file(model_file), &warnings);
  if (data_file.empty() == point_text.empty()) {
    throw ParseError("mixture eval: give exactly one of --data or --point");
  }
  if (!point_text.empty()) {
    Observation x;
    std::size_t pos = 0;
    while (pos <= point_text.size()) {
      std::size_t comma = point_text.find(',', pos);
      if (comma == std::string::npos) comma = point_text.size();
      try {
        x.push_back(std::stod(point_text.substr(pos, comma - pos)));
      } catch (...) {
        throw ParseError("mixture eval: bad --point value");
      }
      pos = comma + 1;
      if (comma == point_text.size()) break;
    }
    std::printf("%s\n", num(mixture_log_density(model, x)).c_str());
    return kExitOk;
  }
  const auto rows = read_csv(read_file(data_file));
  if (rows.empty()) throw DataError("mixture eval: empty data file");
  StableSum acc;
  for (const auto& x : rows) acc.add(mixture_log_density(model, x));
  std::printf("%s\n", num(acc.value() / static_cast<double>(rows.size())).c_str());
  return kExitOk;
}

// ----- validate ----------------------------------------------------------------

int cmd_validate(bool all, const std::string& family_name,
                 const std::vector<std::string>& hyper, const std::string& params_file,
                 bool pretty) {
  std::vector<FamilyPtr> families;
  std::optional<ParamVector> point;
  if (all) {
    for (const auto& entry : list_families()) families.push_back(entry.family);
  } else {
    if (family_name.empty() && params_file.empty()) {
      throw ParseError("validate: give --family NAME or --all");
    }
    if (!params_file.empty()) {
      DistributionFile dist = parse_distribution(read_file(params_file));
      if (!family_name.empty() && dist.family->name() != family_name) {
        throw ParseError("validate: --family disagrees with the params file");
      }
      point = dist.params;
      families.push_back(dist.family);
    } else {
      families.push_back(make_family(family_name, parse_hyper(hyper)));
    }
  }

  bool all_passed = true;
  std::string out = "{\"reports\":[";
  bool first_report = true;
  for (const auto& family : families) {
    const ValidationReport report = run_validation(*family, point);
    all_passed = all_passed && report.all_passed();
    if (pretty) {
      std::printf("%s\n", bold(report.family).c_str());
      for (const auto& check : report.checks) {
        std::printf("  [%s] %-26s residual %-13g tolerance %g\n",
                    check.pass ? "PASS" : "FAIL", check.name.c_str(), check.residual,
                    check.tolerance);
      }
    } else {
      if (!first_report) out += ",";
      first_report = false;
      out += "{\"family\":\"" + report.family + "\",\"checks\":[";
      for (std::size_t i = 0; i < report.checks.size(); ++i) {
        const auto& check = report.checks[i];
        if (i) out += ",";
        out += "{\"name\":\"" + check.name +
               "\",\"pass\":" + (check.pass ? "true" : "false") +
               ",\"residual\":" + num(check.residual) +
               ",\"tolerance\":" + num(check.tolerance) + "}";
      }
      out += "]}";
    }
  }
  if (!pretty) {
    out += "],\"all_passed\":";
    out += all_passed ? "true" : "false";
    out += "}";
    std::printf("%s\n", out.c_str());
  }
  if (!all_passed) {
    std::fprintf(stderr, "validate: at least one invariant check failed\n");
    return kExitDomain;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exponential-family toolkit: canonical decompositions, dual "
               "parameterizations, Bregman divergences, inference and mixtures"};
  app.require_subcommand(1);

  // card
  CardOptions card;
  auto* card_cmd = app.add_subcommand("card", "render one family member's flash card");
  card_cmd->add_option("file", card.file, "distribution JSON file")->required();
  card_cmd->add_flag("--pretty", card.pretty, "aligned table instead of JSON");
  std::uint64_t card_seed = 0;
  auto* card_seed_opt =
      card_cmd->add_option("--seed", card_seed, "seed for Monte-Carlo entropy terms");
  card_cmd->add_option("--mc-n", card.mc_n, "Monte-Carlo draws for entropy terms");

  // convert
  std::string convert_file, convert_to;
  auto* convert_cmd = app.add_subcommand("convert", "convert between parameter spaces");
  convert_cmd->add_option("file", convert_file, "distribution JSON file")->required();
  convert_cmd->add_option("--to", convert_to, "source|natural|expectation")->required();

  // divergence
  std::string div_measure = "kl", div_p, div_q;
  double div_alpha = 0.5;
  auto* div_cmd = app.add_subcommand("divergence", "statistical distances");
  div_cmd->add_option("--measure", div_measure,
                      "kl|bregman|renyi|tsallis|bhattacharyya|hellinger|jensen");
  div_cmd->add_option("--alpha", div_alpha, "order for renyi/tsallis/jensen");
  div_cmd->add_option("p", div_p, "left distribution JSON file")->required();
  div_cmd->add_option("q", div_q, "right distribution JSON file")->required();

  // fit
  std::string fit_family, fit_csv;
  std::vector<std::string> fit_hyper;
  auto* fit_cmd = app.add_subcommand("fit", "maximum-likelihood fit of one family");
  fit_cmd->add_option("--family", fit_family, "catalog family name")->required();
  fit_cmd->add_option("--hyper", fit_hyper, "fixed hyperparameters, name=value");
  fit_cmd->add_option("data", fit_csv, "CSV file of observations")->required();

  // sample
  std::string sample_family_file, sample_mixture_file, sample_out;
  long sample_n = 0;
  std::uint64_t sample_seed = 0;
  auto* sample_cmd = app.add_subcommand("sample", "draw observations to CSV");
  sample_cmd->add_option("--family", sample_family_file, "distribution JSON file");
  sample_cmd->add_option("--mixture", sample_mixture_file, "mixture JSON file");
  sample_cmd->add_option("--n", sample_n, "number of draws")->required();
  sample_cmd->add_option("--seed", sample_seed, "random seed")->required();
  sample_cmd->add_option("out", sample_out, "output CSV path (default stdout)");

  // mixture
  auto* mixture_cmd = app.add_subcommand("mixture", "mixture-model operations");
  mixture_cmd->require_subcommand(1);

  std::string mfit_family, mfit_csv;
  std::vector<std::string> mfit_hyper;
  int mfit_k = 1, mfit_iters = 100, mfit_threads = 1;
  double mfit_tol = 1e-9;
  std::uint64_t mfit_seed = 0;
  auto* mfit_cmd = mixture_cmd->add_subcommand("fit", "EM soft clustering");
  mfit_cmd->add_option("--family", mfit_family, "catalog family name")->required();
  mfit_cmd->add_option("--hyper", mfit_hyper, "fixed hyperparameters, name=value");
  mfit_cmd->add_option("--k", mfit_k, "number of components")->required();
  mfit_cmd->add_option("--iters", mfit_iters, "maximum EM iterations");
  mfit_cmd->add_option("--tol", mfit_tol, "relative log-likelihood tolerance");
  mfit_cmd->add_option("--seed", mfit_seed, "random seed")->required();
  mfit_cmd->add_option("--threads", mfit_threads, "worker threads for the E-step");
  mfit_cmd->add_option("data", mfit_csv, "CSV file of observations")->required();

  std::string msample_model, msample_out;
  long msample_n = 0;
  std::uint64_t msample_seed = 0;
  auto* msample_cmd = mixture_cmd->add_subcommand("sample", "draw from a mixture");
  msample_cmd->add_option("model", msample_model, "mixture JSON file")->required();
  msample_cmd->add_option("--n", msample_n, "number of draws")->required();
  msample_cmd->add_option("--seed", msample_seed, "random seed")->required();
  msample_cmd->add_option("out", msample_out, "output CSV path (default stdout)");

  std::string mkl_method = "jensen", mkl_f, mkl_g;
  long mkl_n = 100000;
  std::uint64_t mkl_seed = 0;
  auto* mkl_cmd = mixture_cmd->add_subcommand("kl", "mixture KL estimators");
  mkl_cmd->add_option("--method", mkl_method, "jensen|matching|unscented|mc");
  mkl_cmd->add_option("--n", mkl_n, "Monte-Carlo draws for --method mc");
  auto* mkl_seed_opt = mkl_cmd->add_option("--seed", mkl_seed, "seed for --method mc");
  mkl_cmd->add_option("f", mkl_f, "left mixture JSON file")->required();
  mkl_cmd->add_option("g", mkl_g, "right mixture JSON file")->required();

  std::string meval_model, meval_data, meval_point;
  auto* meval_cmd = mixture_cmd->add_subcommand("eval", "evaluate mixture log-density");
  meval_cmd->add_option("model", meval_model, "mixture JSON file")->required();
  meval_cmd->add_option("--data", meval_data, "CSV file: prints average log-likelihood");
  meval_cmd->add_option("--point", meval_point, "comma-separated observation");

  // validate
  bool validate_all = false, validate_pretty = false;
  std::string validate_family, validate_params;
  std::vector<std::string> validate_hyper;
  auto* validate_cmd = app.add_subcommand("validate", "run the invariant self-checks");
  validate_cmd->add_flag("--all", validate_all, "validate every catalog family");
  validate_cmd->add_option("--family", validate_family, "catalog family name");
  validate_cmd->add_option("--hyper", validate_hyper, "fixed hyperparameters");
  validate_cmd->add_option("params", validate_params, "optional distribution JSON file");
  validate_cmd->add_flag("--pretty", validate_pretty, "line report instead of JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitParse;
  }

  const auto run = [&]() -> int {
    if (card_cmd->parsed()) {
      if (card_seed_opt->count() > 0) card.seed = card_seed;
      return cmd_card(card);
    }
    if (convert_cmd->parsed()) return cmd_convert(convert_file, convert_to);
    if (div_cmd->parsed()) return cmd_divergence(div_measure, div_alpha, div_p, div_q);
    if (fit_cmd->parsed()) return cmd_fit(fit_family, fit_hyper, fit_csv);
    if (sample_cmd->parsed()) {
      return cmd_sample(sample_family_file, sample_mixture_file, sample_n, sample_seed,
                        sample_out);
    }
    if (mixture_cmd->parsed()) {
      if (mfit_cmd->parsed()) {
        return cmd_mixture_fit(mfit_family, mfit_hyper, mfit_k, mfit_iters, mfit_tol,
                               mfit_seed, mfit_threads, mfit_csv);
      }
      if (msample_cmd->parsed()) {
        return cmd_mixture_sample(msample_model, msample_n, msample_seed, msample_out);
      }
      if (mkl_cmd->parsed()) {
        std::optional<std::uint64_t> seed;
        if (mkl_seed_opt->count() > 0) seed = mkl_seed;
        return cmd_mixture_kl(mkl_method, mkl_f, mkl_g, mkl_n, seed);
      }
      if (meval_cmd->parsed()) return cmd_mixture_eval(meval_model, meval_data, meval_point);
    }
    if (validate_cmd->parsed()) {
      return cmd_validate(validate_all, validate_family, validate_hyper, validate_params,
                          validate_pretty);
    }
    return kExitParse;
  };

  try {
    return run();
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitParse;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDomain;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
