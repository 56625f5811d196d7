#include "cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>

#include "gibbs/approx.hpp"
#include "gibbs/errors.hpp"
#include "gibbs/posterior.hpp"
#include "gibbs/sampler.hpp"
#include "gibbs/stirling.hpp"

namespace gibbs::cli {

namespace {

using Json = nlohmann::ordered_json;

struct Cell {
  enum class Kind { empty, integer, real, text };
  Kind kind = Kind::empty;
  long integer = 0;
  std::string text;
};

Cell int_cell(long v) { return {Cell::Kind::integer, v, {}}; }
Cell real_cell(std::string v) { return {Cell::Kind::real, 0, std::move(v)}; }
Cell text_cell(std::string v) { return {Cell::Kind::text, 0, std::move(v)}; }
Cell empty_cell() { return {}; }

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  Json diagnostics = Json::object();
  int status = kOk;
};

// Shortest round-trip form; scientific below 1e-4.
std::string render(double x) {
  if (x == 0.0) return "0";
  char buf[64];
  const auto fmt = std::abs(x) < 1e-4 ? std::chars_format::scientific : std::chars_format::general;
  const auto res = std::to_chars(buf, buf + sizeof buf, x, fmt);
  return std::string(buf, res.ptr);
}

struct Renderer {
  int digits;
  std::string operator()(const XReal& x) const { return x.to_string(digits); }
};

double parse_field(const std::string& text, const std::string& field) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end) {
    throw UsageError("model spec: " + field + ": expected a number, got '" + text + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  for (;;) {
    const size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

// Resolves --n/--k/--sizes into a state.
PartitionState resolve_state(std::optional<long> n, std::optional<long> k, const std::vector<long>& sizes) {
  if (!sizes.empty()) {
    PartitionState state(sizes);
    if (n && *n != state.n()) {
      throw UsageError("--sizes sum to " + std::to_string(state.n()) + " but --n is " + std::to_string(*n));
    }
    if (k && *k != state.k()) {
      throw UsageError("--sizes has " + std::to_string(state.k()) + " blocks but --k is " + std::to_string(*k));
    }
    return state;
  }
  if (!n || !k) throw UsageError("give --n and --k, or --sizes");
  return PartitionState::counts_only(*n, *k);
}

long default_kstar(long m, double alpha) {
  return std::clamp(std::lround(std::pow(static_cast<double>(m), alpha)), 1L, m);
}

// Stirling tables are computed with extra guard bits so that every route
// rounds to the same rendered digits.
constexpr long kStirlingGuard = 48;

Table stirling_central(double alpha, long n_max, const std::string& route, Precision p, const Renderer& fmt) {
  Table t{{"n", "k", "value"}, {}, Json::object(), kOk};
  const Precision w = p + kStirlingGuard;
  std::optional<StirlingTriangle> tri;
  if (route == "recurrence") tri.emplace(StirlingTriangle::build(alpha, n_max, w));
  for (long n = 1; n <= n_max; ++n) {
    for (long k = 1; k <= n; ++k) {
      const XReal v = tri ? tri->at(n, k) : central_toscano(n, k, alpha, w);
      t.rows.push_back({int_cell(n), int_cell(k), real_cell(fmt(v.at(p)))});
    }
  }
  return t;
}

Table stirling_noncentral(double alpha, long n, long k, long m_max, long kstar_max, const std::string& route,
                          Precision p, const Renderer& fmt) {
  Table t{{"m", "kstar", "value"}, {}, Json::object(), kOk};
  const Precision w = p + kStirlingGuard;
  const NoncentralParams params(alpha, n, k);
  std::optional<StirlingTriangle> tri;
  if (route == "convolution") tri.emplace(StirlingTriangle::build(alpha, m_max, w));
  for (long m = 0; m <= m_max; ++m) {
    std::vector<XReal> row;
    if (route == "recurrence") row = noncentral_row(m, params, w);
    for (long ks = 0; ks <= std::min(m, kstar_max); ++ks) {
      XReal v(w);
      if (route == "recurrence") {
        v = row[static_cast<size_t>(ks)];
      } else if (tri) {
        v = noncentral_convolution(m, ks, params, *tri);
      } else {
        v = noncentral_direct(m, ks, params, w);
      }
      t.rows.push_back({int_cell(m), int_cell(ks), real_cell(fmt(v.at(p)))});
    }
  }
  return t;
}

Table weights_table(const GibbsModel& model, long n_max, const Renderer& fmt) {
  Table t{{"n", "k", "value", "residual"}, {}, Json::object(), kOk};
  long max_bits = 0;
  long escalations = 0;
  for (long n = 1; n <= n_max; ++n) {
    for (long k = 1; k <= n; ++k) {
      WeightDiagnostics diag;
      const XReal v = weight(model, n, k, &diag);
      max_bits = std::max(max_bits, diag.working_bits);
      escalations += diag.escalations;
      const XReal res = recursion_residual(model, n, k);
      t.rows.push_back({int_cell(n), int_cell(k), real_cell(fmt(v)), real_cell(render(res.to_double()))});
    }
  }
  t.diagnostics["max_working_bits"] = max_bits;
  t.diagnostics["precision_escalations"] = escalations;
  return t;
}

void push_report(Table& t, long a, long b, const ApproxReport& r, const Renderer& fmt) {
  t.rows.push_back({int_cell(a), int_cell(b), r.exact ? real_cell(fmt(*r.exact)) : empty_cell(),
                    real_cell(fmt(r.approx)),
                    r.rel_error ? real_cell(render(r.rel_error->to_double())) : empty_cell()});
}

struct Check {
  std::string suite;
  std::string name;
  double residual;
  double tolerance;
  bool pass;
};

double rel(const XReal& a, const XReal& b) { return rel_diff(a, b).to_double(); }

// Model spec with CSV-safe separators.
std::string tag(const GibbsModel& model) {
  std::string s = model.spec();
  std::replace(s.begin(), s.end(), ':', '_');
  std::replace(s.begin(), s.end(), ',', '_');
  return s;
}

void validate_stirling(std::vector<Check>& out) {
  const Precision p{};
  double expansion = 0.0;
  for (double alpha : {0.25, 0.5, 0.75}) {
    const auto tri = build_triangle(alpha, 30, p);
    for (double x : {0.3, 1.0, 2.7}) {
      for (long n = 1; n <= 30; ++n) {
        XReal sum(p);
        for (long k = 1; k <= n; ++k) sum += tri.at(n, k) * gen_rising_factorial(x, k, alpha, p);
        expansion = std::max(expansion, rel(sum, rising_factorial(x, n, p)));
      }
    }
  }
  out.push_back({"stirling", "expansion_identity", expansion, 1e-10, expansion <= 1e-10});

  double toscano = 0.0;
  for (double alpha : {0.25, 0.5, 0.75}) {
    const auto tri = build_triangle(alpha, 25, p);
    for (long n = 1; n <= 25; ++n) {
      for (long k = 1; k <= n; ++k) toscano = std::max(toscano, rel(central_toscano(n, k, alpha, p), tri.at(n, k)));
    }
  }
  out.push_back({"stirling", "toscano_vs_recurrence", toscano, 1e-10, toscano <= 1e-10});

  double direct = 0.0;
  for (const auto& [alpha, n, k] : {std::tuple{0.5, 2L, 1L}, std::tuple{0.25, 5L, 3L}, std::tuple{0.75, 4L, 2L}}) {
    const NoncentralParams params(alpha, n, k);
    const auto tri = build_triangle(alpha, 25, p);
    for (long m = 0; m <= 25; ++m) {
      for (long ks = 0; ks <= m; ++ks) {
        direct = std::max(direct, rel(noncentral_direct(m, ks, params, p), noncentral_convolution(m, ks, params, tri)));
      }
    }
  }
  out.push_back({"stirling", "direct_vs_convolution", direct, 1e-10, direct <= 1e-10});

  const double regression = std::abs(noncentral_direct(2, 1, NoncentralParams(0.5, 2, 1), p).to_double() - 3.5);
  out.push_back({"stirling", "noncentral_regression_3.5", regression, 1e-30, regression <= 1e-30});

  const double recurrence = build_triangle(0.5, 60, p).max_recurrence_residual().to_double();
  out.push_back({"stirling", "triangle_recurrence", recurrence, 1e-30, recurrence <= 1e-30});
}

void validate_models(std::vector<Check>& out) {
  const std::vector<GibbsModel> models = {GibbsModel::pd(0.5, 1.0), GibbsModel::pd(0.25, 2.0), GibbsModel::nig(1.0),
                                          GibbsModel::ngg(0.75, 0.5)};
  double norm = 0.0;
  double recursion = 0.0;
  for (const auto& model : models) {
    const auto tri = build_triangle(model.alpha(), 25);
    for (long n = 1; n <= 25; ++n) {
      XReal sum(Precision{});
      for (long k = 1; k <= n; ++k) sum += weight(model, n, k) * tri.at(n, k);
      norm = std::max(norm, std::abs((sum - 1L).to_double()));
    }
    const long n_max = model.family() == Family::pd ? 50 : 25;
    for (long n = 1; n <= n_max; ++n) {
      for (long k = 1; k <= n; ++k) recursion = std::max(recursion, recursion_residual(model, n, k).to_double());
    }
  }
  out.push_back({"models", "eppf_normalization", norm, 1e-8, norm <= 1e-8});
  out.push_back({"models", "backward_recursion", recursion, 1e-8, recursion <= 1e-8});
  double boundary = 0.0;
  for (double beta : {0.1, 1.0, 10.0}) {
    boundary = std::max(boundary, std::abs((weight(GibbsModel::nig(beta), 1, 1) - 1L).to_double()));
  }
  out.push_back({"models", "boundary_weight", boundary, 1e-30, boundary <= 1e-30});
}

void validate_posterior(std::vector<Check>& out) {
  for (const auto& [model, tol] : {std::pair{GibbsModel::pd(0.5, 1.0), 1e-10}, std::pair{GibbsModel::nig(1.0), 1e-8}}) {
    double worst = 0.0;
    for (long n = 1; n <= 6; ++n) {
      for (long k = 1; k <= n; ++k) {
        for (long m = 0; m <= 4; ++m) {
          XReal sum(Precision{});
          for (const auto& o : enumerate_outcomes(m)) sum += joint_continuation_pmf(model, n, k, m, o);
          worst = std::max(worst, std::abs((sum - 1L).to_double()));
        }
      }
    }
    out.push_back({"posterior", "joint_pmf_normalization_" + tag(model), worst, tol, worst <= tol});
  }
  double km = 0.0;
  for (const auto& model : {GibbsModel::pd(0.5, 1.0), GibbsModel::nig(1.0)}) {
    for (long m = 1; m <= 25; ++m) {
      XReal sum(Precision{});
      for (const auto& v : posterior_km_distribution(model, 5, 2, m)) sum += v;
      km = std::max(km, std::abs((sum - 1L).to_double()));
    }
  }
  out.push_back({"posterior", "km_pmf_normalization", km, 1e-9, km <= 1e-9});
  double closed = 0.0;
  const double alpha = 0.5, theta = 1.0;
  const auto pd = GibbsModel::pd(alpha, theta);
  const Precision p{};
  for (long m = 1; m <= 12; ++m) {
    for (long ks = 0; ks <= m; ++ks) {
      const XReal ref = gen_rising_factorial(theta + 3 * alpha, ks, alpha, p) / rising_factorial(theta + 9, m, p);
      closed = std::max(closed, rel(posterior_ratio_exact(pd, 9, 3, m, ks), ref));
    }
  }
  out.push_back({"posterior", "pd_ratio_closed_form", closed, 1e-12, closed <= 1e-12});
  double m0 = 0.0;
  for (const auto& model : {GibbsModel::pd(0.5, 1.0), GibbsModel::nig(1.0)}) {
    m0 = std::max(m0, std::abs((discovery_exact(model, 20, 6, 0) - new_block_probability(model, 20, 6)).to_double()));
  }
  out.push_back({"posterior", "discovery_m0", m0, 0.0, m0 == 0.0});
}

void validate_approx(std::vector<Check>& out) {
  for (const auto& model : {GibbsModel::pd(0.5, 1.0), GibbsModel::nig(1.0)}) {
    std::vector<double> errors;
    for (long n : {100L, 1000L, 10000L}) {
      const long k = default_kstar(n, model.alpha());
      errors.push_back(rel(prior_weight_approx(model, n, k), weight(model, n, k)));
    }
    const bool decreasing = errors[0] > errors[1] && errors[1] > errors[2];
    out.push_back({"approx", "prior_convergence_" + tag(model), errors[2], errors[0], decreasing});
  }
  RandomStream rng(stream_seed(2024, 0));
  double example5 = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double alpha = 0.05 + 0.9 * rng.uniform();
    const double theta = 5.0 * rng.uniform() - 0.9 * alpha;
    const long n = 1 + rng.below(40);
    const long k = 1 + rng.below(n);
    const long m = 1 + rng.below(500);
    const long ks = 1 + rng.below(m);
    const auto model = GibbsModel::pd(alpha, theta);
    example5 = std::max(example5, rel(posterior_ratio_approx(model, n, k, m, ks),
                                      pd_posterior_ratio_direct(alpha, theta, n, k, m, ks)));
  }
  out.push_back({"approx", "pd_posterior_direct_identity", example5, 1e-10, example5 <= 1e-10});
  std::vector<double> gaps;
  for (long m : {50L, 200L, 1000L}) {
    const long ks = default_kstar(m, 0.5);
    const XReal exact = noncentral_row(m, NoncentralParams(0.5, 2, 1))[static_cast<size_t>(ks)];
    gaps.push_back(rel(noncentral_stirling_approx(m, ks, 2, 1, 0.5), exact));
  }
  out.push_back({"approx", "noncentral_convergence", gaps[2], gaps[0], gaps[0] > gaps[1] && gaps[1] > gaps[2]});
}

Table validate_table(const std::string& suite) {
  std::vector<Check> checks;
  if (suite == "all" || suite == "stirling") validate_stirling(checks);
  if (suite == "all" || suite == "models") validate_models(checks);
  if (suite == "all" || suite == "posterior") validate_posterior(checks);
  if (suite == "all" || suite == "approx") validate_approx(checks);
  Table t{{"suite", "check", "max_residual", "tolerance", "status"}, {}, Json::object(), kOk};
  long failed = 0;
  for (const auto& c : checks) {
    t.rows.push_back({text_cell(c.suite), text_cell(c.name), real_cell(render(c.residual)),
                      real_cell(render(c.tolerance)), text_cell(c.pass ? "PASS" : "FAIL")});
    if (!c.pass) ++failed;
  }
  t.diagnostics["checks"] = static_cast<long>(checks.size());
  t.diagnostics["failed"] = failed;
  if (failed > 0) t.status = kNumerical;
  return t;
}

void write_csv(const Table& t, std::ostream& os) {
  for (size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      const Cell& c = row[i];
      if (c.kind == Cell::Kind::integer) {
        os << c.integer;
      } else {
        os << c.text;
      }
    }
    os << '\n';
  }
}

void write_json(const Table& t, const Json& config, std::ostream& os) {
  Json doc;
  doc["config"] = config;
  Json rows = Json::array();
  for (const auto& row : t.rows) {
    Json obj = Json::object();
    for (size_t i = 0; i < row.size(); ++i) {
      const Cell& c = row[i];
      switch (c.kind) {
        case Cell::Kind::empty:
          obj[t.columns[i]] = nullptr;
          break;
        case Cell::Kind::integer:
          obj[t.columns[i]] = c.integer;
          break;
        default:
          obj[t.columns[i]] = c.text;
      }
    }
    rows.push_back(std::move(obj));
  }
  doc["rows"] = std::move(rows);
  doc["diagnostics"] = t.diagnostics;
  os << doc.dump(2) << '\n';
}

// Records every option of the selected command chain, given or defaulted.
void record_options(const CLI::App* app, Json& config) {
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_name(false, true);
    if (name.empty() || name == "--help") continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      for (size_t i = 0; i < results.size(); ++i) value += (i ? "," : "") + results[i];
    } else {
      value = opt->get_default_str();
    }
    if (value.empty()) continue;
    config[name.substr(name.find_first_not_of('-'))] = value;
  }
}

long precision_from_env() {
  const char* env = std::getenv("GIBBS_PRECISION_BITS");
  if (env == nullptr || *env == '\0') return Precision::kDefaultBits;
  long bits = 0;
  const std::string text(env);
  const auto res = std::from_chars(text.data(), text.data() + text.size(), bits);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw UsageError("GIBBS_PRECISION_BITS: expected an integer, got '" + text + "'");
  }
  return bits;
}

}  // namespace

GibbsModel parse_model(const std::string& spec, Precision p) {
  const size_t colon = spec.find(':');
  if (colon == std::string::npos) throw UsageError("model spec: family: expected 'pd:', 'ngg:' or 'nig:' in '" + spec + "'");
  const std::string family = spec.substr(0, colon);
  const auto fields = split(spec.substr(colon + 1), ',');
  if (family == "pd" || family == "ngg") {
    const std::string second = family == "pd" ? "theta" : "beta";
    if (fields.size() != 2) throw UsageError("model spec: " + family + " takes alpha," + second);
    const double alpha = parse_field(fields[0], "alpha");
    const double v = parse_field(fields[1], second);
    return family == "pd" ? GibbsModel::pd(alpha, v, p) : GibbsModel::ngg(alpha, v, p);
  }
  if (family == "nig") {
    if (fields.size() != 1) throw UsageError("model spec: nig takes beta");
    return GibbsModel::nig(parse_field(fields[0], "beta"), p);
  }
  throw UsageError("model spec: family: unknown family '" + family + "'");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gibbs partition models: Stirling numbers, weights, approximations and species discovery", "gibbs"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string format = "csv";
  std::string output;
  std::optional<long> precision_flag;
  int digits = 0;
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("--output", output, "Write the table to this file instead of standard output");
  app.add_option("--precision", precision_flag, "Working precision in bits (default 128 or GIBBS_PRECISION_BITS)");
  app.add_option("--digits", digits, "Significant digits for extended-precision values (default: round-trip)");

  std::string model_spec;
  std::optional<long> n_opt;
  std::optional<long> k_opt;
  std::vector<long> sizes;
  long m = 0;
  double alpha = 0.5;
  std::uint64_t seed = 1;
  long reps = 10000;
  unsigned threads = 1;
  bool exact_weights = false;
  std::string convention = "consistent";
  double norm_c = 2.0;
  std::string method = "exact";

  auto add_model = [&](CLI::App* sub) { sub->add_option("--model", model_spec, "pd:<alpha>,<theta> | ngg:<alpha>,<beta> | nig:<beta>")->required(); };
  auto add_state = [&](CLI::App* sub) {
    sub->add_option("--n", n_opt, "Observed sample size");
    sub->add_option("--k", k_opt, "Observed number of blocks");
    sub->add_option("--sizes", sizes, "Observed block sizes, comma separated")->delimiter(',');
  };
  auto add_mc = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Random seed")->capture_default_str();
    sub->add_option("--reps", reps, "Monte Carlo replications")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u))->capture_default_str();
    sub->add_flag("--exact-weights", exact_weights, "Use extended-precision weights for every step");
  };
  auto add_convention = [&](CLI::App* sub) {
    sub->add_option("--convention", convention, "Pairing of tilt and diversity density")
        ->check(CLI::IsMember({"consistent", "as_printed"}))
        ->capture_default_str();
    sub->add_option("--norm-c", norm_c, "Stable normalization constant c")->capture_default_str();
  };

  // stirling
  auto* stirling = app.add_subcommand("stirling", "Generalized Stirling number tables");
  stirling->require_subcommand(1);
  auto* central = stirling->add_subcommand("central", "Central numbers S(n, k; alpha)");
  long n_max = 5;
  std::string central_route = "recurrence";
  central->add_option("--alpha", alpha, "Stable index")->required();
  central->add_option("--n-max", n_max, "Largest n")->check(CLI::PositiveNumber)->capture_default_str();
  central->add_option("--route", central_route, "Algorithm")
      ->check(CLI::IsMember({"recurrence", "toscano"}))
      ->capture_default_str();
  auto* noncentral = stirling->add_subcommand("noncentral", "Non-central numbers S(m, k*; alpha, n - k alpha)");
  long kstar_max = -1;
  std::string noncentral_route = "convolution";
  long sn = 0, sk = 0;
  noncentral->add_option("--alpha", alpha, "Stable index")->required();
  noncentral->add_option("--n", sn, "Observed sample size")->required();
  noncentral->add_option("--k", sk, "Observed number of blocks")->required();
  noncentral->add_option("--m", m, "Largest m")->required()->check(CLI::NonNegativeNumber);
  noncentral->add_option("--kstar-max", kstar_max, "Largest k* (default m)");
  noncentral->add_option("--route", noncentral_route, "Algorithm")
      ->check(CLI::IsMember({"convolution", "direct", "recurrence"}))
      ->capture_default_str();

  // weights
  auto* weights = app.add_subcommand("weights", "Gibbs weights V(n, k) with the backward recursion residual");
  add_model(weights);
  long w_n_max = 10;
  weights->add_option("--n-max", w_n_max, "Largest n")->check(CLI::PositiveNumber)->capture_default_str();

  // approx
  auto* approx = app.add_subcommand("approx", "Exact against approximate values");
  approx->require_subcommand(1);
  std::vector<long> ladder_n, ladder_k, ladder_m, ladder_kstar;
  bool skip_exact = false;
  auto* prior = approx->add_subcommand("prior", "Prior weights V(n, k)");
  add_model(prior);
  add_convention(prior);
  prior->add_option("--n", ladder_n, "Sample sizes")->required()->delimiter(',');
  prior->add_option("--k", ladder_k, "Block counts (default round(n^alpha))")->delimiter(',');
  prior->add_flag("--skip-exact", skip_exact, "Omit the exact column");
  auto* posterior = approx->add_subcommand("posterior", "Posterior ratios V(n+m, k+k*)/V(n, k)");
  add_model(posterior);
  add_convention(posterior);
  long pn = 0, pk = 0;
  posterior->add_option("--n", pn, "Observed sample size")->required();
  posterior->add_option("--k", pk, "Observed number of blocks")->required();
  posterior->add_option("--m", ladder_m, "Additional sample sizes")->required()->delimiter(',');
  posterior->add_option("--kstar", ladder_kstar, "New block counts (default round(m^alpha))")->delimiter(',');
  posterior->add_flag("--skip-exact", skip_exact, "Omit the exact column");
  auto* astirling = approx->add_subcommand("stirling", "Non-central Stirling numbers");
  add_convention(astirling);
  astirling->add_option("--alpha", alpha, "Stable index")->required();
  astirling->add_option("--n", pn, "Observed sample size")->required();
  astirling->add_option("--k", pk, "Observed number of blocks")->required();
  astirling->add_option("--m", ladder_m, "Additional sample sizes")->required()->delimiter(',');
  astirling->add_option("--kstar", ladder_kstar, "New block counts (default round(m^alpha))")->delimiter(',');
  astirling->add_flag("--skip-exact", skip_exact, "Omit the exact column");

  // discovery
  auto* discovery = app.add_subcommand("discovery", "Probability that draw n+m+1 is a new species");
  add_model(discovery);
  add_state(discovery);
  add_mc(discovery);
  add_convention(discovery);
  std::string scale = "shifted";
  discovery->add_option("--m", m, "Unobserved draws before the predicted one")->required()->check(CLI::NonNegativeNumber);
  discovery->add_option("--method", method, "Estimator")
      ->check(CLI::IsMember({"exact", "approx", "mc", "all"}))
      ->capture_default_str();
  discovery->add_option("--scale", scale, "Scale of s in the approximation")
      ->check(CLI::IsMember({"shifted", "next_draw", "sample"}))
      ->capture_default_str();

  // expected-new
  auto* expected = app.add_subcommand("expected-new", "Expected number of new species in m further draws");
  add_model(expected);
  add_state(expected);
  add_mc(expected);
  expected->add_option("--m", m, "Further draws")->required()->check(CLI::NonNegativeNumber);
  expected->add_option("--method", method, "Estimator")
      ->check(CLI::IsMember({"exact", "mc", "all"}))
      ->capture_default_str();

  // sample
  auto* sample = app.add_subcommand("sample", "Empirical distribution of the number of blocks K_n");
  add_model(sample);
  add_mc(sample);
  long sample_n = 10;
  bool with_exact = false;
  sample->add_option("--n", sample_n, "Sample size")->required()->check(CLI::PositiveNumber);
  sample->add_flag("--exact", with_exact, "Add the exact pmf V(n,k) S(n,k)");

  // validate
  auto* validate = app.add_subcommand("validate", "Identity and normalization checks with their residuals");
  std::string suite = "all";
  validate->add_option("--suite", suite, "Checks to run")
      ->check(CLI::IsMember({"all", "stirling", "models", "posterior", "approx"}))
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    const long bits = precision_flag ? *precision_flag : precision_from_env();
    if (bits < Precision::kMinBits || bits > (1L << 20)) {
      throw UsageError("precision must be between " + std::to_string(Precision::kMinBits) + " and " +
                       std::to_string(1L << 20) + " bits");
    }
    const Precision p(bits);
    const Renderer fmt{digits > 0 ? digits : XReal(p).decimal_digits()};
    ApproxOptions aopts;
    aopts.norm = StableNormalization(norm_c);
    aopts.convention = convention == "as_printed" ? Convention::as_printed : Convention::consistent;
    SamplerOptions sopts;
    sopts.threads = threads;
    sopts.exact_weights = exact_weights;

    Json config = Json::object();
    std::vector<const CLI::App*> chain = {&app};
    std::string command;
    for (const CLI::App* a = &app;;) {
      const auto subs = a->get_subcommands();
      if (subs.empty()) break;
      a = subs.front();
      chain.push_back(a);
      command += (command.empty() ? "" : " ") + a->get_name();
    }
    config["command"] = command;
    config["precision_bits"] = bits;
    for (const CLI::App* a : chain) record_options(a, config);

    Table table;
    if (central->parsed()) {
      table = stirling_central(alpha, n_max, central_route, p, fmt);
    } else if (noncentral->parsed()) {
      table = stirling_noncentral(alpha, sn, sk, m, kstar_max < 0 ? m : kstar_max, noncentral_route, p, fmt);
    } else if (weights->parsed()) {
      table = weights_table(parse_model(model_spec, p), w_n_max, fmt);
    } else if (prior->parsed()) {
      const auto model = parse_model(model_spec, p);
      if (!ladder_k.empty() && ladder_k.size() != ladder_n.size()) throw UsageError("--k must match --n in length");
      table = Table{{"n", "k", "exact", "approx", "rel_error"}, {}, Json::object(), kOk};
      for (size_t i = 0; i < ladder_n.size(); ++i) {
        const long n = ladder_n[i];
        const long k = ladder_k.empty() ? default_kstar(n, model.alpha()) : ladder_k[i];
        std::optional<XReal> exact;
        if (!skip_exact) exact = weight(model, n, k);
        push_report(table, n, k, ApproxReport::make(prior_weight_approx(model, n, k, aopts), exact, {}), fmt);
      }
    } else if (posterior->parsed() || astirling->parsed()) {
      if (!ladder_kstar.empty() && ladder_kstar.size() != ladder_m.size()) {
        throw UsageError("--kstar must match --m in length");
      }
      std::optional<GibbsModel> model;
      if (posterior->parsed()) model = parse_model(model_spec, p);
      const double a = model ? model->alpha() : alpha;
      table = Table{{"m", "kstar", "exact", "approx", "rel_error"}, {}, Json::object(), kOk};
      for (size_t i = 0; i < ladder_m.size(); ++i) {
        const long mm = ladder_m[i];
        if (mm < 1) throw UsageError("--m values must be positive");
        const long ks = ladder_kstar.empty() ? default_kstar(mm, a) : ladder_kstar[i];
        std::optional<XReal> exact;
        XReal approx_value(p);
        if (model) {
          if (!skip_exact) exact = posterior_ratio_exact(*model, pn, pk, mm, ks);
          approx_value = posterior_ratio_approx(*model, pn, pk, mm, ks, aopts);
        } else {
          if (ks < 0 || ks > mm) throw DomainError("k* must lie in 0 .. m");
          if (!skip_exact) exact = noncentral_row(mm, NoncentralParams(a, pn, pk), p)[static_cast<size_t>(ks)];
          approx_value = noncentral_stirling_approx(mm, ks, pn, pk, a, aopts, p);
        }
        push_report(table, mm, ks, ApproxReport::make(approx_value, exact, {}), fmt);
      }
    } else if (discovery->parsed()) {
      const auto model = parse_model(model_spec, p);
      const auto state = resolve_state(n_opt, k_opt, sizes);
      aopts.discovery_scale = scale == "sample"      ? DiscoveryScale::sample
                              : scale == "next_draw" ? DiscoveryScale::next_draw
                                                     : DiscoveryScale::shifted;
      table = Table{{"method", "value", "std_error"}, {}, Json::object(), kOk};
      if (method == "exact" || method == "all") {
        table.rows.push_back(
            {text_cell("exact"), real_cell(fmt(discovery_exact(model, state.n(), state.k(), m))), empty_cell()});
      }
      if (method == "approx" || method == "all") {
        if (m < 1) throw UsageError("the approximation needs --m >= 1");
        const auto d = discovery_approx(model, state.n(), state.k(), m, aopts);
        table.rows.push_back({text_cell("approx"), real_cell(fmt(d.value)), empty_cell()});
        table.diagnostics["approx_out_of_range"] = d.out_of_range;
      }
      if (method == "mc" || method == "all") {
        const auto est = mc_discovery(model, state, m, reps, seed, sopts);
        table.rows.push_back({text_cell("mc"), real_cell(render(est.mean)), real_cell(render(est.std_error))});
      }
    } else if (expected->parsed()) {
      const auto model = parse_model(model_spec, p);
      const auto state = resolve_state(n_opt, k_opt, sizes);
      table = Table{{"method", "value", "std_error"}, {}, Json::object(), kOk};
      if (method == "exact" || method == "all") {
        table.rows.push_back(
            {text_cell("exact"), real_cell(fmt(expected_new_species(model, state.n(), state.k(), m))), empty_cell()});
      }
      if (method == "mc" || method == "all") {
        const auto est = mc_expected_new_species(model, state, m, reps, seed, sopts);
        table.rows.push_back({text_cell("mc"), real_cell(render(est.mean)), real_cell(render(est.std_error))});
      }
    } else if (sample->parsed()) {
      const auto model = parse_model(model_spec, p);
      const auto counts = mc_kn_counts(model, sample_n, reps, seed, sopts);
      table = Table{{"k", "count", "frequency", "std_error"}, {}, Json::object(), kOk};
      std::optional<StirlingTriangle> tri;
      if (with_exact) {
        table.columns.push_back("exact");
        tri.emplace(StirlingTriangle::build(model.alpha(), sample_n, p + 16));
      }
      const double r = static_cast<double>(reps);
      for (long k = 1; k <= sample_n; ++k) {
        const long c = counts[static_cast<size_t>(k)];
        const double f = static_cast<double>(c) / r;
        std::vector<Cell> row = {int_cell(k), int_cell(c), real_cell(render(f)),
                                 real_cell(render(std::sqrt(f * (1.0 - f) / r)))};
        if (tri) row.push_back(real_cell(fmt((weight(model, sample_n, k) * tri->at(sample_n, k)).at(p))));
        table.rows.push_back(std::move(row));
      }
    } else if (validate->parsed()) {
      table = validate_table(suite);
    }

    std::ofstream file;
    if (!output.empty()) {
      file.open(output, std::ios::binary | std::ios::trunc);
      if (!file) throw UsageError("cannot open '" + output + "' for writing");
    }
    std::ostream& dest = output.empty() ? out : file;
    if (format == "json") {
      write_json(table, config, dest);
    } else {
      write_csv(table, dest);
      for (const auto& [key, value] : table.diagnostics.items()) err << "diagnostic " << key << '=' << value.dump() << '\n';
    }
    if (table.status != kOk) err << "error: " << table.diagnostics.value("failed", 0L) << " check(s) failed\n";
    return table.status;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const UnsupportedParameter& e) {
    err << "error: unsupported parameters: " << e.what() << '\n';
    return kUnsupported;
  } catch (const Error& e) {
    err << "error: numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace gibbs::cli
