#include "levelcross/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "levelcross/asymptotics.hpp"
#include "levelcross/errors.hpp"
#include "levelcross/model_config.hpp"
#include "levelcross/montecarlo.hpp"

namespace levelcross {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kConfig, field + ": " + what);
}

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::ordered_json jnum(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Command parse_command(std::string_view s) {
  if (s == "compute") return Command::kCompute;
  if (s == "simulate") return Command::kSimulate;
  if (s == "compare") return Command::kCompare;
  if (s == "sweep") return Command::kSweep;
  config_error("command", "unknown command '" + std::string(s) + "'");
}

Format parse_format(std::string_view s) {
  if (s == "csv") return Format::kCsv;
  if (s == "json") return Format::kJson;
  config_error("format", "expected csv or json, got '" + std::string(s) + "'");
}

struct Row {
  std::size_t n = 0;
  double K = 0.0;
  std::string model;
  IntervalSpec interval;
  Method method = Method::kKacRice;
  double value = kNaN;
  double err = kNaN;
  double f1 = kNaN;
  double f2 = kNaN;
  double prediction = kNaN;
  double ratio = kNaN;
  double mc_value = kNaN;
  double mc_err = kNaN;
  double z = kNaN;
  bool flagged = false;
};

struct Fit {
  IntervalSpec interval;
  LogSlopeFit fit;
  double target = kNaN;
};

double prediction_for(const CovarianceModel& model, std::size_t n, double K,
                      const IntervalSpec& iv) {
  if (!model.admits_density()) return kNaN;
  const auto p = interval_prediction(n, K, model.smoothness(), iv.lo, iv.hi);
  return p ? *p : kNaN;
}

void write_csv(std::ostream& os, const std::vector<Row>& rows, const std::vector<Fit>& fits,
               bool with_mc) {
  os << "n,K,model,interval_lo,interval_hi,method,value,err,f1_part,f2_part,prediction,ratio";
  if (with_mc) os << ",mc_value,mc_err,z";
  os << ",flagged\n";
  for (const auto& r : rows) {
    os << r.n << ',' << num(r.K) << ',' << r.model << ',' << num(r.interval.lo) << ','
       << num(r.interval.hi) << ',' << to_string(r.method) << ',' << num(r.value) << ','
       << num(r.err) << ',' << num(r.f1) << ',' << num(r.f2) << ',' << num(r.prediction) << ','
       << num(r.ratio);
    if (with_mc) os << ',' << num(r.mc_value) << ',' << num(r.mc_err) << ',' << num(r.z);
    os << ',' << (r.flagged ? 1 : 0) << '\n';
  }
  for (const auto& f : fits) {
    os << "# fit interval_lo=" << num(f.interval.lo) << " interval_hi=" << num(f.interval.hi)
       << " slope=" << num(f.fit.slope) << " intercept=" << num(f.fit.intercept)
       << " max_residual=" << num(f.fit.max_residual) << " target_slope=" << num(f.target)
       << '\n';
  }
}

void write_json(std::ostream& os, const std::vector<Row>& rows, const std::vector<Fit>& fits,
                bool with_mc, bool with_fits) {
  nlohmann::ordered_json doc;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["n"] = r.n;
    j["K"] = jnum(r.K);
    j["model"] = r.model;
    j["interval_lo"] = jnum(r.interval.lo);
    j["interval_hi"] = jnum(r.interval.hi);
    j["method"] = to_string(r.method);
    j["value"] = jnum(r.value);
    j["err"] = jnum(r.err);
    j["f1_part"] = jnum(r.f1);
    j["f2_part"] = jnum(r.f2);
    j["prediction"] = jnum(r.prediction);
    j["ratio"] = jnum(r.ratio);
    if (with_mc) {
      j["mc_value"] = jnum(r.mc_value);
      j["mc_err"] = jnum(r.mc_err);
      j["z"] = jnum(r.z);
    }
    j["flagged"] = r.flagged;
    doc["rows"].push_back(std::move(j));
  }
  if (with_fits) {
    doc["fits"] = nlohmann::ordered_json::array();
    for (const auto& f : fits) {
      doc["fits"].push_back({{"interval_lo", jnum(f.interval.lo)},
                             {"interval_hi", jnum(f.interval.hi)},
                             {"slope", jnum(f.fit.slope)},
                             {"intercept", jnum(f.fit.intercept)},
                             {"max_residual", jnum(f.fit.max_residual)},
                             {"target_slope", jnum(f.target)}});
    }
  }
  os << doc.dump(2) << '\n';
}

Row kac_rice_row(const PolynomialEnsemble& e, const IntervalSpec& iv, const CrossingEstimate& est) {
  Row r;
  r.n = e.n;
  r.K = e.level;
  r.model = e.model.label();
  r.interval = iv;
  r.method = Method::kKacRice;
  r.value = est.value;
  r.err = est.abs_err;
  r.f1 = est.f1_part();
  r.f2 = est.f2_part();
  r.prediction = prediction_for(e.model, e.n, e.level, iv);
  r.ratio = r.value / r.prediction;
  r.flagged = est.flagged;
  return r;
}

Row failed_row(const RunConfig& c, std::size_t n, const CovarianceModel& model,
               const IntervalSpec& iv, Method method) {
  Row r;
  r.n = n;
  try {
    r.K = c.k.level(n);
  } catch (const Error&) {
  }
  r.model = model.label();
  r.interval = iv;
  r.method = method;
  r.flagged = true;
  return r;
}

std::size_t to_size(const nlohmann::json& v, const std::string& field) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) config_error(field, "expected an integer");
  const auto i = v.get<long long>();
  if (i < 0) config_error(field, "must be nonnegative");
  return static_cast<std::size_t>(i);
}

}  // namespace

std::vector<std::size_t> parse_n_list(std::string_view text) {
  auto parse_one = [&text](std::string_view s) {
    std::size_t v = 0;
    if (s.empty()) config_error("n", "bad list '" + std::string(text) + "'");
    for (char ch : s) {
      if (ch < '0' || ch > '9') config_error("n", "bad list '" + std::string(text) + "'");
      v = v * 10 + static_cast<std::size_t>(ch - '0');
      if (v > (std::size_t{1} << 40)) config_error("n", "value too large");
    }
    return v;
  };
  std::vector<std::size_t> out;
  if (text.find(':') != std::string_view::npos) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos || text.size() <= c2 + 2 || text[c2 + 1] != 'x') {
      config_error("n", "expected start:stop:xF, got '" + std::string(text) + "'");
    }
    const std::size_t start = parse_one(text.substr(0, c1));
    const std::size_t stop = parse_one(text.substr(c1 + 1, c2 - c1 - 1));
    const std::size_t factor = parse_one(text.substr(c2 + 2));
    if (start < 1 || stop < start || factor < 2) {
      config_error("n", "need 1 <= start <= stop and factor >= 2 in '" + std::string(text) + "'");
    }
    for (std::size_t v = start; v <= stop; v *= factor) out.push_back(v);
    return out;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    out.push_back(parse_one(text.substr(pos, end - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

void RunConfig::validate() const {
  if (ns.empty()) config_error("n", "empty list");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 1) config_error("n", "degrees must be >= 1");
    if (i > 0 && ns[i] <= ns[i - 1]) config_error("n", "list must be strictly ascending");
  }
  const CovarianceModel m = resolved_model();
  if (command != Command::kSimulate && !m.admits_density()) {
    config_error("model", m.label() + " has no spectral density; use simulate");
  }
  if (!std::isfinite(k.value)) config_error("k", "must be finite");
  if (k.kind == KRule::Kind::kGrowing && ns.front() < 16) {
    config_error("k", "growing rule needs n >= 16");
  }
  for (const auto& iv : intervals) {
    if (!(iv.lo < iv.hi)) config_error("interval", "need lo < hi in " + iv.to_string());
  }
  if (!(tol > 0.0) || !std::isfinite(tol)) config_error("tol", "must be positive");
  if ((command == Command::kSimulate || command == Command::kCompare) && count < 100) {
    config_error("count", "must be >= 100");
  }
  if (!samples_out.empty() && command != Command::kSimulate && command != Command::kCompare) {
    config_error("samples_out", "only simulate and compare draw samples");
  }
}

CovarianceModel RunConfig::resolved_model() const {
  try {
    return model_from_json(model);
  } catch (const Error& e) {
    config_error("model", e.what());
  }
}

std::vector<IntervalSpec> RunConfig::effective_intervals() const {
  if (!intervals.empty()) return intervals;
  const double inf = std::numeric_limits<double>::infinity();
  return {{-inf, -1.0}, {-1.0, 1.0}, {1.0, inf}};
}

RunConfig apply_config_json(const nlohmann::json& j, RunConfig c) {
  if (!j.is_object()) config_error("config", "expected a JSON object");
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "command") {
        if (!v.is_string()) config_error(key, "expected a string");
        c.command = parse_command(v.get<std::string>());
      } else if (key == "n") {
        if (v.is_string()) {
          c.ns = parse_n_list(v.get<std::string>());
        } else if (v.is_array()) {
          c.ns.clear();
          for (const auto& x : v) c.ns.push_back(to_size(x, key));
        } else {
          c.ns = {to_size(v, key)};
        }
      } else if (key == "model") {
        if (!v.is_string() && !v.is_object()) config_error(key, "expected a string or an object");
        c.model = v;
        (void)model_from_json(v);
      } else if (key == "k") {
        c.k = v.is_string() ? KRule::parse(v.get<std::string>())
                            : KRule{KRule::Kind::kFixed, v.get<double>()};
      } else if (key == "interval") {
        c.intervals.clear();
        if (v.is_string()) {
          c.intervals.push_back(IntervalSpec::parse(v.get<std::string>()));
        } else if (v.is_array()) {
          for (const auto& x : v) c.intervals.push_back(IntervalSpec::parse(x.get<std::string>()));
        } else {
          config_error(key, "expected a string or a list of strings");
        }
      } else if (key == "tol") {
        c.tol = v.get<double>();
      } else if (key == "count") {
        c.count = to_size(v, key);
      } else if (key == "seed") {
        if (!v.is_number_integer() && !v.is_number_unsigned()) config_error(key, "expected an integer");
        c.seed = v.get<std::uint64_t>();
      } else if (key == "format") {
        c.format = parse_format(v.get<std::string>());
      } else if (key == "output") {
        c.output = v.get<std::string>();
      } else if (key == "samples_out") {
        c.samples_out = v.get<std::string>();
      } else if (key == "threads") {
        c.threads = static_cast<unsigned>(to_size(v, key));
      } else {
        config_error(key, "unknown field");
      }
    } catch (const nlohmann::json::exception& e) {
      config_error(key, e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfig && std::string(e.what()).find(key) != std::string::npos) {
        throw;
      }
      config_error(key, e.what());
    }
  }
  return c;
}

namespace {

struct Flags {
  std::string n, model, k, format, output, samples_out, config;
  std::vector<std::string> intervals;
  double tol = 0.0;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--n", f.n, "degree, list a,b,c or start:stop:xF");
  sub->add_option("--model", f.model, "independent | geometric:r | raised_cosine[:r] | constant:r | custom_fourier:g0,g1,...");
  sub->add_option("--k", f.k, "level: value, fixed:value or growing:c");
  sub->add_option("--interval", f.intervals, "a..b with -inf/inf; repeatable");
  sub->add_option("--tol", f.tol, "absolute quadrature tolerance");
  sub->add_option("--count", f.count, "Monte Carlo samples");
  sub->add_option("--seed", f.seed, "master seed");
  sub->add_option("--format", f.format, "csv or json");
  sub->add_option("--output", f.output, "output file (default stdout)");
  sub->add_option("--samples-out", f.samples_out, "per-sample counts CSV");
  sub->add_option("--config", f.config, "JSON file with the same field names");
  sub->add_option("--threads", f.threads, "worker threads (default LEVELCROSS_THREADS or 1)");
}

RunConfig build_config(CLI::App& app, const Flags& f) {
  RunConfig c;
  for (const auto* sub : app.get_subcommands()) c.command = parse_command(sub->get_name());
  const CLI::App* sub = app.get_subcommands().front();
  auto given = [sub](const char* name) { return sub->count(name) > 0; };
  if (given("--config")) {
    std::ifstream in(f.config);
    if (!in) config_error("config", "cannot open '" + f.config + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      config_error("config", e.what());
    }
    const Command cmd = c.command;
    c = apply_config_json(j, c);
    c.command = cmd;
  }
  if (given("--n")) c.ns = parse_n_list(f.n);
  if (given("--model")) c.model = f.model;
  if (given("--k")) {
    try {
      c.k = KRule::parse(f.k);
    } catch (const Error& e) {
      config_error("k", e.what());
    }
  }
  if (given("--interval")) {
    c.intervals.clear();
    for (const auto& s : f.intervals) c.intervals.push_back(IntervalSpec::parse(s));
  }
  if (given("--tol")) c.tol = f.tol;
  if (given("--count")) c.count = f.count;
  if (given("--seed")) c.seed = f.seed;
  if (given("--format")) c.format = parse_format(f.format);
  if (given("--output")) c.output = f.output;
  if (given("--samples-out")) c.samples_out = f.samples_out;
  if (given("--threads")) c.threads = f.threads;
  c.validate();
  return c;
}

void setup_app(CLI::App& app, Flags& f) {
  app.require_subcommand(1);
  add_flags(app.add_subcommand("compute", "Kac-Rice quadrature of E[N_K]"), f);
  add_flags(app.add_subcommand("simulate", "Monte Carlo estimate of E[N_K]"), f);
  add_flags(app.add_subcommand("compare", "quadrature against Monte Carlo with z-scores"), f);
  add_flags(app.add_subcommand("sweep", "crossing table over n with log-slope fits"), f);
}

}  // namespace

RunConfig parse_command_line(int argc, const char* const* argv) {
  CLI::App app{"levelcross"};
  Flags f;
  setup_app(app, f);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorCode::kConfig, std::string("arguments: ") + e.what());
  }
  return build_config(app, f);
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  config.validate();
  const CovarianceModel model = config.resolved_model();
  const auto intervals = config.effective_intervals();
  const bool with_mc = config.command == Command::kCompare;
  const bool with_fits = config.command == Command::kSweep;
  QuadratureOptions qopts;
  qopts.tol = config.tol;
  MCOptions mopts;
  mopts.count = config.count;
  mopts.seed = config.seed;
  mopts.threads = config.threads;

  std::vector<Row> rows;
  std::vector<Fit> fits;
  std::ostringstream samples;
  if (!config.samples_out.empty()) samples << "n,K,interval_lo,interval_hi,sample_index,count\n";
  int status = 0;

  for (std::size_t n : config.ns) {
    const IntervalSpec* current = &intervals.front();
    try {
      const PolynomialEnsemble e{n, model, config.k.level(n)};
      std::vector<MCEstimate> mc;
      if (config.command == Command::kSimulate || config.command == Command::kCompare) {
        SampleCounts per;
        mc = estimate_crossings(e, intervals, mopts, config.samples_out.empty() ? nullptr : &per);
        for (std::size_t i = 0; i < per.size(); ++i) {
          for (std::size_t j = 0; j < intervals.size(); ++j) {
            samples << n << ',' << num(e.level) << ',' << num(intervals[j].lo) << ','
                    << num(intervals[j].hi) << ',' << i << ',' << per[i][j] << '\n';
          }
        }
      }
      for (std::size_t j = 0; j < intervals.size(); ++j) {
        current = &intervals[j];
        if (config.command == Command::kSimulate) {
          Row r;
          r.n = n;
          r.K = e.level;
          r.model = model.label();
          r.interval = intervals[j];
          r.method = Method::kMonteCarlo;
          r.value = mc[j].mean;
          r.err = mc[j].std_error;
          r.prediction = prediction_for(model, n, e.level, intervals[j]);
          r.ratio = r.value / r.prediction;
          r.flagged = mc[j].unreliable;
          rows.push_back(r);
          continue;
        }
        const CrossingEstimate est = expected_crossings(e, intervals[j], qopts);
        Row r = kac_rice_row(e, intervals[j], est);
        if (with_mc) {
          r.mc_value = mc[j].mean;
          r.mc_err = mc[j].std_error;
          r.z = (r.mc_value - r.value) / r.mc_err;
          r.flagged = r.flagged || mc[j].unreliable;
        }
        rows.push_back(r);
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfig) throw;
      err << "levelcross: n=" << n << " interval " << current->to_string() << ": " << e.what()
          << '\n';
      rows.push_back(failed_row(config, n, model,
                                *current, config.command == Command::kSimulate
                                              ? Method::kMonteCarlo
                                              : Method::kKacRice));
      status = 2;
      break;
    }
  }

  if (with_fits && status == 0) {
    for (const auto& iv : intervals) {
      std::vector<LogSlopeSample> s;
      std::vector<LogSlopeSample> p;
      for (const auto& r : rows) {
        if (r.interval == iv) {
          s.push_back({static_cast<double>(r.n), r.value});
          p.push_back({static_cast<double>(r.n), r.prediction});
        }
      }
      if (s.size() < 4) {
        err << "levelcross: fit for " << iv.to_string() << " skipped (needs >= 4 degrees)\n";
        continue;
      }
      Fit f{iv, fit_log_slope(s), kNaN};
      if (!std::isnan(p.front().value)) f.target = fit_log_slope(p).slope;
      fits.push_back(f);
    }
  }

  std::ofstream file;
  std::ostream* os = &out;
  if (!config.output.empty()) {
    file.open(config.output);
    if (!file) config_error("output", "cannot open '" + config.output + "'");
    os = &file;
  }
  if (config.format == Format::kCsv) {
    write_csv(*os, rows, fits, with_mc);
  } else {
    write_json(*os, rows, fits, with_mc, with_fits);
  }
  if (!config.samples_out.empty()) {
    std::ofstream s(config.samples_out);
    if (!s) config_error("samples_out", "cannot open '" + config.samples_out + "'");
    s << samples.str();
  }
  return status;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"levelcross: expected level crossings of random polynomials with stationary "
               "Gaussian coefficients"};
  Flags f;
  setup_app(app, f);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  try {
    const RunConfig c = build_config(app, f);
    return run(c, out, err);
  } catch (const Error& e) {
    err << "levelcross: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "levelcross: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace levelcross
