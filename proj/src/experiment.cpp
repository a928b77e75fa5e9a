#include "thermavg/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "thermavg/adversarial.hpp"
#include "thermavg/distinguish.hpp"
#include "thermavg/rng.hpp"
#include "thermavg/thermal.hpp"

#ifndef THERMAVG_VERSION
#define THERMAVG_VERSION "0.0.0"
#endif

namespace thermavg {

using json = nlohmann::json;

bool ValidationResult::ok() const {
  return config.has_value() &&
         std::none_of(diagnostics.begin(), diagnostics.end(),
                      [](const Diagnostic& d) { return d.level == Diagnostic::Level::error; });
}

std::string format_diagnostic(const Diagnostic& d) {
  std::string s = d.level == Diagnostic::Level::error ? "error: " : "warning: ";
  if (!d.field.empty()) s += d.field + ": ";
  return s + d.message;
}

// -----------------------------------------------------------------------------
// Schema

namespace {

class Reader {
 public:
  explicit Reader(std::vector<Diagnostic>& out) : out_(out) {}

  void error(const std::string& field, const std::string& msg) {
    out_.push_back({Diagnostic::Level::error, field, msg});
  }
  void warn(const std::string& field, const std::string& msg) {
    out_.push_back({Diagnostic::Level::warning, field, msg});
  }
  bool failed() const {
    return std::any_of(out_.begin(), out_.end(),
                       [](const Diagnostic& d) { return d.level == Diagnostic::Level::error; });
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  /// Warns about keys outside `known`.
  void unknown_keys(const json& obj, const std::string& path, std::set<std::string> known) {
    for (const auto& [k, v] : obj.items())
      if (!known.count(k)) warn(join(path, k), "unknown key '" + k + "' is ignored");
  }

  /// Returns the sub-object, or nullptr (with an error if it had the wrong type).
  const json* object(const json& obj, const std::string& key, const std::string& path,
                     bool required) {
    const std::string f = join(path, key);
    if (!obj.contains(key)) {
      if (required) error(f, "missing required object");
      return nullptr;
    }
    if (!obj[key].is_object()) {
      error(f, "expected an object");
      return nullptr;
    }
    return &obj[key];
  }

  template <class T>
  void integer(const json& obj, const std::string& key, const std::string& path, T& dst,
               long long min_value) {
    if (!obj.contains(key)) return;
    const std::string f = join(path, key);
    const json& v = obj[key];
    if (!v.is_number_integer()) {
      error(f, "expected an integer");
      return;
    }
    const long long x = v.get<long long>();
    if (x < min_value) {
      error(f, "must be at least " + std::to_string(min_value) + ", got " + std::to_string(x));
      return;
    }
    dst = static_cast<T>(x);
  }

  void number(const json& obj, const std::string& key, const std::string& path, double& dst) {
    if (!obj.contains(key)) return;
    const json& v = obj[key];
    if (!v.is_number()) {
      error(join(path, key), "expected a number");
      return;
    }
    dst = v.get<double>();
    if (!std::isfinite(dst)) error(join(path, key), "must be finite");
  }

  bool string(const json& obj, const std::string& key, const std::string& path, std::string& dst,
              bool required) {
    if (!obj.contains(key)) {
      if (required) error(join(path, key), "missing required string");
      return false;
    }
    if (!obj[key].is_string()) {
      error(join(path, key), "expected a string");
      return false;
    }
    dst = obj[key].get<std::string>();
    return true;
  }

 private:
  std::vector<Diagnostic>& out_;
};

void read_model(Reader& r, const json& m, ModelSpec& spec) {
  const std::string p = "model";
  r.unknown_keys(m, p,
                 {"kind", "dim", "chain_length", "coupling", "transverse", "longitudinal",
                  "spectrum", "scar_count", "degeneracy_profile"});
  std::string kind;
  if (r.string(m, "kind", p, kind, true)) {
    try {
      spec.kind = model_kind_from_string(kind);
    } catch (const ValidationError& e) {
      r.error("model.kind", std::string(e.what()) +
                                "; expected random_gue, spin_chain, scarred, explicit_diagonal "
                                "or degenerate_block");
      return;
    }
  }
  r.integer(m, "dim", p, spec.dim, 1);
  r.integer(m, "chain_length", p, spec.chain_length, 1);
  r.number(m, "coupling", p, spec.coupling);
  r.number(m, "transverse", p, spec.transverse);
  r.number(m, "longitudinal", p, spec.longitudinal);
  r.integer(m, "scar_count", p, spec.scar_count, 0);
  if (m.contains("spectrum")) {
    if (!m["spectrum"].is_array()) {
      r.error("model.spectrum", "expected an array of numbers");
    } else {
      for (const auto& x : m["spectrum"]) {
        if (!x.is_number()) {
          r.error("model.spectrum", "expected an array of numbers");
          break;
        }
        spec.spectrum.push_back(x.get<double>());
      }
    }
  }
  if (m.contains("degeneracy_profile")) {
    if (!m["degeneracy_profile"].is_array()) {
      r.error("model.degeneracy_profile", "expected an array of positive integers");
    } else {
      for (const auto& x : m["degeneracy_profile"]) {
        if (!x.is_number_integer() || x.get<long long>() < 1) {
          r.error("model.degeneracy_profile", "expected an array of positive integers");
          break;
        }
        spec.degeneracy_profile.push_back(x.get<int>());
      }
    }
  }

  switch (spec.kind) {
    case ModelKind::spin_chain:
      if (spec.chain_length < 2 || spec.chain_length > 10) {
        r.error("model.chain_length", "spin_chain needs chain_length in [2, 10]");
      } else {
        const int dim = 1 << spec.chain_length;
        if (spec.dim != 0 && spec.dim != dim)
          r.error("model.dim", "must equal 2^chain_length = " + std::to_string(dim));
        spec.dim = dim;
      }
      break;
    case ModelKind::explicit_diagonal:
      if (!spec.spectrum.empty()) {
        if (spec.dim != 0 && spec.dim != static_cast<int>(spec.spectrum.size()))
          r.error("model.dim", "must equal the length of model.spectrum");
        spec.dim = static_cast<int>(spec.spectrum.size());
      } else if (spec.dim < 1) {
        r.error("model.dim", "explicit_diagonal needs dim or spectrum");
      }
      break;
    case ModelKind::degenerate_block: {
      if (spec.degeneracy_profile.empty()) {
        r.error("model.degeneracy_profile", "degenerate_block needs a non-empty profile");
        break;
      }
      int dim = 0;
      for (int g : spec.degeneracy_profile) dim += g;
      if (spec.dim != 0 && spec.dim != dim)
        r.error("model.dim", "must equal the sum of model.degeneracy_profile");
      spec.dim = dim;
      break;
    }
    case ModelKind::scarred:
      if (spec.dim < 8) r.error("model.dim", "scarred needs dim >= 8");
      else if (spec.scar_count < 1 || 4 * spec.scar_count >= spec.dim)
        r.error("model.scar_count", "scarred needs 1 <= scar_count < dim/4");
      break;
    case ModelKind::random_gue:
      if (spec.dim < 1) r.error("model.dim", "random_gue needs dim >= 1");
      break;
  }
  if (spec.dim > 2048) r.error("model.dim", "dense diagonalisation is limited to dim <= 2048");
}

void read_band(Reader& r, const json& b, BandConfig& band) {
  const std::string p = "band";
  r.unknown_keys(b, p, {"mode", "lo", "hi"});
  std::string mode = "fraction";
  r.string(b, "mode", p, mode, false);
  if (mode == "fraction") {
    band.mode = BandConfig::Mode::fraction;
    r.number(b, "lo", p, band.lo_frac);
    r.number(b, "hi", p, band.hi_frac);
    if (!(band.lo_frac >= 0.0 && band.lo_frac < band.hi_frac && band.hi_frac <= 1.0))
      r.error("band", "fraction window needs 0 <= lo < hi <= 1");
  } else if (mode == "index") {
    band.mode = BandConfig::Mode::index;
    if (!b.contains("lo") || !b.contains("hi")) r.error("band", "index mode needs lo and hi");
    r.integer(b, "lo", p, band.lo, 0);
    r.integer(b, "hi", p, band.hi, 0);
    if (band.lo > band.hi) r.error("band", "index range needs lo <= hi");
  } else {
    r.error("band.mode", "expected 'fraction' or 'index', got '" + mode + "'");
  }
}

void read_measurements(Reader& r, const json& m, MeasurementConfig& mc) {
  const std::string p = "measurements";
  r.unknown_keys(m, p, {"type", "n_povms", "outcomes", "dim_s", "position"});
  std::string type;
  if (!r.string(m, "type", p, type, true)) return;
  if (type == "eigenbasis") {
    mc.type = MeasurementConfig::Type::eigenbasis;
  } else if (type == "random_coarse") {
    mc.type = MeasurementConfig::Type::random_coarse;
    r.integer(m, "n_povms", p, mc.n_povms, 1);
    r.integer(m, "outcomes", p, mc.outcomes, 2);
  } else if (type == "subsystem") {
    mc.type = MeasurementConfig::Type::subsystem;
    r.integer(m, "dim_s", p, mc.dim_s, 1);
    std::string pos = "first";
    r.string(m, "position", p, pos, false);
    if (pos == "first") mc.position = SubsystemPosition::first;
    else if (pos == "last") mc.position = SubsystemPosition::last;
    else r.error("measurements.position", "expected 'first' or 'last'");
  } else {
    r.error("measurements.type",
            "expected 'eigenbasis', 'random_coarse' or 'subsystem', got '" + type + "'");
  }
}

void read_tolerances(Reader& r, const json& t, Tolerances& tol) {
  const std::string p = "tolerances";
  const std::map<std::string, double*> fields{
      {"hermiticity", &tol.hermiticity}, {"trace", &tol.trace},
      {"psd", &tol.psd},                 {"gram", &tol.gram},
      {"reconstruction", &tol.reconstruction}, {"degeneracy", &tol.degeneracy},
      {"povm_sum", &tol.povm_sum},       {"weight", &tol.weight},
      {"tails_zero", &tol.tails_zero},   {"projector", &tol.projector},
      {"bound_pass", &tol.bound_pass},   {"gap", &tol.gap}};
  std::set<std::string> known;
  for (const auto& [k, v] : fields) known.insert(k);
  r.unknown_keys(t, p, known);
  for (const auto& [k, dst] : fields) {
    r.number(t, k, p, *dst);
    if (t.contains(k) && !(*dst > 0.0)) r.error(Reader::join(p, k), "must be positive");
  }
}

void applicability(Reader& r, const ExperimentConfig& c) {
  const bool subsystem = c.measurements.type == MeasurementConfig::Type::subsystem;
  for (std::size_t i = 0; i < c.checks.size(); ++i) {
    const std::string f = "checks[" + std::to_string(i) + "]";
    const BoundName n = c.checks[i];
    if ((n == BoundName::thm2_subsystem || n == BoundName::thm3_subsystem) && !subsystem)
      r.error(f, to_string(n) + " requires subsystem measurements");
    if ((n == BoundName::thm2_finite || n == BoundName::thm3_finite) && subsystem)
      r.error(f, to_string(n) + " requires a finite measurement set");
    if ((n == BoundName::thm1_rms || n == BoundName::thm1_mean ||
         n == BoundName::convexity_chain) &&
        c.states.kind != StateConfig::Kind::band)
      r.warn(f, to_string(n) + " needs states inside the band; out-of-band states make it "
                               "inapplicable (use 'tails')");
    if (n == BoundName::equilibration && subsystem &&
        c.sampling.subsystem_form == SubsystemEquilibration::off)
      r.warn(f, "equilibration on a subsystem with subsystem_form 'off' is inapplicable");
  }
  std::set<BoundName> seen;
  for (BoundName n : c.checks)
    if (!seen.insert(n).second) r.warn("checks", "duplicate check '" + to_string(n) + "'");

  const int dim = c.model.dim;
  if (dim > 0 && subsystem && dim % c.measurements.dim_s != 0)
    r.error("measurements.dim_s", "must divide the Hilbert-space dimension " + std::to_string(dim));
  if (dim > 0 && c.band.mode == BandConfig::Mode::index && c.band.hi >= dim)
    r.error("band.hi", "index " + std::to_string(c.band.hi) + " outside the spectrum of size " +
                           std::to_string(dim));
  if (c.states.kind == StateConfig::Kind::profiled &&
      !(c.states.tail_weight >= 0.0 && c.states.tail_weight < 1.0))
    r.error("states.tail_weight", "must lie in [0, 1)");
}

}  // namespace

ValidationResult validate_config(const json& doc) {
  ValidationResult res;
  Reader r(res.diagnostics);
  if (!doc.is_object()) {
    r.error("", "config must be a JSON object");
    return res;
  }
  r.unknown_keys(doc, "",
                 {"model", "band", "measurements", "states", "checks", "ensemble", "sampling",
                  "thm3", "witness", "tolerances", "output"});
  ExperimentConfig c;
  if (const json* m = r.object(doc, "model", "", true)) read_model(r, *m, c.model);
  if (const json* b = r.object(doc, "band", "", false)) read_band(r, *b, c.band);
  if (const json* m = r.object(doc, "measurements", "", true)) read_measurements(r, *m, c.measurements);
  if (const json* s = r.object(doc, "states", "", false)) {
    r.unknown_keys(*s, "states", {"kind", "tail_weight"});
    std::string kind = "band";
    r.string(*s, "kind", "states", kind, false);
    if (kind == "band") c.states.kind = StateConfig::Kind::band;
    else if (kind == "full") c.states.kind = StateConfig::Kind::full;
    else if (kind == "profiled") c.states.kind = StateConfig::Kind::profiled;
    else r.error("states.kind", "expected 'band', 'full' or 'profiled', got '" + kind + "'");
    r.number(*s, "tail_weight", "states", c.states.tail_weight);
  }
  if (doc.contains("checks")) {
    if (!doc["checks"].is_array()) {
      r.error("checks", "expected an array of check names");
    } else {
      for (std::size_t i = 0; i < doc["checks"].size(); ++i) {
        const json& x = doc["checks"][i];
        const std::string f = "checks[" + std::to_string(i) + "]";
        if (!x.is_string()) {
          r.error(f, "expected a string");
          continue;
        }
        try {
          c.checks.push_back(bound_name_from_string(x.get<std::string>()));
        } catch (const ValidationError& e) {
          r.error(f, e.what());
        }
      }
    }
  }
  if (const json* e = r.object(doc, "ensemble", "", false)) {
    r.unknown_keys(*e, "ensemble", {"n_seeds", "base_seed"});
    r.integer(*e, "n_seeds", "ensemble", c.n_seeds, 1);
    r.integer(*e, "base_seed", "ensemble", c.base_seed, 0);
  }
  if (const json* s = r.object(doc, "sampling", "", false)) {
    r.unknown_keys(*s, "sampling",
                   {"n_times", "t_max", "t_max_over_min_gap", "subsystem_form"});
    r.integer(*s, "n_times", "sampling", c.sampling.n_times, 1);
    r.number(*s, "t_max", "sampling", c.sampling.t_max);
    if (s->contains("t_max_over_min_gap")) {
      double x = 0.0;
      r.number(*s, "t_max_over_min_gap", "sampling", x);
      c.sampling.t_max_over_min_gap = x;
      if (!(x > 0.0)) r.error("sampling.t_max_over_min_gap", "must be positive");
    }
    std::string form = to_string(c.sampling.subsystem_form);
    if (r.string(*s, "subsystem_form", "sampling", form, false)) {
      try {
        c.sampling.subsystem_form = subsystem_equilibration_from_string(form);
      } catch (const ValidationError& e) {
        r.error("sampling.subsystem_form", e.what());
      }
    }
    if (!(c.sampling.t_max > 0.0)) r.error("sampling.t_max", "must be positive");
  }
  if (const json* t = r.object(doc, "thm3", "", false)) {
    r.unknown_keys(*t, "thm3", {"n_restarts"});
    r.integer(*t, "n_restarts", "thm3", c.thm3_restarts, 1);
  }
  if (const json* w = r.object(doc, "witness", "", false)) {
    r.unknown_keys(*w, "witness", {"k"});
    r.integer(*w, "k", "witness", c.witness_k, 0);
  }
  if (const json* t = r.object(doc, "tolerances", "", false)) read_tolerances(r, *t, c.tolerances);
  if (doc.contains("output")) r.string(doc, "output", "", c.output, false);

  if (!r.failed()) applicability(r, c);
  if (!r.failed()) res.config = std::move(c);
  return res;
}

ValidationResult validate_config_file(const std::filesystem::path& path) {
  ValidationResult res;
  std::ifstream in(path);
  if (!in) {
    res.diagnostics.push_back({Diagnostic::Level::error, "", "cannot read " + path.string()});
    return res;
  }
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    res.diagnostics.push_back({Diagnostic::Level::error, "", std::string("parse error: ") + e.what()});
    return res;
  }
  return validate_config(doc);
}

// -----------------------------------------------------------------------------
// Running

std::size_t ExperimentResult::theorem_failures() const {
  std::size_t n = 0;
  for (const auto& inst : instances)
    for (const auto& c : inst.checks)
      if (c.status == CheckStatus::failed && is_theorem_class(c.name)) ++n;
  return n;
}

std::size_t ExperimentResult::statistical_failures() const {
  std::size_t n = 0;
  for (const auto& inst : instances)
    for (const auto& c : inst.checks)
      if (c.status == CheckStatus::failed && !is_theorem_class(c.name)) ++n;
  return n;
}

namespace {

EnergyBand make_band(const BandConfig& b, const SpectralSystem& sys) {
  if (b.mode == BandConfig::Mode::index) return select_band_by_index(sys, b.lo, b.hi);
  return select_band_by_fraction(sys, b.lo_frac, b.hi_frac);
}

MeasurementScheme make_scheme(const MeasurementConfig& m, const EnergyBand& band,
                              const SpectralSystem& sys, std::uint64_t seed) {
  switch (m.type) {
    case MeasurementConfig::Type::eigenbasis: return build_eigenbasis_measurements(band, sys);
    case MeasurementConfig::Type::random_coarse:
      return build_random_coarse_measurements(sys.dim(), m.n_povms, m.outcomes, seed);
    case MeasurementConfig::Type::subsystem: {
      SubsystemPartition part{m.dim_s, sys.dim() / m.dim_s, m.position};
      part.validate(sys.dim());
      return part;
    }
  }
  throw ValidationError("unknown measurement type");
}

template <class F>
void guarded(std::vector<BoundCheck>& out, BoundName name, F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    out.push_back(inapplicable_check(name, e.what()));
  } catch (const std::exception& e) {
    BoundCheck c = make_check(name, 1.0, 0.0);
    c.lhs = c.rhs = c.margin = std::numeric_limits<double>::quiet_NaN();
    c.status = CheckStatus::failed;
    c.details = std::string("internal error: ") + e.what();
    out.push_back(c);
  }
}

}  // namespace

InstanceResult run_instance(const ExperimentConfig& config, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  InstanceResult inst;
  inst.seed = seed;

  ModelSpec spec = config.model;
  spec.seed = derive_seed(seed, 1);
  const BuiltModel built = build_model(spec);
  const SpectralSystem& sys = built.sys;
  inst.scar_indices = built.scar_indices;

  const EnergyBand band = make_band(config.band, sys);
  const MeasurementScheme scheme = make_scheme(config.measurements, band, sys, derive_seed(seed, 2));
  const CMatrix basis = band_basis(sys, band);
  const BandProbe probe(basis, scheme);
  const EigenstateThermalStats stats = summarize(probe.per_eigenstate());
  inst.d = band.d;
  inst.d_mean = stats.mean;
  inst.d_rms = stats.rms;
  inst.d_max = stats.max;
  inst.argmax = stats.argmax;
  inst.per_eigenstate = stats.per_eigenstate;
  inst.band_energies = sys.energies().segment(band.index_lo, band.d);

  Rng rng(derive_seed(seed, 3));
  CVector psi;
  switch (config.states.kind) {
    case StateConfig::Kind::band: psi = random_band_state(sys, band, rng); break;
    case StateConfig::Kind::full: psi = random_pure_state(sys.dim(), rng); break;
    case StateConfig::Kind::profiled:
      psi = profiled_state(sys, band, config.states.tail_weight, rng);
      break;
  }
  const DensityMatrix rho0 = DensityMatrix::pure(psi);
  const TimeAveragedState omega = time_average(rho0, sys);
  const DegeneracyStructure full_deg = degeneracy_structure(sys);
  inst.d_eff = effective_dimension(omega, full_deg);
  const bool band_degenerate = band_degeneracy(sys, band).g > 1;

  // Thm 1 and the convexity chain act on the band part of omega, in omega's
  // own eigenbasis (the system basis unless the band is degenerate).
  std::optional<BandView> view;
  std::optional<BandProbe> view_probe;
  auto in_band_view = [&]() -> std::pair<const BandView&, const BandProbe&> {
    if (!view) {
      view = band_view(omega, band, sys);
      if (view->outside > 1e-10)
        throw ValidationError("initial state has out-of-band weight " +
                              std::to_string(view->outside) + "; use the tails check");
      if (band_degenerate) view_probe.emplace(view->basis, scheme);
    }
    return {*view, view_probe ? *view_probe : probe};
  };

  std::vector<BoundCheck> out;
  for (BoundName name : config.checks) {
    const std::size_t before = out.size();
    guarded(out, name, [&] {
      switch (name) {
        case BoundName::thm1_rms:
        case BoundName::thm1_mean: {
          auto [v, p] = in_band_view();
          auto [rms, mean] = check_thm1(v.weights, p);
          out.push_back(name == BoundName::thm1_rms ? rms : mean);
          break;
        }
        case BoundName::convexity_chain: {
          auto [v, p] = in_band_view();
          out.push_back(check_convexity_chain(v.weights, p));
          break;
        }
        case BoundName::equilibration: {
          EquilibrationOptions opt;
          opt.n_times = config.sampling.n_times;
          opt.t_max = config.sampling.t_max;
          if (config.sampling.t_max_over_min_gap) {
            const double gap = min_nonzero_gap(sys);
            if (!(gap > 0.0)) throw ValidationError("spectrum has no nonzero gap");
            opt.t_max = *config.sampling.t_max_over_min_gap / gap;
          }
          opt.seed = derive_seed(seed, 4);
          opt.subsystem_form = config.sampling.subsystem_form;
          opt.gap_tolerance = config.tolerances.gap;
          out.push_back(check_equilibration(psi, sys, scheme, opt));
          break;
        }
        case BoundName::thm2_finite:
        case BoundName::thm2_subsystem:
          out.push_back(check_thm2(basis, scheme, config.witness_k));
          break;
        case BoundName::tails:
          out.push_back(check_tails(rho0, band, sys, scheme));
          break;
        case BoundName::deff_sandwich:
          out.push_back(check_deff_sandwich(omega, full_deg));
          break;
        case BoundName::thm3_finite:
        case BoundName::thm3_subsystem: {
          Thm3Options opt;
          opt.n_restarts = config.thm3_restarts;
          opt.seed = derive_seed(seed, 5);
          opt.k = config.witness_k;
          out.push_back(check_thm3(band, sys, scheme, opt));
          break;
        }
      }
    });
    for (std::size_t i = before; i < out.size(); ++i) {
      BoundCheck& c = out[i];
      c.seed = seed;
      if (c.d == 0) c.d = band.d;
      if (c.power == 0) c.power = measuring_power(scheme);
      if (std::isnan(c.d_eff) && c.status != CheckStatus::inapplicable) c.d_eff = inst.d_eff;
    }
  }
  inst.checks = std::move(out);
  inst.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return inst;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  set_tolerances(config.tolerances);
  ExperimentResult res;
  res.config = config;
  const int n = config.n_seeds;
  res.instances.resize(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));

#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    try {
      res.instances[static_cast<std::size_t>(i)] =
          run_instance(config, config.base_seed + static_cast<std::uint64_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (const auto& inst : res.instances)
    for (const auto& c : inst.checks) {
      const std::string id = to_string(c.name) + " seed " + std::to_string(c.seed);
      if (c.status == CheckStatus::inapplicable)
        res.warnings.push_back(id + " inapplicable: " + c.details);
      else if (c.status == CheckStatus::failed && !is_theorem_class(c.name))
        res.warnings.push_back(id + " failed after re-run (statistical): " + c.details);
    }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

// -----------------------------------------------------------------------------
// Output

namespace {

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json check_json(const BoundCheck& c) {
  return json{{"name", to_string(c.name)},
              {"status", to_string(c.status)},
              {"statistical", c.statistical},
              {"seed", c.seed},
              {"d", c.d},
              {"d_eff", num(c.d_eff)},
              {"k", c.k},
              {"power", c.power},
              {"lhs", num(c.lhs)},
              {"rhs", num(c.rhs)},
              {"margin", num(c.margin)},
              {"epsilon", num(c.epsilon)},
              {"details", c.details}};
}

json distribution(const std::vector<double>& v) {
  if (v.empty()) return json{{"count", 0}};
  double sum = 0.0;
  for (double x : v) sum += x;
  return json{{"count", v.size()},
              {"min", *std::min_element(v.begin(), v.end())},
              {"max", *std::max_element(v.begin(), v.end())},
              {"mean", sum / static_cast<double>(v.size())},
              {"values", v}};
}

constexpr int kHistBins = 10;

std::vector<int> deff_histogram(const ExperimentResult& r) {
  std::vector<int> h(kHistBins, 0);
  for (const auto& inst : r.instances) {
    const double x = inst.d_eff / static_cast<double>(inst.d);
    const int b = std::clamp(static_cast<int>(std::floor(x * kHistBins)), 0, kHistBins - 1);
    ++h[static_cast<std::size_t>(b)];
  }
  return h;
}

std::string csv_num(double x) {
  if (!std::isfinite(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_row(const std::string& name, std::uint64_t seed, Index d, double d_eff, Index k,
                    std::size_t power, double lhs, double rhs, double margin,
                    const std::string& status) {
  std::ostringstream os;
  os << name << ',' << seed << ',' << d << ',' << csv_num(d_eff) << ','
     << (k > 0 ? std::to_string(k) : std::string()) << ',' << power << ',' << csv_num(lhs) << ','
     << csv_num(rhs) << ',' << csv_num(margin) << ',' << status << '\n';
  return os.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

}  // namespace

const char* const kChecksCsvHeader = "check_name,seed,d,d_eff,k,N_M_or_d_S,lhs,rhs,margin,status";

std::string checks_csv(const std::vector<BoundCheck>& checks) {
  std::string s = std::string(kChecksCsvHeader) + "\n";
  for (const auto& c : checks)
    s += csv_row(to_string(c.name), c.seed, c.d, c.d_eff, c.k, c.power, c.lhs, c.rhs, c.margin,
                 to_string(c.status));
  return s;
}

json config_to_json(const ExperimentConfig& c) {
  json model{{"kind", to_string(c.model.kind)},
             {"dim", c.model.dim},
             {"chain_length", c.model.chain_length},
             {"coupling", c.model.coupling},
             {"transverse", c.model.transverse},
             {"longitudinal", c.model.longitudinal},
             {"spectrum", c.model.spectrum},
             {"scar_count", c.model.scar_count},
             {"degeneracy_profile", c.model.degeneracy_profile}};
  json band = c.band.mode == BandConfig::Mode::fraction
                  ? json{{"mode", "fraction"}, {"lo", c.band.lo_frac}, {"hi", c.band.hi_frac}}
                  : json{{"mode", "index"}, {"lo", c.band.lo}, {"hi", c.band.hi}};
  json meas;
  switch (c.measurements.type) {
    case MeasurementConfig::Type::eigenbasis: meas = {{"type", "eigenbasis"}}; break;
    case MeasurementConfig::Type::random_coarse:
      meas = {{"type", "random_coarse"},
              {"n_povms", c.measurements.n_povms},
              {"outcomes", c.measurements.outcomes}};
      break;
    case MeasurementConfig::Type::subsystem:
      meas = {{"type", "subsystem"},
              {"dim_s", c.measurements.dim_s},
              {"position",
               c.measurements.position == SubsystemPosition::first ? "first" : "last"}};
      break;
  }
  const char* kinds[] = {"band", "full", "profiled"};
  json checks = json::array();
  for (BoundName n : c.checks) checks.push_back(to_string(n));
  json sampling{{"n_times", c.sampling.n_times},
                {"t_max", c.sampling.t_max},
                {"subsystem_form", to_string(c.sampling.subsystem_form)}};
  if (c.sampling.t_max_over_min_gap) sampling["t_max_over_min_gap"] = *c.sampling.t_max_over_min_gap;
  const Tolerances& t = c.tolerances;
  return json{{"model", model},
              {"band", band},
              {"measurements", meas},
              {"states",
               {{"kind", kinds[static_cast<int>(c.states.kind)]},
                {"tail_weight", c.states.tail_weight}}},
              {"checks", checks},
              {"ensemble", {{"n_seeds", c.n_seeds}, {"base_seed", c.base_seed}}},
              {"sampling", sampling},
              {"thm3", {{"n_restarts", c.thm3_restarts}}},
              {"witness", {{"k", c.witness_k}}},
              {"tolerances",
               {{"hermiticity", t.hermiticity},
                {"trace", t.trace},
                {"psd", t.psd},
                {"gram", t.gram},
                {"reconstruction", t.reconstruction},
                {"degeneracy", t.degeneracy},
                {"povm_sum", t.povm_sum},
                {"weight", t.weight},
                {"tails_zero", t.tails_zero},
                {"projector", t.projector},
                {"bound_pass", t.bound_pass},
                {"gap", t.gap}}},
              {"output", c.output}};
}

json report_json(const ExperimentResult& r) {
  json instances = json::array();
  std::map<std::string, json> per_check;
  std::vector<double> means, rmss;
  for (const auto& inst : r.instances) {
    json checks = json::array();
    for (const auto& c : inst.checks) {
      checks.push_back(check_json(c));
      json& agg = per_check[to_string(c.name)];
      if (agg.is_null())
        agg = json{{"passed", 0}, {"failed", 0}, {"inapplicable", 0}, {"min_margin", nullptr}};
      agg[to_string(c.status)] = agg[to_string(c.status)].get<int>() + 1;
      if (c.status != CheckStatus::inapplicable && std::isfinite(c.margin) &&
          (agg["min_margin"].is_null() || c.margin < agg["min_margin"].get<double>()))
        agg["min_margin"] = c.margin;
    }
    means.push_back(inst.d_mean);
    rmss.push_back(inst.d_rms);
    instances.push_back(json{{"seed", inst.seed},
                             {"d", inst.d},
                             {"d_eff", inst.d_eff},
                             {"eigenstate_stats",
                              {{"mean", inst.d_mean},
                               {"rms", inst.d_rms},
                               {"max", inst.d_max},
                               {"argmax", inst.argmax}}},
                             {"scar_indices", inst.scar_indices},
                             {"checks", checks}});
  }
  json edges = json::array();
  for (int b = 0; b <= kHistBins; ++b) edges.push_back(static_cast<double>(b) / kHistBins);
  json aggregate{{"checks", per_check},
                 {"d_mean", distribution(means)},
                 {"d_rms", distribution(rmss)},
                 {"d_eff_over_d_histogram", {{"edges", edges}, {"counts", deff_histogram(r)}}},
                 {"theorem_failures", r.theorem_failures()},
                 {"statistical_failures", r.statistical_failures()}};
  return json{{"tool", "thermavg"},
              {"version", THERMAVG_VERSION},
              {"config", config_to_json(r.config)},
              {"instances", instances},
              {"aggregate", aggregate},
              {"warnings", r.warnings}};
}

void write_outputs(const ExperimentResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "report.json", report_json(r).dump(2) + "\n");

  std::vector<BoundCheck> all;
  for (const auto& inst : r.instances) all.insert(all.end(), inst.checks.begin(), inst.checks.end());
  write_file(dir / "checks.csv", checks_csv(all));

  std::string eig = "seed,n,energy,D\n";
  for (const auto& inst : r.instances)
    for (Index n = 0; n < inst.per_eigenstate.size(); ++n)
      eig += std::to_string(inst.seed) + ',' + std::to_string(n) + ',' +
             csv_num(inst.band_energies(n)) + ',' + csv_num(inst.per_eigenstate(n)) + '\n';
  write_file(dir / "plotdata_eigenstates.csv", eig);

  std::string margin = "check_name,seed,d_eff_over_d,margin\n";
  for (const auto& c : all)
    if (c.status != CheckStatus::inapplicable && std::isfinite(c.d_eff))
      margin += to_string(c.name) + ',' + std::to_string(c.seed) + ',' +
                csv_num(c.d_eff / static_cast<double>(c.d)) + ',' + csv_num(c.margin) + '\n';
  write_file(dir / "plotdata_margin_vs_deff.csv", margin);

  std::string hist = "bin_lo,bin_hi,count\n";
  const auto h = deff_histogram(r);
  for (int b = 0; b < kHistBins; ++b)
    hist += csv_num(static_cast<double>(b) / kHistBins) + ',' +
            csv_num(static_cast<double>(b + 1) / kHistBins) + ',' +
            std::to_string(h[static_cast<std::size_t>(b)]) + '\n';
  write_file(dir / "plotdata_deff_histogram.csv", hist);

  json timings{{"total_seconds", r.seconds}, {"instances", json::array()}};
  for (const auto& inst : r.instances)
    timings["instances"].push_back({{"seed", inst.seed}, {"seconds", inst.seconds}});
  write_file(dir / "timings.json", timings.dump(2) + "\n");
}

void write_counterexample(Index d, const std::filesystem::path& dir, std::uint64_t seed) {
  const CounterexampleReport rep = counterexample_suite(d, seed);
  std::filesystem::create_directories(dir);
  json checks = json::array();
  std::string csv = std::string(kChecksCsvHeader) + "\n";
  for (const auto& c : rep.checks) {
    checks.push_back(json{{"name", c.name},
                          {"status", c.passed ? "passed" : "failed"},
                          {"lhs", c.lhs},
                          {"rhs", c.rhs},
                          {"details", c.details}});
    csv += csv_row("counterexample_" + c.name, seed, d, std::numeric_limits<double>::quiet_NaN(),
                   0, static_cast<std::size_t>(2 * d), c.lhs, c.rhs, c.rhs - c.lhs,
                   c.passed ? "passed" : "failed");
  }
  std::vector<double> per(rep.per_eigenstate.data(),
                          rep.per_eigenstate.data() + rep.per_eigenstate.size());
  const json report{{"tool", "thermavg"},
                    {"version", THERMAVG_VERSION},
                    {"counterexample",
                     {{"d", d},
                      {"seed", seed},
                      {"expected_eigenstate_value", 1.0 - 1.0 / static_cast<double>(d)},
                      {"mean_eigenstate_distinguishability", rep.mean},
                      {"per_eigenstate", per},
                      {"checks", checks},
                      {"all_passed", rep.all_passed()}}}};
  write_file(dir / "report.json", report.dump(2) + "\n");
  write_file(dir / "checks.csv", csv);
  std::string eig = "n,D\n";
  for (Index n = 0; n < d; ++n) eig += std::to_string(n) + ',' + csv_num(rep.per_eigenstate(n)) + '\n';
  write_file(dir / "plotdata_eigenstates.csv", eig);
}

}  // namespace thermavg
